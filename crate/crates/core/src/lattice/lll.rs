use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::gso::Gso;
use super::prime::PrimeLattice;
use crate::{Result, Scalar};

/// Default Lovász parameter.
pub const DEFAULT_DELTA: f64 = 0.99;

/// An LLL-reduced basis with the unimodular transform that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis<T> {
    /// Reduced basis vectors `d_1, ..., d_m`.
    pub vectors: Vec<Vec<BigInt>>,
    pub gso: Gso<T>,
    /// `transform[j]` holds the coefficients of `d_j` in the input basis, so
    /// `D = B U` with `U` the matrix whose columns are `transform[j]`.
    pub transform: Vec<Vec<BigInt>>,
    pub delta: f64,
}

impl<T: Scalar> ReducedBasis<T> {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

struct State<T> {
    b: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    mu: Vec<Vec<T>>,
    norms: Vec<T>,
}

impl<T: Scalar> State<T> {
    /// Size-reduce `b_k` against `b_l`.
    fn reduce(&mut self, k: usize, l: usize) {
        let two = T::one() + T::one();
        if two * self.mu[k][l].abs() <= T::one() {
            return;
        }
        let q = self.mu[k][l].round_half_up();
        let qt = T::from_bigint(&q);
        let (head, tail) = self.b.split_at_mut(k);
        for (x, y) in tail[0].iter_mut().zip(&head[l]) {
            *x -= &q * y;
        }
        let (head, tail) = self.u.split_at_mut(k);
        for (x, y) in tail[0].iter_mut().zip(&head[l]) {
            *x -= &q * y;
        }
        self.mu[k][l] = self.mu[k][l].clone() - qt.clone();
        for i in 0..l {
            self.mu[k][i] = self.mu[k][i].clone() - qt.clone() * self.mu[l][i].clone();
        }
    }

    fn swap(&mut self, k: usize) {
        let n = self.b.len();
        self.b.swap(k, k - 1);
        self.u.swap(k, k - 1);
        for j in 0..k - 1 {
            let t = self.mu[k][j].clone();
            self.mu[k][j] = self.mu[k - 1][j].clone();
            self.mu[k - 1][j] = t;
        }
        let m = self.mu[k][k - 1].clone();
        let big = self.norms[k].clone() + m.clone() * m.clone() * self.norms[k - 1].clone();
        self.mu[k][k - 1] = m.clone() * self.norms[k - 1].clone() / big.clone();
        self.norms[k] = self.norms[k - 1].clone() * self.norms[k].clone() / big.clone();
        self.norms[k - 1] = big;
        for i in k + 1..n {
            let t = self.mu[i][k].clone();
            self.mu[i][k] = self.mu[i][k - 1].clone() - m.clone() * t.clone();
            self.mu[i][k - 1] = t + self.mu[k][k - 1].clone() * self.mu[i][k].clone();
        }
    }

    fn lovasz_fails(&self, k: usize, delta: &T) -> bool {
        let m = self.mu[k][k - 1].clone();
        self.norms[k] < (delta.clone() - m.clone() * m) * self.norms[k - 1].clone()
    }
}

/// LLL reduction of linearly independent integer vectors.
///
/// Exact scalars first take a floating point pass; the exact pass then only
/// has to repair what rounding missed, and the result is certified exactly.
pub fn lll_reduce_vectors<T: Scalar>(vectors: &[Vec<BigInt>], delta: f64) -> Result<ReducedBasis<T>> {
    assert!(delta > 0.25 && delta < 1.0, "delta must lie in (1/4, 1)");
    if T::EXACT && vectors.len() > PREPASS_MIN_DIM {
        if let Ok(pre) = lll_plain::<f64>(vectors, delta) {
            let mut out = lll_plain::<T>(&pre.vectors, delta)?;
            out.transform = compose(&pre.transform, &out.transform);
            return Ok(out);
        }
    }
    lll_plain(vectors, delta)
}

const PREPASS_MIN_DIM: usize = 6;

/// Columns of `a * b` where both hold column lists.
fn compose(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    b.iter()
        .map(|col| {
            let mut out = vec![BigInt::zero(); a.first().map_or(0, Vec::len)];
            for (c, acol) in col.iter().zip(a) {
                if c.is_zero() {
                    continue;
                }
                for (x, y) in out.iter_mut().zip(acol) {
                    *x += c * y;
                }
            }
            out
        })
        .collect()
}

fn lll_plain<T: Scalar>(vectors: &[Vec<BigInt>], delta: f64) -> Result<ReducedBasis<T>> {
    let n = vectors.len();
    let gso = Gso::<T>::from_basis(vectors)?;
    let identity = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut st = State {
        b: vectors.to_vec(),
        u: identity,
        mu: gso.mu,
        norms: gso.norms_sq,
    };
    let d = T::from_param(delta);
    // Floating point updates drift; a fresh orthogonalization catches that.
    for _ in 0..8 {
        let mut k = 1;
        while k < n {
            st.reduce(k, k - 1);
            if st.lovasz_fails(k, &d) {
                st.swap(k);
                k = (k - 1).max(1);
            } else {
                for l in (0..k - 1).rev() {
                    st.reduce(k, l);
                }
                k += 1;
            }
        }
        if T::EXACT {
            break;
        }
        let fresh = Gso::<T>::from_basis(&st.b)?;
        let done = fresh.is_size_reduced() && fresh.lovasz_holds(delta);
        st.mu = fresh.mu;
        st.norms = fresh.norms_sq;
        if done {
            break;
        }
    }
    Ok(ReducedBasis {
        vectors: st.b,
        gso: Gso {
            mu: st.mu,
            norms_sq: st.norms,
        },
        transform: st.u,
        delta,
    })
}

/// LLL reduction of a prime lattice's basis.
pub fn lll_reduce<T: Scalar>(lattice: &PrimeLattice, delta: f64) -> Result<ReducedBasis<T>> {
    lll_reduce_vectors(&lattice.columns(), delta)
}
