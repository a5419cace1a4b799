use num_bigint::BigInt;

use crate::{Error, Result, Scalar};

/// Gram-Schmidt coefficients of an ordered list of integer vectors.
///
/// `mu[i][j] = <b_i, b*_j> / |b*_j|^2` for `j < i` (with `mu[i][i] = 1`) and
/// `norms_sq[i] = |b*_i|^2`. The orthogonal vectors themselves are not
/// stored; see [`Gso::vectors`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gso<T> {
    pub mu: Vec<Vec<T>>,
    pub norms_sq: Vec<T>,
}

/// Orthogonal vectors together with their coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Orthogonalization<T> {
    pub vectors: Vec<Vec<T>>,
    pub gso: Gso<T>,
}

pub(crate) fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub(crate) fn to_scalar<T: Scalar>(v: &[BigInt]) -> Vec<T> {
    v.iter().map(T::from_bigint).collect()
}

impl<T: Scalar> Gso<T> {
    /// Coefficients from the exact integer Gram matrix.
    pub fn from_basis(vectors: &[Vec<BigInt>]) -> Result<Self> {
        let n = vectors.len();
        let mut mu = vec![vec![T::zero(); n]; n];
        let mut norms_sq: Vec<T> = Vec::with_capacity(n);
        for i in 0..n {
            let gii = T::from_bigint(&dot_int(&vectors[i], &vectors[i]));
            for j in 0..i {
                let mut acc = T::from_bigint(&dot_int(&vectors[i], &vectors[j]));
                for k in 0..j {
                    acc = acc - mu[j][k].clone() * mu[i][k].clone() * norms_sq[k].clone();
                }
                mu[i][j] = acc / norms_sq[j].clone();
            }
            mu[i][i] = T::one();
            let mut b = gii.clone();
            for k in 0..i {
                b = b - mu[i][k].clone() * mu[i][k].clone() * norms_sq[k].clone();
            }
            if b.is_negligible(&gii) || b <= T::zero() {
                return Err(Error::DegenerateBasis(i));
            }
            norms_sq.push(b);
        }
        Ok(Self { mu, norms_sq })
    }

    pub fn len(&self) -> usize {
        self.norms_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms_sq.is_empty()
    }

    /// `b*_i = b_i - sum_{j<i} mu_ij b*_j`.
    pub fn vectors(&self, basis: &[Vec<BigInt>]) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = Vec::with_capacity(basis.len());
        for (i, b) in basis.iter().enumerate() {
            let mut v = to_scalar::<T>(b);
            for (j, prev) in out.iter().enumerate() {
                let m = self.mu[i][j].clone();
                for (x, y) in v.iter_mut().zip(prev) {
                    *x = x.clone() - m.clone() * y.clone();
                }
            }
            out.push(v);
        }
        out
    }

    /// `|mu_ij| <= 1/2` for all `j < i` (with a small slack for floats).
    pub fn is_size_reduced(&self) -> bool {
        let half = T::one() / (T::one() + T::one());
        let limit = if T::EXACT {
            half
        } else {
            half + T::from_param(1e-6)
        };
        self.mu
            .iter()
            .enumerate()
            .all(|(i, row)| row[..i].iter().all(|x| x.abs() <= limit))
    }

    /// Lovász condition `B_k >= (delta - mu_{k,k-1}^2) B_{k-1}` for every
    /// consecutive pair.
    pub fn lovasz_holds(&self, delta: f64) -> bool {
        let delta = T::from_param(delta);
        let slack = if T::EXACT { T::zero() } else { T::from_param(1e-9) };
        (1..self.len()).all(|k| {
            let m = self.mu[k][k - 1].clone();
            let rhs = (delta.clone() - m.clone() * m) * self.norms_sq[k - 1].clone();
            self.norms_sq[k].clone() + slack.clone() * rhs.abs() >= rhs
        })
    }
}

/// Gram-Schmidt orthogonalization of linearly independent integer vectors.
pub fn gram_schmidt<T: Scalar>(vectors: &[Vec<BigInt>]) -> Result<Orthogonalization<T>> {
    let gso = Gso::from_basis(vectors)?;
    Ok(Orthogonalization {
        vectors: gso.vectors(vectors),
        gso,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::{One, Zero};
    use rand::Rng;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn orthogonal_input_is_unchanged() {
        let o = gram_schmidt::<Rational>(&ints(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(o.vectors, vec![to_scalar::<Rational>(&ints(&[&[1, 0]])[0]), to_scalar(&ints(&[&[0, 1]])[0])]);
    }

    #[test]
    fn shear_is_removed() {
        let o = gram_schmidt::<Rational>(&ints(&[&[1, 0], &[1, 1]])).unwrap();
        assert_eq!(o.vectors[1], to_scalar::<Rational>(&ints(&[&[0, 1]])[0]));
        assert_eq!(o.gso.mu[1][0], Rational::one());
        let f = gram_schmidt::<f64>(&ints(&[&[1, 0], &[1, 1]])).unwrap();
        assert_eq!(f.vectors[1], vec![0.0, 1.0]);
    }

    #[test]
    fn dependence_is_detected() {
        let basis = ints(&[&[1, 2, 3], &[2, 4, 6]]);
        assert!(matches!(gram_schmidt::<Rational>(&basis), Err(Error::DegenerateBasis(1))));
        assert!(matches!(gram_schmidt::<f64>(&basis), Err(Error::DegenerateBasis(1))));
    }

    #[test]
    fn random_bases_orthogonalize() {
        let mut rng = crate::seed::rng(11);
        let mut checked = 0;
        while checked < 50 {
            let basis: Vec<Vec<BigInt>> = (0..5)
                .map(|_| (0..5).map(|_| BigInt::from(rng.gen_range(-20..=20))).collect())
                .collect();
            let Ok(exact) = gram_schmidt::<Rational>(&basis) else { continue };
            let float = gram_schmidt::<f64>(&basis).unwrap();
            for i in 0..5 {
                for j in 0..i {
                    assert!(dot(&exact.vectors[i], &exact.vectors[j]).is_zero());
                    let d = dot(&float.vectors[i], &float.vectors[j]);
                    let scale = dot(&float.vectors[i], &float.vectors[i])
                        .sqrt()
                        * dot(&float.vectors[j], &float.vectors[j]).sqrt();
                    assert!(d.abs() < 1e-6 * scale, "dot {d} vs scale {scale}");
                }
            }
            // span preserved: b_i = b*_i + sum mu_ij b*_j
            for i in 0..5 {
                let mut rebuilt = exact.vectors[i].clone();
                for j in 0..i {
                    for (x, y) in rebuilt.iter_mut().zip(&exact.vectors[j]) {
                        *x += exact.gso.mu[i][j].clone() * y.clone();
                    }
                }
                assert_eq!(rebuilt, to_scalar::<Rational>(&basis[i]));
            }
            checked += 1;
        }
    }
}
