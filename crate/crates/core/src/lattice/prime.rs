use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::logs::scaled_ln_rounded;
use crate::numtheory::first_primes;
use crate::serde_util;
use crate::{Error, Result};

/// Default lattice precision `c`.
pub const DEFAULT_PRECISION: u32 = 4;

/// Prime lattice `B_{m,c}` for a semiprime `N`.
///
/// The basis is an `(m+1) x m` integer matrix whose columns are the basis
/// vectors: a diagonal block `diag(f(1), ..., f(m))` over a bottom row of
/// `round(10^c ln p_j)`. The target is `(0, ..., 0, round(10^c ln N))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeLattice {
    #[serde(rename = "N", with = "serde_util::bigint")]
    pub n: BigInt,
    pub m: usize,
    pub c: u32,
    /// `f(1), ..., f(m)`: a permutation of `ceil(1/2), ..., ceil(m/2)`.
    #[serde(rename = "f")]
    pub permutation: Vec<u64>,
    pub primes: Vec<u64>,
    /// Row-major, `m + 1` rows of `m` entries.
    #[serde(with = "serde_util::bigint_matrix")]
    pub basis: Vec<Vec<BigInt>>,
    #[serde(with = "serde_util::bigint_vec")]
    pub target: Vec<BigInt>,
}

impl PrimeLattice {
    /// Build a prime lattice with `f` drawn uniformly from `rng`.
    pub fn build<R: Rng + ?Sized>(n: &BigInt, m: usize, c: u32, rng: &mut R) -> Result<Self> {
        if *n < BigInt::from(15) || n.is_even() {
            return Err(Error::InvalidInput(format!(
                "N must be odd and at least 15, got {n}"
            )));
        }
        if m < 2 {
            return Err(Error::InvalidInput(format!("dimension must be >= 2, got {m}")));
        }
        let mut permutation: Vec<u64> = (1..=m as u64).map(|i| i.div_ceil(2)).collect();
        permutation.shuffle(rng);
        Ok(Self::with_permutation(n, m, c, permutation))
    }

    /// Build with an explicit diagonal; used for tests and deserialized runs.
    pub fn with_permutation(n: &BigInt, m: usize, c: u32, permutation: Vec<u64>) -> Self {
        assert_eq!(permutation.len(), m);
        let primes = first_primes(m);
        let log_row: Vec<BigInt> = primes
            .iter()
            .map(|&p| scaled_ln_rounded(&BigUint::from(p), c))
            .collect();
        let mut basis = vec![vec![BigInt::zero(); m]; m + 1];
        for (i, &f) in permutation.iter().enumerate() {
            basis[i][i] = BigInt::from(f);
        }
        basis[m] = log_row;
        let mut target = vec![BigInt::zero(); m + 1];
        target[m] = scaled_ln_rounded(n.magnitude(), c);
        Self {
            n: n.clone(),
            m,
            c,
            permutation,
            primes,
            basis,
            target,
        }
    }

    /// Ambient dimension `m + 1`.
    pub fn ambient(&self) -> usize {
        self.m + 1
    }

    /// Basis vectors (the columns of `basis`).
    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.m)
            .map(|j| self.basis.iter().map(|row| row[j].clone()).collect())
            .collect()
    }

    /// `B e`.
    pub fn point(&self, e: &[BigInt]) -> Vec<BigInt> {
        self.basis
            .iter()
            .map(|row| row.iter().zip(e).map(|(b, x)| b * x).sum())
            .collect()
    }

    /// Integer coefficients `e` with `B e = point`.
    ///
    /// The top block of `B` is diagonal, so the least-squares solution on the
    /// lattice is `e_i = point_i / f(i)`; the result is confirmed by exact
    /// re-multiplication.
    pub fn coefficients_of(&self, point: &[BigInt]) -> Result<Vec<BigInt>> {
        if point.len() != self.ambient() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient(),
                actual: point.len(),
            });
        }
        let e: Vec<BigInt> = point[..self.m]
            .iter()
            .zip(&self.permutation)
            .map(|(x, &f)| {
                let (q, r) = x.div_rem(&BigInt::from(f));
                r.is_zero().then_some(q).ok_or(Error::PointNotInLattice)
            })
            .collect::<Result<_>>()?;
        if self.point(&e) != point {
            return Err(Error::PointNotInLattice);
        }
        Ok(e)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Exponent split of a coefficient vector: `u = prod p_i^{e_i}` over
/// `e_i >= 0` and `v = prod p_i^{-e_i}` over `e_i < 0`.
pub fn uv_from_coefficients(e: &[BigInt], primes: &[u64]) -> (BigUint, BigUint) {
    let mut u = BigUint::from(1u32);
    let mut v = BigUint::from(1u32);
    for (x, &p) in e.iter().zip(primes) {
        let k: u32 = x
            .magnitude()
            .try_into()
            .expect("exponent fits in u32");
        if k == 0 {
            continue;
        }
        let power = BigUint::from(p).pow(k);
        if x.is_negative() {
            v *= power;
        } else {
            u *= power;
        }
    }
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn seventy_seven_in_three_dimensions() {
        let mut rng = seed::rng(1);
        let lat = PrimeLattice::build(&BigInt::from(77), 3, 4, &mut rng).unwrap();
        assert_eq!(lat.basis[3], ints(&[6931, 10986, 16094]));
        assert_eq!(lat.target, ints(&[0, 0, 0, 43438]));
        let mut f = lat.permutation.clone();
        f.sort();
        assert_eq!(f, vec![1, 1, 2]);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { lat.permutation[i] as i64 } else { 0 };
                assert_eq!(lat.basis[i][j], BigInt::from(expect));
            }
        }
    }

    #[test]
    fn two_dimensional_diagonal_is_forced() {
        let lat = PrimeLattice::build(&BigInt::from(91), 2, 4, &mut seed::rng(9)).unwrap();
        assert_eq!(lat.permutation, vec![1, 1]);
    }

    #[test]
    fn same_seed_same_lattice() {
        let n = BigInt::from(1_000_003i64 * 999_983);
        let a = PrimeLattice::build(&n, 12, 4, &mut seed::rng(5)).unwrap();
        let b = PrimeLattice::build(&n, 12, 4, &mut seed::rng(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn permutation_is_of_the_half_ceiling_multiset() {
        let n = BigInt::from(10_403);
        for s in 0..20 {
            let lat = PrimeLattice::build(&n, 9, 4, &mut seed::rng(s)).unwrap();
            let mut f = lat.permutation.clone();
            f.sort();
            assert_eq!(f, vec![1, 1, 2, 2, 3, 3, 4, 4, 5]);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut rng = seed::rng(0);
        assert!(PrimeLattice::build(&BigInt::from(76), 3, 4, &mut rng).is_err());
        assert!(PrimeLattice::build(&BigInt::from(13), 3, 4, &mut rng).is_err());
        assert!(PrimeLattice::build(&BigInt::from(77), 1, 4, &mut rng).is_err());
    }

    #[test]
    fn coefficients_round_trip() {
        let lat = PrimeLattice::build(&BigInt::from(77), 5, 4, &mut seed::rng(2)).unwrap();
        let unit = ints(&[1, 0, 0, 0, 0]);
        assert_eq!(lat.coefficients_of(&lat.point(&unit)).unwrap(), unit);
        let zero = vec![BigInt::zero(); 6];
        assert_eq!(lat.coefficients_of(&zero).unwrap(), ints(&[0; 5]));
        let e = ints(&[3, -2, 0, 7, -1]);
        assert_eq!(lat.coefficients_of(&lat.point(&e)).unwrap(), e);
        let mut off = lat.point(&e);
        off[5] += 1;
        assert!(matches!(lat.coefficients_of(&off), Err(Error::PointNotInLattice)));
    }

    #[test]
    fn json_round_trip_uses_decimal_strings() {
        let lat = PrimeLattice::build(&BigInt::from(77), 3, 4, &mut seed::rng(1)).unwrap();
        let json = lat.to_json().unwrap();
        assert!(json.contains("\"N\": \"77\""));
        assert!(json.contains("\"43438\""));
        assert_eq!(PrimeLattice::from_json(&json).unwrap(), lat);
    }

    #[test]
    fn uv_split() {
        let primes = [2, 3, 5];
        let (u, v) = uv_from_coefficients(&ints(&[1, 0, 2]), &primes);
        assert_eq!((u, v), (50u32.into(), 1u32.into()));
        let (u, v) = uv_from_coefficients(&ints(&[-1, 1, 0]), &primes);
        assert_eq!((u, v), (3u32.into(), 2u32.into()));
    }
}
