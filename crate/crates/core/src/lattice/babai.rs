use num_bigint::BigInt;
use num_traits::Zero;

use super::gso::to_scalar;
use super::lll::ReducedBasis;
use crate::{Error, Result, Scalar};

/// Babai's approximation together with the per-vector data that defines the
/// reduced refinement neighborhood.
#[derive(Debug, Clone, PartialEq)]
pub struct BabaiResult<T> {
    /// Lattice point approximating the target.
    pub b_op: Vec<BigInt>,
    /// Coefficient `mu_i` seen when basis vector `i` was processed.
    pub mu: Vec<T>,
    /// `c_i = round(mu_i)`; also the coefficients of `b_op` in the reduced
    /// basis.
    pub roundings: Vec<BigInt>,
    /// `k_i = sign(mu_i - c_i)`: the rounding direction not taken.
    pub directions: Vec<i8>,
}

/// Babai's nearest plane algorithm on a reduced basis.
///
/// Vectors are processed from last to first. The residual `t - b_op` is
/// carried through its projections `<r, b*_j>`, which change by
/// `c mu_ij |b*_j|^2` when `c d_i` is subtracted; no orthogonal vectors are
/// materialized. Entries are recorded in basis order.
pub fn babai_nearest_plane<T: Scalar>(reduced: &ReducedBasis<T>, target: &[T]) -> Result<BabaiResult<T>> {
    let n = reduced.dim();
    if target.len() != reduced.ambient() {
        return Err(Error::DimensionMismatch {
            expected: reduced.ambient(),
            actual: target.len(),
        });
    }
    let gso = &reduced.gso;
    // proj[i] = <t, b*_i> = <t, b_i> - sum_{j<i} mu_ij <t, b*_j>
    let mut proj: Vec<T> = Vec::with_capacity(n);
    for i in 0..n {
        let bi = to_scalar::<T>(&reduced.vectors[i]);
        let mut p = target
            .iter()
            .zip(&bi)
            .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone());
        for (j, pj) in proj.iter().enumerate() {
            p = p - gso.mu[i][j].clone() * pj.clone();
        }
        proj.push(p);
    }

    let mut mu = vec![T::zero(); n];
    let mut roundings = vec![BigInt::zero(); n];
    let mut directions = vec![0i8; n];
    for i in (0..n).rev() {
        let m = proj[i].clone() / gso.norms_sq[i].clone();
        let c = m.round_half_up();
        if !c.is_zero() {
            let ct = T::from_bigint(&c);
            for j in 0..=i {
                let coeff = if j == i { T::one() } else { gso.mu[i][j].clone() };
                proj[j] = proj[j].clone() - ct.clone() * coeff * gso.norms_sq[j].clone();
            }
        }
        let diff = m.clone() - T::from_bigint(&c);
        directions[i] = if diff.is_zero() {
            0
        } else if diff > T::zero() {
            1
        } else {
            -1
        };
        mu[i] = m;
        roundings[i] = c;
    }

    let ambient = reduced.ambient();
    let mut b_op = vec![BigInt::zero(); ambient];
    for (c, d) in roundings.iter().zip(&reduced.vectors) {
        if c.is_zero() {
            continue;
        }
        for (x, y) in b_op.iter_mut().zip(d) {
            *x += c * y;
        }
    }
    Ok(BabaiResult {
        b_op,
        mu,
        roundings,
        directions,
    })
}

/// Integer-target convenience wrapper.
pub fn babai_integer_target<T: Scalar>(reduced: &ReducedBasis<T>, target: &[BigInt]) -> Result<BabaiResult<T>> {
    babai_nearest_plane(reduced, &to_scalar::<T>(target))
}

/// `b_op + sum_i z_i k_i d_i`.
pub fn neighborhood_point<T: Scalar>(result: &BabaiResult<T>, reduced: &ReducedBasis<T>, z: &[bool]) -> Result<Vec<BigInt>> {
    if z.len() != reduced.dim() {
        return Err(Error::DimensionMismatch {
            expected: reduced.dim(),
            actual: z.len(),
        });
    }
    let mut point = result.b_op.clone();
    for ((&on, &k), d) in z.iter().zip(&result.directions).zip(&reduced.vectors) {
        if !on || k == 0 {
            continue;
        }
        for (x, y) in point.iter_mut().zip(d) {
            if k > 0 {
                *x += y;
            } else {
                *x -= y;
            }
        }
    }
    Ok(point)
}

/// Coefficients of the neighborhood point for `z` in the reduced basis.
pub fn neighborhood_coefficients<T>(result: &BabaiResult<T>, z: &[bool]) -> Vec<BigInt> {
    result
        .roundings
        .iter()
        .zip(z.iter().zip(&result.directions))
        .map(|(c, (&on, &k))| if on { c + BigInt::from(k) } else { c.clone() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::lll::lll_reduce_vectors;
    use crate::Rational;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn unit_square_example() {
        let basis = ints(&[&[1, 0], &[0, 1]]);
        let reduced = lll_reduce_vectors::<Rational>(&basis, 0.99).unwrap();
        assert_eq!(reduced.vectors, basis);
        let r = babai_nearest_plane(&reduced, &[q(2, 5), q(3, 5)]).unwrap();
        assert_eq!(r.b_op, ints(&[&[0, 1]])[0]);
        assert_eq!(r.mu, vec![q(2, 5), q(3, 5)]);
        assert_eq!(r.roundings, ints(&[&[0, 1]])[0]);
        assert_eq!(r.directions, vec![1, -1]);

        let f = lll_reduce_vectors::<f64>(&basis, 0.99).unwrap();
        let r = babai_nearest_plane(&f, &[0.4, 0.6]).unwrap();
        assert_eq!(r.directions, vec![1, -1]);
    }

    #[test]
    fn lattice_point_target_is_fixed() {
        let basis = ints(&[&[2, 1, 0], &[0, 3, 1]]);
        let reduced = lll_reduce_vectors::<Rational>(&basis, 0.99).unwrap();
        let t = ints(&[&[4, 5, 1]])[0].clone(); // 2*(2,1,0) + (0,3,1)
        let r = babai_integer_target(&reduced, &t).unwrap();
        assert_eq!(r.b_op, t);
        assert!(r.directions.iter().all(|&k| k == 0));
    }

    #[test]
    fn half_rounds_up_and_points_down() {
        let basis = ints(&[&[2]]);
        let reduced = lll_reduce_vectors::<Rational>(&basis, 0.99).unwrap();
        let r = babai_integer_target(&reduced, &[BigInt::from(3)]).unwrap();
        assert_eq!(r.roundings, vec![BigInt::from(2)]);
        assert_eq!(r.directions, vec![-1]);
    }

    #[test]
    fn neighborhood_points() {
        let basis = ints(&[&[1, 0], &[0, 1]]);
        let reduced = lll_reduce_vectors::<Rational>(&basis, 0.99).unwrap();
        let r = babai_nearest_plane(&reduced, &[q(2, 5), q(3, 5)]).unwrap();
        assert_eq!(neighborhood_point(&r, &reduced, &[false, false]).unwrap(), r.b_op);
        assert_eq!(
            neighborhood_point(&r, &reduced, &[true, false]).unwrap(),
            ints(&[&[1, 1]])[0]
        );
        assert_eq!(
            neighborhood_point(&r, &reduced, &[true, true]).unwrap(),
            ints(&[&[1, 0]])[0]
        );
        assert!(neighborhood_point(&r, &reduced, &[true]).is_err());
        assert_eq!(neighborhood_coefficients(&r, &[true, true]), ints(&[&[1, 0]])[0]);
    }
}
