//! Scalar abstraction for Gram-Schmidt arithmetic.
//!
//! Lattice vectors are always exact integers; only the orthogonalization
//! (and therefore LLL decisions and Babai coefficients) is computed in `T`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// True when arithmetic is exact (no rounding error).
    const EXACT: bool;

    fn from_bigint(x: &BigInt) -> Self;

    /// Conversion from a float parameter such as the LLL `delta`. Exact types
    /// read the value as a short decimal so that `0.99` becomes `99/100`.
    fn from_param(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// `floor(self + 1/2)`, so that `1.5 -> 2` and `-1.5 -> -1`.
    fn round_half_up(&self) -> BigInt;

    /// Whether `self` should be treated as zero relative to `scale`.
    fn is_negligible(&self, scale: &Self) -> bool;
}

macro_rules! float_scalar {
    ($t:ty, $eps:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_bigint(x: &BigInt) -> Self {
                x.to_f64().unwrap_or(f64::INFINITY) as $t
            }

            fn from_param(x: f64) -> Self {
                x as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn round_half_up(&self) -> BigInt {
                BigInt::from_f64((*self + 0.5).floor() as f64).expect("finite value")
            }

            fn is_negligible(&self, scale: &Self) -> bool {
                self.abs() <= $eps * scale.abs().max(1.0)
            }
        }
    };
}

float_scalar!(f64, 1e-13);
float_scalar!(f32, 1e-4);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_bigint(x: &BigInt) -> Self {
        BigRational::from_integer(x.clone())
    }

    fn from_param(x: f64) -> Self {
        const DEN: i64 = 1_000_000_000;
        let num = (x * DEN as f64).round() as i64;
        BigRational::new(BigInt::from(num), BigInt::from(DEN))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn round_half_up(&self) -> BigInt {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        (self + half).floor().to_integer()
    }

    fn is_negligible(&self, _scale: &Self) -> bool {
        self.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(q(3, 2).round_half_up(), BigInt::from(2));
        assert_eq!(q(-3, 2).round_half_up(), BigInt::from(-1));
        assert_eq!(q(7, 5).round_half_up(), BigInt::from(1));
        assert_eq!(1.5f64.round_half_up(), BigInt::from(2));
        assert_eq!((-1.5f64).round_half_up(), BigInt::from(-1));
        assert_eq!((-0.4f32).round_half_up(), BigInt::from(0));
    }

    #[test]
    fn decimal_parameters_are_exact() {
        assert_eq!(BigRational::from_param(0.99), q(99, 100));
        assert_eq!(BigRational::from_param(0.75), q(3, 4));
    }
}
