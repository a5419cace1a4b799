//! Correctly rounded `round(10^c * ln x)` for the bottom row of the prime
//! lattice. A one-unit error here changes the lattice, so the logarithm is
//! evaluated in fixed point with a rigorous error bound and the precision is
//! raised until the rounding decision is certain.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

/// `2 * atanh(z / scale)` in fixed point, together with the number of series
/// terms used. Each term carries at most a few units of truncation error.
fn atanh2_fixed(z: &BigInt, scale: &BigInt) -> (BigInt, u64) {
    let z2 = z * z / scale;
    let mut power = z.clone();
    let mut acc = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        acc += &power / BigInt::from(2 * k + 1);
        power = &power * &z2 / scale;
        k += 1;
    }
    (acc * 2, k)
}

/// `ln x` in units of `10^-digits`, with an upper bound on the absolute
/// error in the same units.
fn ln_fixed(x: &BigUint, digits: u32) -> (BigInt, BigInt) {
    let scale = BigInt::from(10u32).pow(digits);
    let shift = x.bits() - 1;
    // y = x / 2^shift in [1, 2)
    let y = (BigInt::from(x.clone()) * &scale) >> shift;
    let z = (&y - &scale) * &scale / (&y + &scale);
    let (ln_y, terms_y) = atanh2_fixed(&z, &scale);
    let third = &scale / BigInt::from(3);
    let (ln2, terms_2) = atanh2_fixed(&third, &scale);
    let value = ln_y + &ln2 * BigInt::from(shift);
    // Truncations: y and z contribute a few ulps amplified by at most 2,
    // every series term at most 3 ulps (doubled), and ln2's error is
    // multiplied by `shift`.
    let err_y = BigInt::from(8 * (terms_y + 4));
    let err_2 = BigInt::from(8 * (terms_2 + 4)) * BigInt::from(shift + 1);
    (value, err_y + err_2)
}

/// `round(10^c * ln x)` for `x >= 1`, rounding half up.
pub fn scaled_ln_rounded(x: &BigUint, c: u32) -> BigInt {
    assert!(!x.is_zero(), "logarithm of zero");
    if x.is_one() {
        return BigInt::zero();
    }
    let mut guard = 30u32;
    loop {
        let digits = c + guard;
        let (value, err) = ln_fixed(x, digits);
        // value / 10^guard approximates 10^c ln x
        let unit = BigInt::from(10u32).pow(guard);
        let half = &unit / 2;
        let floor = &value / &unit;
        let frac = &value - &floor * &unit;
        let diff: BigInt = &frac - &half;
        let distance = BigInt::from(diff.magnitude().clone());
        if distance > err {
            return if frac >= half { floor + 1 } else { floor };
        }
        guard *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled(x: u64, c: u32) -> i64 {
        scaled_ln_rounded(&BigUint::from(x), c).try_into().unwrap()
    }

    #[test]
    fn prime_lattice_row_for_seventy_seven() {
        assert_eq!(scaled(2, 4), 6931);
        assert_eq!(scaled(3, 4), 10986);
        assert_eq!(scaled(5, 4), 16094);
        assert_eq!(scaled(77, 4), 43438);
        assert_eq!(scaled(1, 4), 0);
    }

    #[test]
    fn matches_reference_digits() {
        // ln 2 = 0.693147180559945309417232121458176568...
        let (v, err) = ln_fixed(&BigUint::from(2u32), 36);
        let reference: BigInt = "693147180559945309417232121458176568".parse().unwrap();
        assert!((v - reference).magnitude() <= err.magnitude());
        // ln 10 = 2.302585092994045684017991454684364207...
        let ln10 = scaled_ln_rounded(&BigUint::from(10u32), 20);
        assert_eq!(ln10, "230258509299404568402".parse::<BigInt>().unwrap());
    }

    #[test]
    fn agrees_with_f64_away_from_ties() {
        for x in (2u64..5000).chain([1 << 40, 999_999_999_989, u64::MAX]) {
            for c in [1u32, 4, 6] {
                let f = (x as f64).ln() * 10f64.powi(c as i32);
                if (f - f.floor() - 0.5).abs() < 1e-6 {
                    continue;
                }
                assert_eq!(scaled(x, c), f.round() as i64, "x = {x}, c = {c}");
            }
        }
    }

    #[test]
    fn huge_arguments() {
        // ln(2^200) = 200 ln 2
        let x = BigUint::one() << 200u32;
        let expect = (200.0 * std::f64::consts::LN_2 * 1e4).round() as i64;
        assert_eq!(scaled_ln_rounded(&x, 4), BigInt::from(expect));
    }
}
