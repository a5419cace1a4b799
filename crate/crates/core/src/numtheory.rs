//! Integer services: primes, smoothness by trial division, exponent vectors.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The first `M` primes, plus the implicit sign element `p_0 = -1` at
/// exponent index 0 of every [`ExponentVector`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorBase {
    primes: Vec<u64>,
}

impl FactorBase {
    pub fn new(size: usize) -> Self {
        Self {
            primes: first_primes(size),
        }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Number of primes `M` (the sign element is not counted).
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn largest(&self) -> u64 {
        *self.primes.last().expect("factor base is never empty")
    }
}

/// Exponents of `(-1, p_1, ..., p_M)`.
///
/// `exps` is non-negative for factorizations and signed when the vector holds
/// an sr-pair ratio.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentVector {
    pub sign_bit: u8,
    pub exps: Vec<i64>,
}

impl ExponentVector {
    pub fn zero(len: usize) -> Self {
        Self {
            sign_bit: 0,
            exps: vec![0; len],
        }
    }

    /// Flattened form with the sign element at index 0.
    pub fn with_sign(&self) -> Vec<i64> {
        std::iter::once(self.sign_bit as i64)
            .chain(self.exps.iter().copied())
            .collect()
    }
}

/// The first `m` primes by sieve of Eratosthenes.
pub fn first_primes(m: usize) -> Vec<u64> {
    if m == 0 {
        return Vec::new();
    }
    // p_m < m (ln m + ln ln m) for m >= 6
    let mf = m.max(6) as f64;
    let mut bound = (mf * (mf.ln() + mf.ln().ln())) as usize + 16;
    loop {
        let primes = primes_up_to(bound);
        if primes.len() >= m {
            return primes.into_iter().take(m).collect();
        }
        bound *= 2;
    }
}

pub fn primes_up_to(bound: usize) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    for i in 2..=bound {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= bound {
            composite[j] = true;
            j += i;
        }
    }
    out
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Witnesses that make Miller-Rabin deterministic below 3.3e24, which covers
/// all of `u64`.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test for `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality test; deterministic below 3.3e24, a strong probable-prime test
/// with the same fixed witnesses above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in &MR_WITNESSES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `Some((b, k))` with `k >= 2` maximal such that `n = b^k`.
pub fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    if *n < BigUint::from(4u32) {
        return None;
    }
    let bits = n.bits() as u32;
    (2..=bits).rev().find_map(|k| {
        let root = n.nth_root(k);
        (root.pow(k) == *n).then_some((root, k))
    })
}

/// Factor `x` over `base`, or `None` when `|x|` is not `p_M`-smooth.
pub fn smooth_factorize(x: &BigInt, base: &FactorBase) -> Result<Option<ExponentVector>> {
    if x.is_zero() {
        return Err(Error::InvalidInput("cannot factor zero".into()));
    }
    let sign_bit = u8::from(x.sign() == Sign::Minus);
    let magnitude = x.magnitude();
    let exps = match magnitude.to_u128() {
        Some(small) => trial_divide_u128(small, base.primes()),
        None => trial_divide_big(magnitude.clone(), base.primes()),
    };
    Ok(exps.map(|exps| ExponentVector { sign_bit, exps }))
}

fn trial_divide_u128(mut x: u128, primes: &[u64]) -> Option<Vec<i64>> {
    let mut exps = vec![0i64; primes.len()];
    for (i, &p) in primes.iter().enumerate() {
        if x == 1 {
            break;
        }
        let p = p as u128;
        if p * p > x {
            // the cofactor is prime
            let x = u64::try_from(x).ok()?;
            let idx = primes[i..].binary_search(&x).ok()? + i;
            exps[idx] += 1;
            return Some(exps);
        }
        while x.is_multiple_of(p) {
            x /= p;
            exps[i] += 1;
        }
    }
    (x == 1).then_some(exps)
}

fn trial_divide_big(mut x: BigUint, primes: &[u64]) -> Option<Vec<i64>> {
    let mut exps = vec![0i64; primes.len()];
    for (i, &p) in primes.iter().enumerate() {
        if let Some(small) = x.to_u128() {
            let rest = trial_divide_u128(small, &primes[i..])?;
            for (e, r) in exps[i..].iter_mut().zip(rest) {
                *e += r;
            }
            return Some(exps);
        }
        loop {
            let (q, r) = x.div_rem(&BigUint::from(p));
            if !r.is_zero() {
                break;
            }
            x = q;
            exps[i] += 1;
        }
    }
    x.is_one().then_some(exps)
}

/// Inverse of [`smooth_factorize`]; rejects negative exponents.
pub fn exponent_vector_to_int(e: &ExponentVector, base: &FactorBase) -> Result<BigInt> {
    if e.exps.len() != base.len() {
        return Err(Error::DimensionMismatch {
            expected: base.len(),
            actual: e.exps.len(),
        });
    }
    if e.exps.iter().any(|&x| x < 0) {
        return Err(Error::InvalidInput(
            "negative exponent: ratio vectors do not denote integers".into(),
        ));
    }
    let mut acc = BigUint::one();
    for (&p, &k) in base.primes().iter().zip(&e.exps) {
        if k > 0 {
            acc *= BigUint::from(p).pow(k as u32);
        }
    }
    let sign = if e.sign_bit == 1 { Sign::Minus } else { Sign::Plus };
    Ok(BigInt::from_biguint(sign, acc))
}

pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

/// Uniform random prime with exactly `bits` bits.
pub fn random_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigUint {
    assert!(bits >= 2, "a prime needs at least two bits");
    let low = BigUint::one() << (bits - 1);
    let high = BigUint::one() << bits;
    loop {
        let candidate = rng.gen_biguint_range(&low, &high);
        if is_prime(&candidate) {
            return candidate;
        }
    }
}

/// `|x|` as an unsigned value, for callers that have already checked signs.
pub fn magnitude(x: &BigInt) -> BigUint {
    x.abs().to_biguint().expect("absolute value is non-negative")
}
