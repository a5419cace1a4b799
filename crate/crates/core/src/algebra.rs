//! Linear algebra over GF(2) and the congruence of squares.
//!
//! Relation `j` contributes the ratio vector `e'_j - e_j` over
//! `(-1, p_1, ..., p_M)`. A selection `tau` with an even coordinate sum in
//! every row gives
//! `X = prod p_i^{(1/2) sum_j tau_j (e_ij + e'_ij)}` and
//! `Y = prod p_i^{sum_j tau_j e'_ij}` with `X^2 = Y^2 (mod N)`.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numtheory::{is_prime, perfect_power, primes_up_to, FactorBase};
use crate::sieve::{Campaign, CampaignParams, SrPair};
use crate::{seed, Error, Result};

/// Random `tau` combinations tried per round, including basis vectors and
/// pairwise sums.
pub const DEFAULT_TAU_TRIALS: usize = 256;
/// Trial division bound of the pre-screen.
pub const SCREEN_BOUND: u64 = 97;

/// Dense bit matrix, one bitset per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words,
            bits: vec![0; rows * words],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.bits[r * self.words + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    fn xor_rows(&mut self, target: usize, source: usize) {
        let w = self.words;
        let (a, b) = if target < source {
            let (lo, hi) = self.bits.split_at_mut(source * w);
            (&mut lo[target * w..(target + 1) * w], &hi[..w])
        } else {
            let (lo, hi) = self.bits.split_at_mut(target * w);
            (&mut hi[..w], &lo[source * w..(source + 1) * w])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x ^= y;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for k in 0..self.words {
            self.bits.swap(a * self.words + k, b * self.words + k);
        }
    }

    /// Column `j` is the parity of relation `j`'s ratio vector.
    pub fn from_relations(relations: &[SrPair], base_size: usize) -> Self {
        let mut m = Self::zeros(base_size + 1, relations.len());
        for (j, pair) in relations.iter().enumerate() {
            for (i, x) in ratio_vector(pair).into_iter().enumerate() {
                if x.rem_euclid(2) == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// `A tau` over GF(2).
    pub fn mul(&self, tau: &[bool]) -> Vec<bool> {
        assert_eq!(tau.len(), self.cols, "selection length");
        (0..self.rows)
            .map(|r| tau.iter().enumerate().filter(|&(c, &t)| t && self.get(r, c)).count() % 2 == 1)
            .collect()
    }
}

/// `e' - e` with the sign element first; `e_0 = 0` since `u > 0`.
pub fn ratio_vector(pair: &SrPair) -> Vec<i64> {
    std::iter::once(pair.e_prime.sign_bit as i64 - pair.e.sign_bit as i64)
        .chain(pair.e_prime.exps.iter().zip(&pair.e.exps).map(|(a, b)| a - b))
        .collect()
}

/// Basis of the right nullspace `{tau : A tau = 0}` by reduction to row
/// echelon form.
pub fn nullspace_gf2(matrix: &Gf2Matrix) -> Vec<Vec<bool>> {
    let mut a = matrix.clone();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&r| a.get(r, col)) else {
            continue;
        };
        a.swap_rows(row, p);
        for r in 0..a.rows {
            if r != row && a.get(r, col) {
                a.xor_rows(r, row);
            }
        }
        pivots.push(col);
        row += 1;
    }
    let mut is_pivot = vec![false; a.cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    (0..a.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut tau = vec![false; a.cols];
            tau[free] = true;
            for (r, &pc) in pivots.iter().enumerate() {
                if a.get(r, free) {
                    tau[pc] = true;
                }
            }
            tau
        })
        .collect()
}

/// `sum_j tau_j (e'_j - e_j)` is even in every coordinate, checked on the
/// integer vectors.
pub fn satisfies_parity(tau: &[bool], relations: &[SrPair]) -> bool {
    let Some(first) = relations.first() else {
        return true;
    };
    let mut sum = vec![0i64; first.e.exps.len() + 1];
    for (pair, _) in relations.iter().zip(tau).filter(|(_, &t)| t) {
        for (s, x) in sum.iter_mut().zip(ratio_vector(pair)) {
            *s += x;
        }
    }
    sum.iter().all(|s| s % 2 == 0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CongruenceResult {
    pub tau: Vec<bool>,
    pub x: BigUint,
    pub y: BigUint,
    pub factors: Option<(BigUint, BigUint)>,
}

fn signed_power_mod(base: &FactorBase, exps: &[BigInt], n: &BigUint) -> BigUint {
    let mut acc = BigUint::one() % n;
    if exps[0].is_odd() {
        acc = (n - &acc) % n;
    }
    for (&p, k) in base.primes().iter().zip(&exps[1..]) {
        if k.is_zero() {
            continue;
        }
        let k = k.magnitude();
        acc = acc * BigUint::from(p).modpow(k, n) % n;
    }
    acc
}

/// `X` and `Y` for the selection `tau`, with factors when the congruence is
/// non-trivial.
pub fn assemble_congruence(tau: &[bool], relations: &[SrPair], n: &BigInt, base: &FactorBase) -> Result<CongruenceResult> {
    if tau.len() != relations.len() {
        return Err(Error::DimensionMismatch {
            expected: relations.len(),
            actual: tau.len(),
        });
    }
    let nu = n
        .to_biguint()
        .filter(|x| *x > BigUint::one())
        .ok_or_else(|| Error::InvalidInput("N must exceed 1".into()))?;
    let len = base.len() + 1;
    let mut both = vec![BigInt::zero(); len];
    let mut right = vec![BigInt::zero(); len];
    for (pair, _) in relations.iter().zip(tau).filter(|(_, &t)| t) {
        let e = std::iter::once(pair.e.sign_bit as i64).chain(pair.e.exps.iter().copied());
        let ep: Vec<i64> = pair.e_prime.with_sign();
        if ep.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: ep.len(),
            });
        }
        for (i, (a, b)) in e.zip(&ep).enumerate() {
            both[i] += a + b;
            right[i] += *b;
        }
    }
    let two = BigInt::from(2);
    let mut half = Vec::with_capacity(len);
    for s in &both {
        let (q, r) = s.div_rem(&two);
        if !r.is_zero() {
            return Err(Error::Internal("selection does not satisfy the parity system".into()));
        }
        half.push(q);
    }
    let x = signed_power_mod(base, &half, &nu);
    let y = signed_power_mod(base, &right, &nu);
    if (&x * &x) % &nu != (&y * &y) % &nu {
        return Err(Error::Internal("X^2 and Y^2 differ modulo N".into()));
    }
    let factors = extract_factors(&x, &y, &nu);
    Ok(CongruenceResult {
        tau: tau.to_vec(),
        x,
        y,
        factors,
    })
}

/// `(gcd(|X - Y|, N), N / gcd(|X - Y|, N))` ordered, when `X != +-Y (mod N)`.
pub fn extract_factors(x: &BigUint, y: &BigUint, n: &BigUint) -> Option<(BigUint, BigUint)> {
    let x = x % n;
    let y = y % n;
    if x == y || (&x + &y) % n == BigUint::zero() {
        return None;
    }
    let diff = if x > y { &x - &y } else { &y - &x };
    let p = diff.gcd(n);
    if p.is_one() || &p == n {
        // only possible when N is not squarefree
        return None;
    }
    let q = n / &p;
    Some(if p <= q { (p, q) } else { (q, p) })
}

/// What the pre-screen decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Screen {
    /// Needs the lattice method.
    Lattice,
    /// A factor turned up during trial division.
    Divisor(BigUint),
}

/// Reject inputs the lattice method cannot or need not handle.
///
/// Primes and perfect powers are errors. Divisors up to [`SCREEN_BOUND`]
/// are returned rather than treated as errors, so tiny semiprimes still
/// factor.
pub fn prescreen(n: &BigInt) -> Result<Screen> {
    let Some(nu) = n.to_biguint().filter(|x| *x >= BigUint::from(4u32)) else {
        return Err(Error::InvalidInput(format!("N must be a composite integer >= 4, got {n}")));
    };
    if is_prime(&nu) {
        return Err(Error::Prime(n.clone()));
    }
    if let Some((root, k)) = perfect_power(&nu) {
        return Err(Error::PerfectPower {
            n: n.clone(),
            base: BigInt::from(root),
            exponent: k,
        });
    }
    for p in primes_up_to(SCREEN_BOUND as usize) {
        let p = BigUint::from(p);
        if (&nu % &p).is_zero() {
            return Ok(Screen::Divisor(p));
        }
    }
    Ok(Screen::Lattice)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    pub campaign: CampaignParams,
    pub tau_trials: usize,
}

impl FactorParams {
    pub fn for_bits(bits: u64, seed: u64) -> Self {
        Self {
            campaign: CampaignParams::for_bits(bits, seed),
            tau_trials: DEFAULT_TAU_TRIALS,
        }
    }

    /// Defaults for `n`, sized from its bit length.
    pub fn for_n(n: &BigInt, seed: u64) -> Self {
        Self::for_bits(n.bits(), seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TrialDivision,
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(rename = "N", with = "crate::serde_util::bigint")]
    pub n: BigInt,
    /// `[p, q]` as decimal strings with `p <= q`.
    pub factors: Option<[String; 2]>,
    pub method: Method,
    pub relations_used: usize,
    pub lattices_consumed: u64,
    pub collision_rate: f64,
    /// Mean sr-pairs found per lattice, before deduplication.
    pub found_per_lattice: f64,
    pub tau_trials: u64,
    pub rounds: usize,
    pub elapsed: f64,
    pub seed: u64,
}

impl RunReport {
    pub fn factor_pair(&self) -> Option<(BigUint, BigUint)> {
        let [p, q] = self.factors.as_ref()?;
        Some((p.parse().ok()?, q.parse().ok()?))
    }
}

/// Selections to try for one nullspace basis: each basis vector, then each
/// pairwise sum, then random combinations, `cap` in total.
pub fn tau_candidates(basis: &[Vec<bool>], cap: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut out: Vec<Vec<bool>> = Vec::new();
    let xor = |a: &[bool], b: &[bool]| a.iter().zip(b).map(|(x, y)| x ^ y).collect::<Vec<_>>();
    out.extend(basis.iter().take(cap).cloned());
    'pairs: for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            if out.len() >= cap {
                break 'pairs;
            }
            out.push(xor(&basis[i], &basis[j]));
        }
    }
    let mut rng = seed::rng(seed);
    let mut attempts = 0;
    while out.len() < cap && basis.len() > 2 && attempts < 4 * cap {
        attempts += 1;
        let mut tau = vec![false; basis[0].len()];
        let mut any = false;
        for b in basis {
            if rng.gen::<bool>() {
                tau = xor(&tau, b);
                any = true;
            }
        }
        if any && tau.iter().any(|&t| t) {
            out.push(tau);
        }
    }
    out
}

/// Factor `n`: pre-screen, collect relations, and search the nullspace;
/// when every congruence is trivial, collect about 10% more relations and
/// retry. The report has no factors when the lattice budget runs out and
/// the relations gathered by then give only trivial congruences.
pub fn factor(n: &BigInt, params: &FactorParams) -> Result<RunReport> {
    let start = Instant::now();
    let seed = params.campaign.seed;
    let mut report = RunReport {
        n: n.clone(),
        factors: None,
        method: Method::Lattice,
        relations_used: 0,
        lattices_consumed: 0,
        collision_rate: 0.0,
        found_per_lattice: 0.0,
        tau_trials: 0,
        rounds: 0,
        elapsed: 0.0,
        seed,
    };
    if let Screen::Divisor(p) = prescreen(n)? {
        let q = n.magnitude() / &p;
        report.method = Method::TrialDivision;
        report.factors = Some([p.to_string(), q.to_string()]);
        report.elapsed = start.elapsed().as_secs_f64();
        return Ok(report);
    }
    let nu = n.magnitude().clone();
    let mut campaign = Campaign::new(n, params.campaign)?;
    let step = (params.campaign.target_relations / 10).max(4);
    let mut target = params.campaign.target_relations;
    loop {
        let enough = campaign.run_until(target)?;
        let stats = campaign.stats();
        report.lattices_consumed = stats.lattices_consumed;
        report.collision_rate = stats.collision_rate;
        report.relations_used = stats.relations;
        let found = campaign.found_per_lattice();
        report.found_per_lattice = found.iter().sum::<usize>() as f64 / found.len().max(1) as f64;
        let relations = campaign.relations().relations();
        if relations.is_empty() {
            break;
        }
        // with the budget spent, fewer than M + 2 relations may still be
        // dependent, so the algebra runs once more before giving up
        report.rounds += 1;
        let matrix = Gf2Matrix::from_relations(relations, campaign.base().len());
        let basis = nullspace_gf2(&matrix);
        let trial_seed = seed::derive(seed, &[seed::label::TAU, report.rounds as u64]);
        for tau in tau_candidates(&basis, params.tau_trials, trial_seed) {
            report.tau_trials += 1;
            let result = assemble_congruence(&tau, relations, n, campaign.base())?;
            if let Some((p, q)) = result.factors {
                debug_assert_eq!(&p * &q, nu);
                report.factors = Some([p.to_string(), q.to_string()]);
                report.elapsed = start.elapsed().as_secs_f64();
                return Ok(report);
            }
        }
        if !enough {
            break;
        }
        log::info!("all {} congruences trivial with {} relations; collecting more", report.tau_trials, relations.len());
        target = relations.len() + step;
    }
    report.elapsed = start.elapsed().as_secs_f64();
    Ok(report)
}
