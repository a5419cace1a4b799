//! Brute-force ground truth over the refinement neighborhood.
//!
//! Full enumeration walks `{0,1}^m` in Gray-code order so that each step
//! adds or removes a single `k_i d_i` from the residual. The state space is
//! split by its high bits into independent blocks for parallel workers.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::numtheory::FactorBase;
use crate::pbit::{BitState, RefinementProblem};
use crate::sieve::{check_sr_pair, coefficients_of_point, uv_from_small, SrPair};
use crate::{Error, ExactInstance, Result};

/// Largest `m` accepted for full enumeration.
pub const FULL_ENUMERATION_LIMIT: usize = 26;
/// Popcount bound used when full enumeration is out of reach.
pub const DEFAULT_WEIGHT_BOUND: usize = 6;

const MAX_WORD_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationReport {
    pub best_state: BitState,
    pub best_distance_sq: i128,
    pub states_visited: u64,
    pub weight_bound: Option<usize>,
}

/// Best candidate so far as `(energy, lexicographic key, word)`.
type Best = (i128, u64, u64);

/// Bitstrings are written bit 0 first, so lexicographic order on them is
/// numeric order on the bit-reversed word.
fn lex_key(word: u64, m: usize) -> u64 {
    if m == 0 {
        0
    } else {
        word.reverse_bits() >> (64 - m)
    }
}

fn norm_sq(v: &[i64]) -> i128 {
    v.iter().map(|&x| x as i128 * x as i128).sum()
}

fn apply(residual: &mut [i64], step: &[i64], on: bool) {
    if on {
        for (x, y) in residual.iter_mut().zip(step) {
            *x -= y;
        }
    } else {
        for (x, y) in residual.iter_mut().zip(step) {
            *x += y;
        }
    }
}

fn check_width(m: usize, weight_bound: Option<usize>) -> Result<()> {
    match weight_bound {
        None if m > FULL_ENUMERATION_LIMIT => Err(Error::EnumerationTooLarge(m)),
        Some(_) if m > MAX_WORD_BITS => Err(Error::EnumerationTooLarge(m)),
        _ => Ok(()),
    }
}

/// Number of high bits used to split full enumeration into blocks.
fn split_bits(m: usize) -> usize {
    m.saturating_sub(10).min(8)
}

/// Calls `f(word, residual)` for every state of one Gray-code block: the
/// high bits are fixed to `high` and the low `low_bits` bits vary.
fn walk_block<F: FnMut(u64, &[i64])>(problem: &RefinementProblem, low_bits: usize, high: u64, mut f: F) {
    let mut word = high << low_bits;
    let mut residual = problem.residual(&BitState::from_word(word, problem.dim()));
    f(word, &residual);
    for k in 1u64..(1u64 << low_bits) {
        let bit = k.trailing_zeros() as usize;
        word ^= 1 << bit;
        apply(&mut residual, problem.step(bit), word >> bit & 1 == 1);
        f(word, &residual);
    }
}

/// Depth-first walk over all states of popcount at most `bound`.
fn walk_bounded<F: FnMut(u64, &[i64])>(problem: &RefinementProblem, bound: usize, f: &mut F) {
    fn rec<F: FnMut(u64, &[i64])>(p: &RefinementProblem, from: usize, left: usize, word: u64, residual: &mut Vec<i64>, f: &mut F) {
        f(word, residual);
        if left == 0 {
            return;
        }
        for i in from..p.dim() {
            apply(residual, p.step(i), true);
            rec(p, i + 1, left - 1, word | 1 << i, residual, f);
            apply(residual, p.step(i), false);
        }
    }
    let mut residual = problem.residual(&BitState::zeros(problem.dim()));
    rec(problem, 0, bound, 0, &mut residual, f);
}

fn better(a: Best, b: Best) -> Best {
    if (a.0, a.1) <= (b.0, b.1) {
        a
    } else {
        b
    }
}

/// Exact minimizer of the refinement energy over the neighborhood, or over
/// its states of popcount at most `weight_bound`. Ties go to the
/// lexicographically smallest bitstring.
pub fn enumerate_neighborhood(problem: &RefinementProblem, weight_bound: Option<usize>) -> Result<EnumerationReport> {
    let m = problem.dim();
    check_width(m, weight_bound)?;
    let start: Best = (i128::MAX, u64::MAX, 0);
    let (best, visited) = match weight_bound {
        Some(bound) if bound < m => {
            let (mut best, mut visited) = (start, 0u64);
            walk_bounded(problem, bound, &mut |word, residual: &[i64]| {
                visited += 1;
                best = better(best, (norm_sq(residual), lex_key(word, m), word));
            });
            (best, visited)
        }
        _ => {
            let high = split_bits(m);
            let low = m - high;
            (0..1u64 << high)
                .into_par_iter()
                .map(|h| {
                    let (mut best, mut visited) = (start, 0u64);
                    walk_block(problem, low, h, |word, residual| {
                        visited += 1;
                        best = better(best, (norm_sq(residual), lex_key(word, m), word));
                    });
                    (best, visited)
                })
                .reduce(|| (start, 0), |a, b| (better(a.0, b.0), a.1 + b.1))
        }
    };
    Ok(EnumerationReport {
        best_state: BitState::from_word(best.2, m),
        best_distance_sq: best.0,
        states_visited: visited,
        weight_bound,
    })
}

/// One visited state of a census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusEntry {
    pub state: BitState,
    pub distance_sq: i128,
    pub pair: Option<SrPair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub state: String,
    pub distance_sq: i128,
    pub is_sr_pair: bool,
    pub u: String,
    pub v: String,
}

/// Every visited state with its distance and sr-pair verdict, ordered by
/// state word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub entries: Vec<CensusEntry>,
    pub weight_bound: Option<usize>,
}

impl Census {
    pub fn sr_pairs(&self) -> impl Iterator<Item = (&BitState, &SrPair)> {
        self.entries
            .iter()
            .filter_map(|e| e.pair.as_ref().map(|p| (&e.state, p)))
    }

    pub fn sr_pair_count(&self) -> usize {
        self.sr_pairs().count()
    }

    pub fn rows(&self) -> Vec<CensusRow> {
        self.entries
            .iter()
            .map(|e| CensusRow {
                state: e.state.to_string(),
                distance_sq: e.distance_sq,
                is_sr_pair: e.pair.is_some(),
                u: e.pair.as_ref().map(|p| p.u.to_string()).unwrap_or_default(),
                v: e.pair.as_ref().map(|p| p.v.to_string()).unwrap_or_default(),
            })
            .collect()
    }
}

/// Exhaustive (or popcount-bounded) sr-pair census of an instance's
/// neighborhood, keeping only states that are sr-pairs unless `keep_all`.
pub fn enumerate_sr_pairs(
    inst: &ExactInstance,
    problem: &RefinementProblem,
    base: &FactorBase,
    weight_bound: Option<usize>,
    keep_all: bool,
) -> Result<Census> {
    let m = problem.dim();
    check_width(m, weight_bound)?;
    let n = &inst.lattice.n;
    let examine = |word: u64, residual: &[i64]| -> Result<Option<CensusEntry>> {
        let state = BitState::from_word(word, m);
        let point = problem.point(&state);
        let e = coefficients_of_point(&inst.lattice, &point)
            .map_err(|err| Error::Internal(format!("neighborhood point off the lattice: {err}")))?;
        let (u, v) = uv_from_small(&e, &inst.lattice.primes);
        let pair = match check_sr_pair(&u, &v, n, base, 0, 0) {
            Ok(p) => p,
            Err(Error::DegenerateRelation) => None,
            Err(err) => return Err(err),
        };
        if pair.is_none() && !keep_all {
            return Ok(None);
        }
        Ok(Some(CensusEntry {
            state,
            distance_sq: norm_sq(residual),
            pair,
        }))
    };
    let mut entries: Vec<(u64, CensusEntry)> = match weight_bound {
        Some(bound) if bound < m => {
            let mut out = Vec::new();
            let mut failure = None;
            walk_bounded(problem, bound, &mut |word, residual| {
                if failure.is_some() {
                    return;
                }
                match examine(word, residual) {
                    Ok(Some(e)) => out.push((word, e)),
                    Ok(None) => {}
                    Err(err) => failure = Some(err),
                }
            });
            if let Some(err) = failure {
                return Err(err);
            }
            out
        }
        _ => {
            let high = split_bits(m);
            let low = m - high;
            let blocks: Vec<Result<Vec<(u64, CensusEntry)>>> = (0..1u64 << high)
                .into_par_iter()
                .map(|h| {
                    let mut out = Vec::new();
                    let mut failure = None;
                    walk_block(problem, low, h, |word, residual| {
                        if failure.is_some() {
                            return;
                        }
                        match examine(word, residual) {
                            Ok(Some(e)) => out.push((word, e)),
                            Ok(None) => {}
                            Err(err) => failure = Some(err),
                        }
                    });
                    failure.map_or(Ok(out), Err)
                })
                .collect();
            let mut all = Vec::new();
            for b in blocks {
                all.extend(b?);
            }
            all
        }
    };
    entries.sort_by_key(|(w, _)| *w);
    Ok(Census {
        entries: entries.into_iter().map(|(_, e)| e).collect(),
        weight_bound,
    })
}

pub fn write_census_csv<W: Write>(rows: &[CensusRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Closest lattice point to `target` among `sum_i x_i d_i` with every
/// `|x_i - center_i| <= radius`. Returns the coefficients and squared
/// distance.
pub fn closest_in_box(basis: &[Vec<i64>], target: &[i64], center: &[i64], radius: i64) -> Result<(Vec<i64>, i128)> {
    let m = basis.len();
    if center.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: center.len(),
        });
    }
    let side = (2 * radius + 1) as u64;
    let total = side
        .checked_pow(m as u32)
        .filter(|&t| t <= 1 << 32)
        .ok_or(Error::EnumerationTooLarge(m))?;
    // odometer over offsets, starting at the lower corner
    let mut offsets = vec![-radius; m];
    let mut residual: Vec<i64> = target.to_vec();
    for (d, (&c, &o)) in basis.iter().zip(center.iter().zip(&offsets)) {
        for (x, y) in residual.iter_mut().zip(d) {
            *x -= (c + o) * y;
        }
    }
    let mut best = (norm_sq(&residual), offsets.clone());
    for _ in 1..total {
        let mut i = 0;
        loop {
            if offsets[i] < radius {
                offsets[i] += 1;
                for (x, y) in residual.iter_mut().zip(&basis[i]) {
                    *x -= y;
                }
                break;
            }
            let span = 2 * radius;
            offsets[i] = -radius;
            for (x, y) in residual.iter_mut().zip(&basis[i]) {
                *x += span * y;
            }
            i += 1;
        }
        let e = norm_sq(&residual);
        if e < best.0 {
            best = (e, offsets.clone());
        }
    }
    let coeffs = center.iter().zip(&best.1).map(|(c, o)| c + o).collect();
    Ok((coeffs, best.0))
}
