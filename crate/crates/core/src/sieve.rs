//! From sampled states to smooth relation pairs.
//!
//! A state selects a lattice point near the target; its prime-basis
//! coefficients `e` give `u = prod_{e_i > 0} p_i^{e_i}` and
//! `v = prod_{e_i < 0} p_i^{-e_i}`. The pair is kept when `u - vN` is smooth
//! over the factor base as well.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{CvpInstance, PrimeLattice, DEFAULT_PRECISION};
use crate::numtheory::{smooth_factorize, ExponentVector, FactorBase};
use crate::pbit::{run_collection, BitState, DedupSink, RefinementProblem, COLLECTION_SWEEPS_PER_DIM, DEFAULT_COLLECTION_BETA};
use crate::{seed, serde_util, Error, ExactInstance, Result, Scalar};

/// Lattices allowed per required relation before a campaign gives up.
pub const LATTICE_BUDGET_PER_RELATION: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrPair {
    #[serde(with = "serde_util::biguint")]
    pub u: BigUint,
    #[serde(with = "serde_util::biguint")]
    pub v: BigUint,
    /// Factorization of `u` (sign bit always 0).
    pub e: ExponentVector,
    /// Factorization of `u - vN`, sign included.
    pub e_prime: ExponentVector,
    pub lattice_id: u64,
    /// Sweep during which the state was first emitted.
    pub sweep: usize,
}

impl SrPair {
    pub fn key(&self) -> (BigUint, BigUint) {
        (self.u.clone(), self.v.clone())
    }

    pub fn u_minus_vn(&self, n: &BigInt) -> BigInt {
        BigInt::from(self.u.clone()) - BigInt::from(self.v.clone()) * n
    }

    /// Re-derive all three smoothness claims and both factorizations.
    pub fn verify(&self, n: &BigInt, base: &FactorBase) -> Result<()> {
        let bad = |what: &str| Err(Error::Internal(format!("sr-pair ({}, {}): {what}", self.u, self.v)));
        let w = self.u_minus_vn(n);
        if w.is_zero() {
            return bad("u - vN is zero");
        }
        if smooth_factorize(&BigInt::from(self.u.clone()), base)?.as_ref() != Some(&self.e) {
            return bad("u does not match its exponent vector");
        }
        if smooth_factorize(&w, base)?.as_ref() != Some(&self.e_prime) {
            return bad("u - vN does not match its exponent vector");
        }
        if smooth_factorize(&BigInt::from(self.v.clone()), base)?.is_none() {
            return bad("v is not smooth");
        }
        Ok(())
    }
}

/// `(u, v)` for the neighborhood point selected by `state`.
pub fn state_to_uv<T: Scalar>(state: &BitState, inst: &CvpInstance<T>) -> Result<(BigUint, BigUint)> {
    let e = inst
        .prime_coefficients(state.bits())
        .map_err(|err| Error::Internal(format!("neighborhood point off the lattice: {err}")))?;
    Ok(crate::lattice::uv_from_coefficients(&e, &inst.lattice.primes))
}

/// Machine-integer version of [`PrimeLattice::coefficients_of`].
pub fn coefficients_of_point(lattice: &PrimeLattice, point: &[i64]) -> Result<Vec<i64>> {
    let m = lattice.m;
    if point.len() != m + 1 {
        return Err(Error::DimensionMismatch {
            expected: m + 1,
            actual: point.len(),
        });
    }
    let mut e = Vec::with_capacity(m);
    let mut last: i128 = 0;
    for i in 0..m {
        let f = lattice.permutation[i] as i64;
        if point[i] % f != 0 {
            return Err(Error::PointNotInLattice);
        }
        let ei = point[i] / f;
        let row: i128 = i128::try_from(&lattice.basis[m][i]).map_err(|_| Error::Overflow("log row".into()))?;
        last += ei as i128 * row;
        e.push(ei);
    }
    if last != point[m] as i128 {
        return Err(Error::PointNotInLattice);
    }
    Ok(e)
}

pub(crate) fn uv_from_small(e: &[i64], primes: &[u64]) -> (BigUint, BigUint) {
    let mut u = BigUint::one();
    let mut v = BigUint::one();
    for (&x, &p) in e.iter().zip(primes) {
        if x == 0 {
            continue;
        }
        let power = BigUint::from(p).pow(x.unsigned_abs() as u32);
        if x < 0 {
            v *= power;
        } else {
            u *= power;
        }
    }
    (u, v)
}

/// `Some` iff `u`, `v` and `u - vN` all factor over `base`.
///
/// `u - vN = 0` is an error: it would make `N` itself smooth.
pub fn check_sr_pair(u: &BigUint, v: &BigUint, n: &BigInt, base: &FactorBase, lattice_id: u64, sweep: usize) -> Result<Option<SrPair>> {
    if u.is_zero() || v.is_zero() {
        return Err(Error::InvalidInput("u and v must be positive".into()));
    }
    let w = BigInt::from(u.clone()) - BigInt::from(v.clone()) * n;
    if w.is_zero() {
        return Err(Error::DegenerateRelation);
    }
    let Some(e_prime) = smooth_factorize(&w, base)? else {
        return Ok(None);
    };
    let Some(e) = smooth_factorize(&BigInt::from(u.clone()), base)? else {
        return Ok(None);
    };
    if smooth_factorize(&BigInt::from(v.clone()), base)?.is_none() {
        return Ok(None);
    }
    Ok(Some(SrPair {
        u: u.clone(),
        v: v.clone(),
        e,
        e_prime,
        lattice_id,
        sweep,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Submission {
    New,
    /// Already known from a different lattice.
    Collision,
    /// Already submitted by the same lattice.
    Duplicate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationStats {
    pub emissions: u64,
    pub candidates_checked: u64,
    pub submissions: u64,
    pub collisions: u64,
    pub same_lattice_duplicates: u64,
    pub degenerate: u64,
}

/// Relations deduplicated by `(u, v)`.
#[derive(Debug, Clone, Default)]
pub struct RelationSet {
    relations: Vec<SrPair>,
    index: HashMap<(BigUint, BigUint), usize>,
    seen: HashSet<(usize, u64)>,
    stats: RelationStats,
}

impl RelationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn relations(&self) -> &[SrPair] {
        &self.relations
    }

    pub fn stats(&self) -> &RelationStats {
        &self.stats
    }

    pub fn insert(&mut self, pair: SrPair) -> Submission {
        self.stats.submissions += 1;
        let lattice = pair.lattice_id;
        match self.index.get(&pair.key()) {
            Some(&i) => {
                if self.seen.insert((i, lattice)) {
                    self.stats.collisions += 1;
                    Submission::Collision
                } else {
                    self.stats.same_lattice_duplicates += 1;
                    Submission::Duplicate
                }
            }
            None => {
                let i = self.relations.len();
                self.index.insert(pair.key(), i);
                self.seen.insert((i, lattice));
                self.relations.push(pair);
                Submission::New
            }
        }
    }

    /// Fraction of cross-lattice submissions that were already known.
    pub fn collision_rate(&self) -> f64 {
        let fresh = self.relations.len() as u64 + self.stats.collisions;
        if fresh == 0 {
            0.0
        } else {
            self.stats.collisions as f64 / fresh as f64
        }
    }

    /// Fold in one lattice's harvest.
    pub fn absorb(&mut self, harvest: LatticeHarvest) {
        self.stats.emissions += harvest.emissions;
        self.stats.candidates_checked += harvest.candidates_checked;
        self.stats.degenerate += harvest.degenerate;
        for pair in harvest.pairs {
            self.insert(pair);
        }
    }
}

pub fn write_relations_jsonl<W: Write>(relations: &[SrPair], mut out: W) -> Result<()> {
    for pair in relations {
        serde_json::to_writer(&mut out, pair)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_relations_jsonl<R: BufRead>(input: R) -> Result<Vec<SrPair>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionParams {
    pub m: usize,
    /// Factor base size `M`.
    pub base_size: usize,
    pub c: u32,
    pub beta: f64,
    pub sweeps: usize,
    /// Check candidates in ascending distance order.
    pub priority_order: bool,
}

impl CollectionParams {
    /// `m` and the defaults derived from it: `M = m^2`, `beta = 0.66`,
    /// `20 m` sweeps.
    pub fn for_dimension(m: usize) -> Self {
        Self {
            m,
            base_size: m * m,
            c: DEFAULT_PRECISION,
            beta: DEFAULT_COLLECTION_BETA,
            sweeps: COLLECTION_SWEEPS_PER_DIM * m,
            priority_order: false,
        }
    }

    /// `m = ceil(bits / 3)`.
    pub fn for_bits(bits: u64) -> Self {
        Self::for_dimension(bits.div_ceil(3).max(2) as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if self.base_size < self.m {
            return Err(Error::InvalidInput(format!(
                "factor base size {} is smaller than the dimension {}",
                self.base_size, self.m
            )));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidInput("beta must be positive".into()));
        }
        Ok(())
    }
}

/// What one lattice produced.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeHarvest {
    pub lattice_id: u64,
    pub pairs: Vec<SrPair>,
    /// States of the pairs, parallel to `pairs`.
    pub states: Vec<BitState>,
    pub emissions: u64,
    pub candidates_checked: u64,
    pub degenerate: u64,
}

/// Seeds for lattice `i` of a run seeded with `seed`.
pub fn lattice_seed(seed: u64, i: u64) -> u64 {
    seed::derive(seed, &[seed::label::LATTICE, i])
}

/// Smoothness-check every distinct state of a problem built from `inst`.
pub fn harvest_states(
    inst: &ExactInstance,
    problem: &RefinementProblem,
    states: impl IntoIterator<Item = (BitState, usize)>,
    n: &BigInt,
    base: &FactorBase,
    lattice_id: u64,
) -> Result<LatticeHarvest> {
    let mut out = LatticeHarvest {
        lattice_id,
        pairs: Vec::new(),
        states: Vec::new(),
        emissions: 0,
        candidates_checked: 0,
        degenerate: 0,
    };
    for (state, sweep) in states {
        out.candidates_checked += 1;
        let point = problem.point(&state);
        let e = coefficients_of_point(&inst.lattice, &point)
            .map_err(|err| Error::Internal(format!("neighborhood point off the lattice: {err}")))?;
        let (u, v) = uv_from_small(&e, &inst.lattice.primes);
        match check_sr_pair(&u, &v, n, base, lattice_id, sweep) {
            Ok(Some(pair)) => {
                out.pairs.push(pair);
                out.states.push(state);
            }
            Ok(None) => {}
            Err(Error::DegenerateRelation) => {
                log::warn!("u - vN = 0 for u = {u}, v = {v}; skipped");
                out.degenerate += 1;
            }
            Err(err) => return Err(err),
        }
    }
    Ok(out)
}

/// Build lattice `lattice_id`, sample it, and keep the sr-pairs found.
pub fn collect_from_lattice(n: &BigInt, params: &CollectionParams, base: &FactorBase, lattice_id: u64, lattice_seed: u64) -> Result<LatticeHarvest> {
    params.validate()?;
    let inst = ExactInstance::build(n, params.m, params.c, seed::derive(lattice_seed, &[seed::label::LATTICE]))?;
    let problem = RefinementProblem::from_instance(&inst)?;
    collect_from_instance(&inst, &problem, params, base, lattice_id, seed::derive(lattice_seed, &[seed::label::SAMPLER]))
}

/// Sample an already built instance and keep the sr-pairs found.
pub fn collect_from_instance(
    inst: &ExactInstance,
    problem: &RefinementProblem,
    params: &CollectionParams,
    base: &FactorBase,
    lattice_id: u64,
    sampler_seed: u64,
) -> Result<LatticeHarvest> {
    let n = &inst.lattice.n;
    let mut sink = DedupSink::new();
    let stats = run_collection(problem, params.beta, params.sweeps, sampler_seed, &mut sink)?;
    let mut distinct = sink.into_distinct();
    if params.priority_order {
        distinct.sort_by_key(|d| d.energy);
    }
    let mut harvest = harvest_states(
        inst,
        problem,
        distinct.into_iter().map(|d| (d.state, d.first_sweep)),
        n,
        base,
        lattice_id,
    )?;
    harvest.emissions = stats.emissions as u64;
    Ok(harvest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignParams {
    pub collection: CollectionParams,
    /// Relations wanted; `M + 2` by default.
    pub target_relations: usize,
    pub lattice_budget: usize,
    /// Lattices built per parallel round.
    pub batch_size: usize,
    pub seed: u64,
}

impl CampaignParams {
    pub fn new(collection: CollectionParams, seed: u64) -> Self {
        let target = collection.base_size + 2;
        Self {
            collection,
            target_relations: target,
            lattice_budget: LATTICE_BUDGET_PER_RELATION * target,
            batch_size: rayon::current_num_threads().max(1),
            seed,
        }
    }

    pub fn for_bits(bits: u64, seed: u64) -> Self {
        Self::new(CollectionParams::for_bits(bits), seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub lattices_consumed: u64,
    pub relations: usize,
    pub collisions: u64,
    pub collision_rate: f64,
    pub emissions: u64,
    pub candidates_checked: u64,
    pub complete: bool,
}

/// Relation collection over a stream of fresh lattices.
///
/// Lattices are numbered from 0 and built in batches in parallel, but merged
/// strictly in order, so the outcome depends only on the seed.
#[derive(Debug, Clone)]
pub struct Campaign {
    n: BigInt,
    params: CampaignParams,
    base: FactorBase,
    relations: RelationSet,
    next_lattice: u64,
    /// Per-lattice count of sr-pairs found (before dedup).
    found_per_lattice: Vec<usize>,
}

impl Campaign {
    pub fn new(n: &BigInt, params: CampaignParams) -> Result<Self> {
        params.collection.validate()?;
        if n.sign() != num_bigint::Sign::Plus {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        Ok(Self {
            n: n.clone(),
            base: FactorBase::new(params.collection.base_size),
            params,
            relations: RelationSet::new(),
            next_lattice: 0,
            found_per_lattice: Vec::new(),
        })
    }

    pub fn relations(&self) -> &RelationSet {
        &self.relations
    }

    pub fn base(&self) -> &FactorBase {
        &self.base
    }

    pub fn params(&self) -> &CampaignParams {
        &self.params
    }

    pub fn lattices_consumed(&self) -> u64 {
        self.next_lattice
    }

    pub fn found_per_lattice(&self) -> &[usize] {
        &self.found_per_lattice
    }

    pub fn stats(&self) -> CampaignStats {
        let s = self.relations.stats();
        CampaignStats {
            lattices_consumed: self.next_lattice,
            relations: self.relations.len(),
            collisions: s.collisions,
            collision_rate: self.relations.collision_rate(),
            emissions: s.emissions,
            candidates_checked: s.candidates_checked,
            complete: self.relations.len() >= self.params.target_relations,
        }
    }

    /// Collect until at least `target` relations are held. Returns `false`
    /// when the lattice budget runs out first.
    pub fn run_until(&mut self, target: usize) -> Result<bool> {
        let budget = self.params.lattice_budget as u64;
        let batch = self.params.batch_size.max(1) as u64;
        while self.relations.len() < target {
            if self.next_lattice >= budget {
                return Ok(false);
            }
            let end = (self.next_lattice + batch).min(budget);
            let harvests: Vec<Result<LatticeHarvest>> = (self.next_lattice..end)
                .into_par_iter()
                .map(|i| {
                    collect_from_lattice(
                        &self.n,
                        &self.params.collection,
                        &self.base,
                        i,
                        lattice_seed(self.params.seed, i),
                    )
                })
                .collect();
            for h in harvests {
                let h = h?;
                self.found_per_lattice.push(h.pairs.len());
                self.relations.absorb(h);
                self.next_lattice += 1;
                if self.relations.len() >= target {
                    break;
                }
            }
        }
        Ok(true)
    }

    /// Collect up to the configured target.
    pub fn run(&mut self) -> Result<bool> {
        self.run_until(self.params.target_relations)
    }
}

/// One-shot campaign: the relation set plus its summary.
pub fn run_collection_campaign(n: &BigInt, params: CampaignParams) -> Result<(RelationSet, CampaignStats)> {
    let mut campaign = Campaign::new(n, params)?;
    campaign.run()?;
    let stats = campaign.stats();
    Ok((campaign.relations, stats))
}
