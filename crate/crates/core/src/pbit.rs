//! Software p-bit network for refining Babai's approximation.
//!
//! Bit `i` of the state toggles the contribution `k_i d_i` of reduced basis
//! vector `d_i` in its recorded direction `k_i`. The energy of a state is the
//! squared distance from the resulting lattice point to the target, and every
//! p-bit is driven by the exact energy difference between its two values, so
//! the network is fully connected.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use crossbeam_channel::Sender;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lattice::CvpInstance;
use crate::{seed, Error, Result, Scalar};

/// Inverse temperature used for sr-pair collection.
pub const DEFAULT_COLLECTION_BETA: f64 = 0.66;
/// Collection budget: sweeps per lattice dimension.
pub const COLLECTION_SWEEPS_PER_DIM: usize = 20;
/// Linear schedule endpoints for refinement.
pub const DEFAULT_BETA_START: f64 = 0.05;
pub const DEFAULT_BETA_END: f64 = 5.0;
/// Refinement budget: sweeps per lattice dimension.
pub const REFINEMENT_SWEEPS_PER_DIM: usize = 50;

/// Biases beyond this magnitude pin the p-bit.
const SATURATION: f64 = 40.0;

/// Entries above this are rejected so that residual sums cannot overflow.
const ENTRY_LIMIT: i64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitState(Vec<bool>);

impl BitState {
    pub fn zeros(m: usize) -> Self {
        Self(vec![false; m])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Low bit of `word` is bit 0.
    pub fn from_word(word: u64, m: usize) -> Self {
        Self((0..m).map(|i| word >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn with_bit(&self, i: usize, value: bool) -> Self {
        let mut out = self.clone();
        out.0[i] = value;
        out
    }

    /// Parse a string of `0`/`1`, bit 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidInput(format!("bad state character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for BitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Unit in which energies enter the bias.
///
/// Squared distances in a prime lattice are integers whose size depends on
/// `m` and `c`; measuring them in units of the mean squared reduced basis
/// norm makes `beta` dimensionless. `Raw` uses the squared distance as is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyUnit {
    Raw,
    #[default]
    MeanBasisNormSq,
}

/// Operands of the refinement energy, in machine integers.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementProblem {
    target: Vec<i64>,
    b_op: Vec<i64>,
    basis: Vec<Vec<i64>>,
    directions: Vec<i8>,
    // k_i d_i and its squared norm
    steps: Vec<Vec<i64>>,
    step_norms: Vec<i128>,
    unit: f64,
    unit_kind: EnergyUnit,
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .filter(|v| v.abs() < ENTRY_LIMIT)
        .ok_or_else(|| Error::Overflow(x.to_string()))
}

fn norm_sq(v: &[i64]) -> i128 {
    v.iter().map(|&x| x as i128 * x as i128).sum()
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

impl RefinementProblem {
    pub fn new(target: Vec<i64>, b_op: Vec<i64>, basis: Vec<Vec<i64>>, directions: Vec<i8>) -> Result<Self> {
        let ambient = target.len();
        let check = |len: usize| {
            if len == ambient {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: ambient,
                    actual: len,
                })
            }
        };
        check(b_op.len())?;
        for d in &basis {
            check(d.len())?;
        }
        if directions.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: directions.len(),
            });
        }
        if directions.iter().any(|k| !(-1..=1).contains(k)) {
            return Err(Error::InvalidInput("directions must lie in {-1, 0, 1}".into()));
        }
        let all = target.iter().chain(&b_op).chain(basis.iter().flatten());
        if all.into_iter().any(|x| x.abs() >= ENTRY_LIMIT) {
            return Err(Error::Overflow("refinement operand too large".into()));
        }
        let steps: Vec<Vec<i64>> = basis
            .iter()
            .zip(&directions)
            .map(|(d, &k)| d.iter().map(|&x| x * k as i64).collect())
            .collect();
        let step_norms = steps.iter().map(|s| norm_sq(s)).collect();
        let mut problem = Self {
            target,
            b_op,
            basis,
            directions,
            steps,
            step_norms,
            unit: 1.0,
            unit_kind: EnergyUnit::Raw,
        };
        problem.set_energy_unit(EnergyUnit::default());
        Ok(problem)
    }

    pub fn with_energy_unit(mut self, kind: EnergyUnit) -> Self {
        self.set_energy_unit(kind);
        self
    }

    pub fn set_energy_unit(&mut self, kind: EnergyUnit) {
        self.unit_kind = kind;
        self.unit = match kind {
            EnergyUnit::Raw => 1.0,
            EnergyUnit::MeanBasisNormSq if self.basis.is_empty() => 1.0,
            EnergyUnit::MeanBasisNormSq => {
                let total: i128 = self.basis.iter().map(|d| norm_sq(d)).sum();
                (total as f64 / self.basis.len() as f64).max(1.0)
            }
        };
    }

    pub fn energy_unit(&self) -> EnergyUnit {
        self.unit_kind
    }

    /// Size of one energy unit in squared-distance terms.
    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn from_instance<T: Scalar>(inst: &CvpInstance<T>) -> Result<Self> {
        let conv = |v: &[BigInt]| v.iter().map(to_i64).collect::<Result<Vec<_>>>();
        Self::new(
            conv(&inst.lattice.target)?,
            conv(&inst.babai.b_op)?,
            inst.reduced
                .vectors
                .iter()
                .map(|d| conv(d))
                .collect::<Result<_>>()?,
            inst.babai.directions.clone(),
        )
    }

    /// Number of p-bits `m`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.target.len()
    }

    pub fn directions(&self) -> &[i8] {
        &self.directions
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn target(&self) -> &[i64] {
        &self.target
    }

    pub fn b_op(&self) -> &[i64] {
        &self.b_op
    }

    /// `k_i d_i`.
    pub fn step(&self, i: usize) -> &[i64] {
        &self.steps[i]
    }

    /// `t - (b_op + sum_i s_i k_i d_i)`, computed from scratch.
    pub fn residual(&self, s: &BitState) -> Vec<i64> {
        assert_eq!(s.len(), self.dim(), "state length");
        let mut r: Vec<i64> = self.target.iter().zip(&self.b_op).map(|(t, b)| t - b).collect();
        for (i, step) in self.steps.iter().enumerate() {
            if s.get(i) {
                for (x, y) in r.iter_mut().zip(step) {
                    *x -= y;
                }
            }
        }
        r
    }

    /// Lattice point selected by `s`.
    pub fn point(&self, s: &BitState) -> Vec<i64> {
        self.residual(s)
            .iter()
            .zip(&self.target)
            .map(|(r, t)| t - r)
            .collect()
    }

    /// `E(s) = |t - (b_op + sum_i s_i k_i d_i)|^2`, exactly.
    pub fn energy(&self, s: &BitState) -> i128 {
        norm_sq(&self.residual(s))
    }

    /// `E(s | s_i = 0) - E(s | s_i = 1)` from the residual of `s`.
    ///
    /// With `v0` the residual when bit `i` is off, `v1 = v0 - k_i d_i`, so
    /// the gap is `2 <v0, k_i d_i> - |k_i d_i|^2`.
    fn gap_from_residual(&self, residual: &[i64], bit_on: bool, i: usize) -> i128 {
        let step = &self.steps[i];
        let mut along = dot(residual, step);
        if bit_on {
            along += self.step_norms[i];
        }
        2 * along - self.step_norms[i]
    }

    /// Energy gap of bit `i` at state `s`, via the residual.
    pub fn energy_gap(&self, s: &BitState, i: usize) -> i128 {
        self.gap_from_residual(&self.residual(s), s.get(i), i)
    }
}

pub fn energy(problem: &RefinementProblem, s: &BitState) -> i128 {
    problem.energy(s)
}

/// `beta * (E(s | s_i = 0) - E(s | s_i = 1))`, with energies in the
/// problem's unit.
pub fn calculate_bias(problem: &RefinementProblem, s: &BitState, i: usize, beta: f64) -> f64 {
    scale_gap(problem, problem.energy_gap(s, i), beta)
}

fn scale_gap(problem: &RefinementProblem, gap: i128, beta: f64) -> f64 {
    beta * gap as f64 / problem.unit
}

/// `P(s = 1 | b) = 1 / (1 + exp(-b))`, saturating for large `|b|`.
pub fn logistic(bias: f64) -> f64 {
    if bias > SATURATION {
        1.0
    } else if bias < -SATURATION {
        0.0
    } else {
        1.0 / (1.0 + (-bias).exp())
    }
}

pub fn sample_pbit<R: Rng + ?Sized>(bias: f64, rng: &mut R) -> bool {
    let u: f64 = rng.gen();
    u < logistic(bias)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Constant,
    Linear,
}

/// Inverse-temperature schedule over a sweep budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub beta_start: f64,
    pub beta_end: f64,
    pub total_sweeps: usize,
}

impl Schedule {
    pub fn constant(beta: f64, total_sweeps: usize) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            beta_start: beta,
            beta_end: beta,
            total_sweeps,
        }
    }

    pub fn linear(beta_start: f64, beta_end: f64, total_sweeps: usize) -> Self {
        Self {
            kind: ScheduleKind::Linear,
            beta_start,
            beta_end,
            total_sweeps,
        }
    }

    /// Default refinement schedule for an `m`-bit network.
    pub fn refinement_default(m: usize) -> Self {
        Self::linear(DEFAULT_BETA_START, DEFAULT_BETA_END, REFINEMENT_SWEEPS_PER_DIM * m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_start > 0.0 && self.beta_end > 0.0) {
            return Err(Error::InvalidInput("beta must be positive".into()));
        }
        Ok(())
    }

    /// Beta during sweep `t` (0-based).
    pub fn beta_at(&self, t: usize) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.beta_start,
            ScheduleKind::Linear if self.total_sweeps <= 1 => self.beta_start,
            ScheduleKind::Linear => {
                let frac = t.min(self.total_sweeps - 1) as f64 / (self.total_sweeps - 1) as f64;
                self.beta_start + (self.beta_end - self.beta_start) * frac
            }
        }
    }
}

/// How p-bits are chosen for update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateMode {
    /// Every bit once per sweep, in index order.
    #[default]
    Sweep,
    /// Pick a bit uniformly; resample all of its neighbors from their stored
    /// biases, then recompute its own bias. `m` such steps count as a sweep.
    RandomNeighborhood,
}

/// A running p-bit network.
#[derive(Debug, Clone)]
pub struct PBitNetwork {
    state: BitState,
    biases: Vec<f64>,
    beta: f64,
    rng: ChaCha8Rng,
    residual: Vec<i64>,
    energy: i128,
}

impl PBitNetwork {
    /// All-zero start, i.e. at Babai's point.
    pub fn new(problem: &RefinementProblem, beta: f64, seed: u64) -> Self {
        assert!(beta > 0.0, "beta must be positive");
        let state = BitState::zeros(problem.dim());
        let residual = problem.residual(&state);
        let energy = norm_sq(&residual);
        Self {
            state,
            biases: vec![0.0; problem.dim()],
            beta,
            rng: seed::rng(seed),
            residual,
            energy,
        }
    }

    pub fn state(&self) -> &BitState {
        &self.state
    }

    pub fn energy(&self) -> i128 {
        self.energy
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn residual(&self) -> &[i64] {
        &self.residual
    }

    pub fn set_beta(&mut self, beta: f64) {
        assert!(beta > 0.0, "beta must be positive");
        self.beta = beta;
    }

    fn set_bit(&mut self, problem: &RefinementProblem, i: usize, value: bool, gap: i128) {
        if self.state.get(i) == value {
            return;
        }
        let step = problem.step(i);
        if value {
            for (x, y) in self.residual.iter_mut().zip(step) {
                *x -= y;
            }
            self.energy -= gap;
        } else {
            for (x, y) in self.residual.iter_mut().zip(step) {
                *x += y;
            }
            self.energy += gap;
        }
        self.state.set(i, value);
        debug_assert_eq!(self.residual, problem.residual(&self.state));
        debug_assert_eq!(self.energy, norm_sq(&self.residual));
    }

    /// Bit `i`'s energy gap from the incrementally maintained residual.
    pub fn energy_gap(&self, problem: &RefinementProblem, i: usize) -> i128 {
        problem.gap_from_residual(&self.residual, self.state.get(i), i)
    }

    /// Recompute bit `i`'s bias from the current state and resample it.
    pub fn update_bit(&mut self, problem: &RefinementProblem, i: usize) {
        let gap = self.energy_gap(problem, i);
        let bias = scale_gap(problem, gap, self.beta);
        self.biases[i] = bias;
        let value = sample_pbit(bias, &mut self.rng);
        self.set_bit(problem, i, value, gap);
    }

    /// One full sweep in index order; `emit` sees the global state after
    /// every single-bit update.
    pub fn sweep<F: FnMut(&BitState, i128)>(&mut self, problem: &RefinementProblem, mut emit: F) {
        for i in 0..problem.dim() {
            self.update_bit(problem, i);
            emit(&self.state, self.energy);
        }
    }

    /// One step of the random-selection update: every neighbor of a random
    /// bit is read from its stored bias, then the bit's own bias is
    /// recomputed.
    pub fn random_step<F: FnMut(&BitState, i128)>(&mut self, problem: &RefinementProblem, mut emit: F) {
        let m = problem.dim();
        let i = self.rng.gen_range(0..m);
        for j in (0..m).filter(|&j| j != i) {
            let value = sample_pbit(self.biases[j], &mut self.rng);
            let gap = self.energy_gap(problem, j);
            self.set_bit(problem, j, value, gap);
        }
        self.biases[i] = scale_gap(problem, self.energy_gap(problem, i), self.beta);
        emit(&self.state, self.energy);
    }

    /// One sweep's worth of updates in the given mode.
    pub fn advance<F: FnMut(&BitState, i128)>(&mut self, problem: &RefinementProblem, mode: UpdateMode, mut emit: F) {
        match mode {
            UpdateMode::Sweep => self.sweep(problem, emit),
            UpdateMode::RandomNeighborhood => {
                for _ in 0..problem.dim() {
                    self.random_step(problem, &mut emit);
                }
            }
        }
    }
}

/// Exit condition besides the sweep budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StopCriterion {
    /// Stop as soon as a state with at most this energy is visited.
    pub target_energy: Option<i128>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub sweep_index: usize,
    pub best_energy: i128,
    pub current_energy: i128,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementOutcome {
    pub best_state: BitState,
    pub best_energy: i128,
    /// Energy of Babai's point.
    pub initial_energy: i128,
    pub sweeps_run: usize,
    /// Sweep (1-based) during which the best state was first visited; 0 when
    /// it is the starting state.
    pub first_hit_sweep: usize,
    pub reached_target: bool,
    pub trace: Vec<TraceRow>,
}

impl RefinementOutcome {
    /// `100 (|b_op - t| - |best - t|) / |b_op - t|`.
    pub fn improvement_percent(&self) -> f64 {
        improvement_percent(self.initial_energy, self.best_energy)
    }
}

pub fn improvement_percent(initial_energy: i128, best_energy: i128) -> f64 {
    if initial_energy == 0 {
        return 0.0;
    }
    let a = (initial_energy as f64).sqrt();
    let b = (best_energy as f64).sqrt();
    100.0 * (a - b) / a
}

/// Anneal toward the closest point of the reduced neighborhood, keeping the
/// lowest-energy state ever visited.
pub fn run_refinement(
    problem: &RefinementProblem,
    schedule: &Schedule,
    stop: StopCriterion,
    mode: UpdateMode,
    seed: u64,
) -> Result<RefinementOutcome> {
    schedule.validate()?;
    let mut net = PBitNetwork::new(problem, schedule.beta_at(0), seed);
    let initial_energy = net.energy();
    let mut best_state = net.state().clone();
    let mut best_energy = initial_energy;
    let mut first_hit_sweep = 0;
    let reached = |e: i128| stop.target_energy.is_some_and(|t| e <= t);
    let mut reached_target = reached(best_energy);
    let mut trace = Vec::new();
    let mut sweeps_run = 0;
    if problem.dim() > 0 {
        for t in 0..schedule.total_sweeps {
            if reached_target {
                break;
            }
            let beta = schedule.beta_at(t);
            net.set_beta(beta);
            net.advance(problem, mode, |s, e| {
                if e < best_energy {
                    best_energy = e;
                    best_state = s.clone();
                    first_hit_sweep = t + 1;
                }
            });
            sweeps_run = t + 1;
            reached_target = reached(best_energy);
            trace.push(TraceRow {
                sweep_index: t + 1,
                best_energy,
                current_energy: net.energy(),
                beta,
            });
        }
    }
    Ok(RefinementOutcome {
        best_state,
        best_energy,
        initial_energy,
        sweeps_run,
        first_hit_sweep,
        reached_target,
        trace,
    })
}

/// Consumer of emitted states. Implementations must not block the sampler.
pub trait StateSink {
    fn accept(&mut self, state: &BitState, sweep: usize, energy: i128);
}

impl<F: FnMut(&BitState, usize, i128)> StateSink for F {
    fn accept(&mut self, state: &BitState, sweep: usize, energy: i128) {
        self(state, sweep, energy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discovery {
    pub state: BitState,
    /// 1-based sweep of the first emission.
    pub first_sweep: usize,
    pub energy: i128,
    pub hits: usize,
}

/// Keeps each distinct state once, in order of first emission.
#[derive(Debug, Clone, Default)]
pub struct DedupSink {
    order: Vec<Discovery>,
    index: HashMap<BitState, usize>,
}

impl DedupSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn distinct(&self) -> &[Discovery] {
        &self.order
    }

    pub fn into_distinct(self) -> Vec<Discovery> {
        self.order
    }

    pub fn emissions(&self) -> usize {
        self.order.iter().map(|d| d.hits).sum()
    }
}

impl StateSink for DedupSink {
    fn accept(&mut self, state: &BitState, sweep: usize, energy: i128) {
        if let Some(&i) = self.index.get(state) {
            self.order[i].hits += 1;
            return;
        }
        self.index.insert(state.clone(), self.order.len());
        self.order.push(Discovery {
            state: state.clone(),
            first_sweep: sweep,
            energy,
            hits: 1,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub state: BitState,
    pub sweep: usize,
    pub energy: i128,
}

/// Forwards every emission to an unbounded channel for off-thread checking.
#[derive(Debug, Clone)]
pub struct ChannelSink {
    tx: Sender<Emission>,
}

impl ChannelSink {
    pub fn new(tx: Sender<Emission>) -> Self {
        Self { tx }
    }
}

impl StateSink for ChannelSink {
    fn accept(&mut self, state: &BitState, sweep: usize, energy: i128) {
        // A dropped receiver only means nobody is listening any more.
        let _ = self.tx.send(Emission {
            state: state.clone(),
            sweep,
            energy,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollectionStats {
    pub sweeps: usize,
    pub emissions: usize,
}

/// Explore at constant `beta`, emitting the global state after every p-bit
/// update.
pub fn run_collection<S: StateSink + ?Sized>(
    problem: &RefinementProblem,
    beta: f64,
    sweeps: usize,
    seed: u64,
    sink: &mut S,
) -> Result<CollectionStats> {
    if !(beta > 0.0) {
        return Err(Error::InvalidInput("beta must be positive".into()));
    }
    let mut net = PBitNetwork::new(problem, beta, seed);
    let mut emissions = 0;
    for t in 0..sweeps {
        net.sweep(problem, |s, e| {
            sink.accept(s, t + 1, e);
            emissions += 1;
        });
    }
    Ok(CollectionStats { sweeps, emissions })
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    pub(crate) fn random_problem<R: Rng>(rng: &mut R, m: usize, spread: i64) -> RefinementProblem {
        let ambient = m + 1;
        let mut v = |n: usize| -> Vec<i64> { (0..n).map(|_| rng.gen_range(-spread..=spread)).collect() };
        let target = v(ambient);
        let b_op = v(ambient);
        let basis = (0..m).map(|_| v(ambient)).collect();
        let directions = (0..m).map(|_| [-1i8, 0, 1, 1][rng.gen_range(0..4)]).collect();
        RefinementProblem::new(target, b_op, basis, directions)
            .unwrap()
            .with_energy_unit(EnergyUnit::Raw)
    }

    fn one_d() -> RefinementProblem {
        RefinementProblem::new(vec![3], vec![0], vec![vec![2]], vec![1])
            .unwrap()
            .with_energy_unit(EnergyUnit::Raw)
    }

    #[test]
    fn energy_examples() {
        let p = one_d();
        assert_eq!(energy(&p, &BitState::zeros(1)), 9);
        assert_eq!(energy(&p, &BitState::from_bits(vec![true])), 1);
        let mut rng = seed::rng(1);
        let p = random_problem(&mut rng, 5, 9);
        let direct: i128 = p
            .target()
            .iter()
            .zip(p.b_op())
            .map(|(t, b)| ((t - b) as i128).pow(2))
            .sum();
        assert_eq!(energy(&p, &BitState::zeros(5)), direct);
    }

    #[test]
    fn bias_examples() {
        let p = one_d();
        assert_eq!(calculate_bias(&p, &BitState::zeros(1), 0, 1.0), 8.0);
        let frozen = RefinementProblem::new(vec![3, 1], vec![0, 0], vec![vec![2, 5]], vec![0]).unwrap();
        assert_eq!(calculate_bias(&frozen, &BitState::zeros(1), 0, 1.0), 0.0);
    }

    #[test]
    fn default_unit_is_mean_basis_norm() {
        let p = RefinementProblem::new(vec![3, 0], vec![0, 0], vec![vec![2, 0], vec![0, 4]], vec![1, 0]).unwrap();
        assert_eq!(p.energy_unit(), EnergyUnit::MeanBasisNormSq);
        assert_eq!(p.unit(), 10.0);
        // gap 2*3*2 - 4 = 8 in squared distance
        assert_eq!(calculate_bias(&p, &BitState::zeros(2), 0, 1.0), 0.8);
        assert_eq!(p.clone().with_energy_unit(EnergyUnit::Raw).unit(), 1.0);
    }

    #[test]
    fn rejects_inconsistent_operands() {
        assert!(RefinementProblem::new(vec![1, 2], vec![0], vec![], vec![]).is_err());
        assert!(RefinementProblem::new(vec![1], vec![0], vec![vec![1]], vec![]).is_err());
        assert!(RefinementProblem::new(vec![1], vec![0], vec![vec![1]], vec![2]).is_err());
        assert!(RefinementProblem::new(vec![1 << 50], vec![0], vec![], vec![]).is_err());
    }

    #[test]
    fn logistic_limits() {
        assert_eq!(logistic(0.0), 0.5);
        assert_eq!(logistic(1e9), 1.0);
        assert_eq!(logistic(-1e9), 0.0);
        assert!((logistic(2.0) - 0.880_797_077_977_882_3).abs() < 1e-15);
        let mut rng = seed::rng(4);
        assert!((0..1000).all(|_| sample_pbit(1e6, &mut rng)));
        assert!((0..1000).all(|_| !sample_pbit(-1e6, &mut rng)));
    }

    #[test]
    fn sample_frequencies_match_logistic() {
        let mut rng = seed::rng(17);
        let draws = 100_000;
        for bias in [0.0, 2.0, -0.7] {
            let p = logistic(bias);
            let ones = (0..draws).filter(|_| sample_pbit(bias, &mut rng)).count() as f64;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((ones / draws as f64 - p).abs() < 3.0 * sigma, "bias {bias}");
        }
    }

    #[test]
    fn one_bit_sweep_is_one_sample() {
        let p = one_d();
        for s in 0..50 {
            let mut net = PBitNetwork::new(&p, 0.1, s);
            net.sweep(&p, |_, _| {});
            let mut rng = seed::rng(s);
            let expect = sample_pbit(0.1 * 8.0, &mut rng);
            assert_eq!(net.state().get(0), expect);
        }
    }

    #[test]
    fn frozen_bits_never_change_energy() {
        let p = RefinementProblem::new(vec![3, 1], vec![0, 0], vec![vec![2, 5], vec![1, 1]], vec![0, 1]).unwrap();
        let mut net = PBitNetwork::new(&p, 1.0, 3);
        let mut seen = [0usize; 2];
        for _ in 0..2000 {
            net.sweep(&p, |_, _| {});
            assert_eq!(net.biases()[0], 0.0);
            seen[net.state().get(0) as usize] += 1;
            let without = net.state().with_bit(0, false);
            assert_eq!(p.energy(net.state()), p.energy(&without));
        }
        assert!(seen[0] > 800 && seen[1] > 800);
    }

    #[test]
    fn frozen_at_local_minimum() {
        // zero state is the strict minimum with gaps of at least 7
        let p = RefinementProblem::new(vec![0, 0], vec![0, 0], vec![vec![3, 0], vec![0, 4]], vec![1, -1])
            .unwrap()
            .with_energy_unit(EnergyUnit::Raw);
        let beta = 10.0;
        let min_gap = 9.0;
        let eps = 1.0 - logistic(-beta * min_gap);
        let mut unchanged = 0;
        for s in 0..200 {
            let mut net = PBitNetwork::new(&p, beta, s);
            net.sweep(&p, |_, _| {});
            unchanged += usize::from(net.state().count_ones() == 0);
        }
        assert!(unchanged as f64 >= 200.0 * (1.0 - 2.0 * (1.0 - eps)));
        assert_eq!(unchanged, 200);
    }

    #[test]
    fn collection_emits_once_per_update() {
        let mut rng = seed::rng(8);
        let p = random_problem(&mut rng, 4, 5);
        let mut count = 0;
        let mut sink = |_: &BitState, _: usize, _: i128| count += 1;
        let stats = run_collection(&p, DEFAULT_COLLECTION_BETA, 20 * 4, 1, &mut sink).unwrap();
        assert_eq!(count, 20 * 4 * 4);
        assert_eq!(stats.emissions, 320);

        let mut dedup = DedupSink::new();
        run_collection(&p, DEFAULT_COLLECTION_BETA, 80, 1, &mut dedup).unwrap();
        assert_eq!(dedup.emissions(), 320);
        assert!(dedup.distinct().len() <= 16);
        for d in dedup.distinct() {
            assert_eq!(d.energy, p.energy(&d.state));
        }
    }

    #[test]
    fn channel_sink_forwards_everything() {
        let mut rng = seed::rng(9);
        let p = random_problem(&mut rng, 3, 5);
        let (tx, rx) = crossbeam_channel::unbounded();
        let mut sink = ChannelSink::new(tx);
        run_collection(&p, 0.5, 10, 2, &mut sink).unwrap();
        drop(sink);
        let got: Vec<Emission> = rx.iter().collect();
        assert_eq!(got.len(), 30);
        assert!(got.iter().all(|e| e.energy == p.energy(&e.state)));
    }

    #[test]
    fn trajectories_are_seed_deterministic() {
        let mut rng = seed::rng(10);
        let p = random_problem(&mut rng, 6, 7);
        let run = |seed| {
            let mut states = Vec::new();
            let mut sink = |s: &BitState, _: usize, _: i128| states.push(s.clone());
            run_collection(&p, 0.3, 30, seed, &mut sink).unwrap();
            states
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn refinement_without_improvement_keeps_babai() {
        let p = RefinementProblem::new(vec![0, 0], vec![0, 0], vec![vec![3, 0], vec![0, 4]], vec![1, -1]).unwrap();
        let out = run_refinement(&p, &Schedule::refinement_default(2), StopCriterion::default(), UpdateMode::Sweep, 1).unwrap();
        assert_eq!(out.best_state, BitState::zeros(2));
        assert_eq!(out.best_energy, 0);
        assert_eq!(out.first_hit_sweep, 0);
        assert_eq!(out.improvement_percent(), 0.0);
    }

    #[test]
    fn refinement_stops_at_target() {
        let p = one_d();
        let out = run_refinement(
            &p,
            &Schedule::linear(0.05, 5.0, 100),
            StopCriterion { target_energy: Some(1) },
            UpdateMode::Sweep,
            3,
        )
        .unwrap();
        assert!(out.reached_target);
        assert_eq!(out.best_energy, 1);
        assert_eq!(out.sweeps_run, out.first_hit_sweep);
        assert_eq!(out.trace.len(), out.sweeps_run);
        let pct = out.improvement_percent();
        assert!((pct - 100.0 * (3.0 - 1.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_sweeps_report_babai() {
        let p = one_d();
        let out = run_refinement(&p, &Schedule::linear(0.05, 5.0, 0), StopCriterion::default(), UpdateMode::Sweep, 3).unwrap();
        assert_eq!(out.best_energy, 9);
        assert_eq!(out.sweeps_run, 0);
    }

    #[test]
    fn random_neighborhood_mode_finds_the_minimum() {
        let mut rng = seed::rng(12);
        for _ in 0..20 {
            let p = random_problem(&mut rng, 5, 6);
            let best = (0..32u64)
                .map(|w| p.energy(&BitState::from_word(w, 5)))
                .min()
                .unwrap();
            let out = run_refinement(
                &p,
                &Schedule::linear(0.01, 2.0, 400),
                StopCriterion { target_energy: Some(best) },
                UpdateMode::RandomNeighborhood,
                rng.gen(),
            )
            .unwrap();
            assert_eq!(out.best_energy, best);
            assert_eq!(p.energy(&out.best_state), best);
        }
    }

    #[test]
    fn schedule_interpolates() {
        let s = Schedule::linear(0.05, 5.0, 100);
        assert_eq!(s.beta_at(0), 0.05);
        assert!((s.beta_at(99) - 5.0).abs() < 1e-12);
        assert!((s.beta_at(33) - (0.05 + 4.95 / 3.0)).abs() < 1e-12);
        assert_eq!(Schedule::constant(0.66, 10).beta_at(7), 0.66);
        assert!(Schedule::constant(0.0, 10).validate().is_err());
    }

    #[test]
    fn trace_csv_header() {
        let rows = vec![TraceRow { sweep_index: 1, best_energy: 5, current_energy: 7, beta: 0.5 }];
        let mut buf = Vec::new();
        write_trace_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "sweep_index,best_energy,current_energy,beta\n1,5,7,0.5\n");
    }

    #[test]
    fn bitstring_round_trip() {
        let s = BitState::parse("10110").unwrap();
        assert_eq!(s.to_string(), "10110");
        assert_eq!(s, BitState::from_word(0b01101, 5));
        assert!(BitState::parse("102").is_err());
    }

    proptest! {
        #[test]
        fn incremental_gap_matches_definition(seed in any::<u64>(), m in 1usize..9, i_frac in 0.0f64..1.0) {
            let mut rng = seed::rng(seed);
            let p = random_problem(&mut rng, m, 50);
            let s = BitState::from_bits((0..m).map(|_| rng.gen()).collect());
            let i = ((i_frac * m as f64) as usize).min(m - 1);
            let definitional = p.energy(&s.with_bit(i, false)) - p.energy(&s.with_bit(i, true));
            prop_assert_eq!(p.energy_gap(&s, i), definitional);
            // the gap does not depend on the current value of bit i
            prop_assert_eq!(p.energy_gap(&s.with_bit(i, true), i), p.energy_gap(&s.with_bit(i, false), i));
        }

        #[test]
        fn network_residual_stays_consistent(seed in any::<u64>(), m in 1usize..7) {
            let mut rng = seed::rng(seed);
            let p = random_problem(&mut rng, m, 20);
            let mut net = PBitNetwork::new(&p, 0.05, seed);
            for _ in 0..10 {
                net.sweep(&p, |s, e| assert_eq!(e, p.energy(s)));
                prop_assert_eq!(net.residual(), &p.residual(net.state())[..]);
            }
        }
    }
}
