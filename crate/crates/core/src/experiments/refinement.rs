//! Sweeps needed by the annealed network to reach the enumerated optimum.

use rayon::prelude::*;
use serde::Serialize;

use super::stats::mean_ci;
use super::{random_semiprime, semiprime_seed, ExperimentConfig};
use crate::oracle::{enumerate_neighborhood, FULL_ENUMERATION_LIMIT};
use crate::pbit::{improvement_percent, run_refinement, RefinementProblem, Schedule, StopCriterion, UpdateMode};
use crate::sieve::lattice_seed;
use crate::{seed, ExactInstance, Result};

/// Screening gives up after this many lattices per requested lattice.
const MAX_ATTEMPTS_PER_LATTICE: usize = 20;

/// One lattice: the oracle optimum and what the network found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementTrial {
    pub bits: u64,
    pub m: usize,
    pub index: u64,
    pub seed: u64,
    pub initial_energy: i128,
    pub optimum_energy: i128,
    pub best_energy: i128,
    /// The oracle found something better than Babai's point.
    pub improvable: bool,
    pub reached_optimum: bool,
    pub first_hit_sweep: usize,
    pub sweep_budget: usize,
    pub improvement_percent: f64,
}

/// Lattice `index` at `bits` with dimension `m`: enumerate the optimum and,
/// when it improves on Babai's point, anneal toward it.
pub fn refinement_trial(config: &ExperimentConfig, bits: u64, m: usize, index: u64) -> Result<RefinementTrial> {
    let point_seed = seed::derive(config.seed, &[bits, m as u64]);
    let n = random_semiprime(bits, semiprime_seed(config.seed, bits, index)).n;
    let ls = lattice_seed(point_seed, index);
    let inst = ExactInstance::build(&n, m, config.c, seed::derive(ls, &[seed::label::LATTICE]))?;
    let problem = RefinementProblem::from_instance(&inst)?;
    let bound = (m > FULL_ENUMERATION_LIMIT).then_some(config.weight_bound);
    let oracle = enumerate_neighborhood(&problem, bound)?;
    let initial = problem.energy(&crate::pbit::BitState::zeros(m));
    let budget = config.refinement_sweeps_per_dim * m;
    let mut trial = RefinementTrial {
        bits,
        m,
        index,
        seed: ls,
        initial_energy: initial,
        optimum_energy: oracle.best_distance_sq,
        best_energy: initial,
        improvable: oracle.best_distance_sq < initial,
        reached_optimum: oracle.best_distance_sq >= initial,
        first_hit_sweep: 0,
        sweep_budget: budget,
        improvement_percent: 0.0,
    };
    if trial.improvable {
        let schedule = Schedule::linear(config.beta_start, config.beta_end, budget);
        let stop = StopCriterion {
            target_energy: Some(oracle.best_distance_sq),
        };
        let out = run_refinement(&problem, &schedule, stop, UpdateMode::Sweep, seed::derive(ls, &[seed::label::SAMPLER]))?;
        trial.best_energy = out.best_energy;
        trial.reached_optimum = out.best_energy <= oracle.best_distance_sq;
        trial.first_hit_sweep = out.first_hit_sweep;
        trial.improvement_percent = improvement_percent(initial, out.best_energy);
    }
    Ok(trial)
}

/// The first `count` improvable lattices at `bits`, screening at most
/// `20 count` candidates.
pub fn screened_trials(config: &ExperimentConfig, bits: u64, m: usize, count: usize) -> Result<(Vec<RefinementTrial>, usize)> {
    let mut kept = Vec::new();
    let mut attempts = 0usize;
    let limit = count * MAX_ATTEMPTS_PER_LATTICE;
    while kept.len() < count && attempts < limit {
        let batch = (count - kept.len()).max(rayon::current_num_threads()).min(limit - attempts);
        let trials: Vec<Result<RefinementTrial>> = (attempts..attempts + batch)
            .into_par_iter()
            .map(|i| refinement_trial(config, bits, m, i as u64))
            .collect();
        for t in trials {
            attempts += 1;
            let t = t?;
            if t.improvable {
                kept.push(t);
                if kept.len() == count {
                    break;
                }
            }
        }
    }
    Ok((kept, attempts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub bits: u64,
    pub m: usize,
    pub attempts: usize,
    pub lattices: usize,
    pub success_rate: f64,
    pub mean_sweeps_to_optimum: f64,
    pub sweeps_ci_low: f64,
    pub sweeps_ci_high: f64,
    pub mean_improvement_percent: f64,
    pub improvement_ci_low: f64,
    pub improvement_ci_high: f64,
    pub sweep_budget: usize,
    pub seed: u64,
}

/// One row per bit length, over lattices the oracle shows to be improvable.
pub fn run_refinement_experiment(config: &ExperimentConfig) -> Result<Vec<RefinementRow>> {
    let mapping = config.mappings[0];
    config
        .bits
        .iter()
        .map(|bits| {
            let m = mapping.dimension(bits);
            let (trials, attempts) = screened_trials(config, bits, m, config.lattices)?;
            let hits: Vec<f64> = trials
                .iter()
                .filter(|t| t.reached_optimum)
                .map(|t| t.first_hit_sweep as f64)
                .collect();
            let improvement: Vec<f64> = trials.iter().map(|t| t.improvement_percent).collect();
            let sweeps = mean_ci(&hits);
            let imp = mean_ci(&improvement);
            Ok(RefinementRow {
                bits,
                m,
                attempts,
                lattices: trials.len(),
                success_rate: hits.len() as f64 / trials.len().max(1) as f64,
                mean_sweeps_to_optimum: sweeps.mean,
                sweeps_ci_low: sweeps.low,
                sweeps_ci_high: sweeps.high,
                mean_improvement_percent: imp.mean,
                improvement_ci_low: imp.low,
                improvement_ci_high: imp.high,
                sweep_budget: config.refinement_sweeps_per_dim * m,
                seed: seed::derive(config.seed, &[bits, m as u64]),
            })
        })
        .collect()
}
