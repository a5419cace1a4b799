//! Lattices needed to factor, against predictions from per-lattice yields.

use std::collections::HashSet;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::mean_ci;
use super::{random_semiprime, semiprime_seed, ExperimentConfig};
use crate::algebra::{factor, FactorParams, DEFAULT_TAU_TRIALS};
use crate::numtheory::FactorBase;
use crate::oracle::enumerate_sr_pairs;
use crate::pbit::RefinementProblem;
use crate::sieve::{collect_from_instance, CampaignParams};
use crate::{seed, Error, ExactInstance, Result};

/// Census and collection yield of one lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RecoverySample {
    /// sr-pair states in the (possibly popcount-bounded) neighborhood.
    pub census: usize,
    /// Of those, states the collection run visited.
    pub found: usize,
    /// All sr-pairs the collection run found.
    pub found_total: usize,
}

impl RecoverySample {
    pub fn fraction(&self) -> Option<f64> {
        (self.census > 0).then(|| self.found as f64 / self.census as f64)
    }
}

/// Census one lattice for `n` and run collection on the same instance.
pub fn recovery_sample(config: &ExperimentConfig, n: &BigInt, m: usize, lattice_seed: u64) -> Result<RecoverySample> {
    let params = config.collection(m, m * m);
    let base = FactorBase::new(params.base_size);
    let inst = ExactInstance::build(n, m, config.c, seed::derive(lattice_seed, &[seed::label::LATTICE]))?;
    let problem = RefinementProblem::from_instance(&inst)?;
    let bound = config.census_bound(m);
    let census = enumerate_sr_pairs(&inst, &problem, &base, bound, false)?;
    let harvest = collect_from_instance(&inst, &problem, &params, &base, 0, seed::derive(lattice_seed, &[seed::label::SAMPLER]))?;
    let available: HashSet<_> = census.sr_pairs().map(|(s, _)| s.clone()).collect();
    let found = harvest.states.iter().filter(|s| available.contains(*s)).count();
    Ok(RecoverySample {
        census: available.len(),
        found,
        found_total: harvest.pairs.len(),
    })
}

/// Outcome for one semiprime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiprimeRun {
    #[serde(rename = "N")]
    pub n: String,
    pub factored: bool,
    pub lattices_consumed: u64,
    pub collision_rate: f64,
    pub found_per_lattice: f64,
    pub recovery: Vec<RecoverySample>,
}

pub fn semiprime_run(config: &ExperimentConfig, bits: u64, index: u64) -> Result<SemiprimeRun> {
    let m = config.mappings[0].dimension(bits);
    let sp = random_semiprime(bits, semiprime_seed(config.seed, bits, index));
    let run_seed = seed::derive(config.seed, &[bits, index]);
    let params = FactorParams {
        campaign: CampaignParams::new(config.collection(m, m * m), run_seed),
        tau_trials: DEFAULT_TAU_TRIALS,
    };
    let report = factor(&sp.n, &params)?;
    if let Some((p, q)) = report.factor_pair() {
        if BigInt::from(p * q) != sp.n {
            return Err(Error::Internal(format!("wrong factors for {}", sp.n)));
        }
    }
    let recovery: Vec<Result<RecoverySample>> = (0..config.recovery_lattices as u64)
        .into_par_iter()
        .map(|r| recovery_sample(config, &sp.n, m, seed::derive(run_seed, &[seed::label::RECOVERY, r])))
        .collect();
    Ok(SemiprimeRun {
        n: sp.n.to_string(),
        factored: report.factors.is_some(),
        lattices_consumed: report.lattices_consumed,
        collision_rate: report.collision_rate,
        found_per_lattice: report.found_per_lattice,
        recovery: recovery.into_iter().collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactoringRow {
    pub bits: u64,
    pub m: usize,
    pub base_size: usize,
    pub semiprimes: usize,
    pub factored: usize,
    /// Measured lattices to factor.
    pub mean_lattices: f64,
    pub lattices_ci_low: f64,
    pub lattices_ci_high: f64,
    /// `(M + 2) / mean census sr-pairs per lattice`.
    pub pred_enum: f64,
    /// `(M + 2) / mean found sr-pairs per lattice`.
    pub pred_pc: f64,
    pub mean_census_per_lattice: f64,
    pub mean_found_per_lattice: f64,
    pub recovery_fraction: f64,
    pub recovery_ci_low: f64,
    pub recovery_ci_high: f64,
    pub recovery_lattices: usize,
    pub collision_rate: f64,
    pub collision_ci_low: f64,
    pub collision_ci_high: f64,
    pub weight_bound: Option<usize>,
    pub seed: u64,
}

/// Aggregate the runs at one bit length.
pub fn factoring_row(config: &ExperimentConfig, bits: u64, runs: &[SemiprimeRun]) -> FactoringRow {
    let m = config.mappings[0].dimension(bits);
    let target = (m * m + 2) as f64;
    let lattices: Vec<f64> = runs.iter().map(|r| r.lattices_consumed as f64).collect();
    let collisions: Vec<f64> = runs.iter().map(|r| r.collision_rate).collect();
    let samples: Vec<&RecoverySample> = runs.iter().flat_map(|r| &r.recovery).collect();
    let census = samples.iter().map(|s| s.census as f64).sum::<f64>() / samples.len().max(1) as f64;
    let fractions: Vec<f64> = samples.iter().filter_map(|s| s.fraction()).collect();
    // found pairs pooled over every campaign lattice
    let total_lattices: f64 = lattices.iter().sum();
    let found = runs.iter().map(|r| r.found_per_lattice * r.lattices_consumed as f64).sum::<f64>() / total_lattices.max(1.0);
    let (l, c, f) = (mean_ci(&lattices), mean_ci(&collisions), mean_ci(&fractions));
    FactoringRow {
        bits,
        m,
        base_size: m * m,
        semiprimes: runs.len(),
        factored: runs.iter().filter(|r| r.factored).count(),
        mean_lattices: l.mean,
        lattices_ci_low: l.low,
        lattices_ci_high: l.high,
        pred_enum: target / census,
        pred_pc: target / found,
        mean_census_per_lattice: census,
        mean_found_per_lattice: found,
        recovery_fraction: f.mean,
        recovery_ci_low: f.low,
        recovery_ci_high: f.high,
        recovery_lattices: fractions.len(),
        collision_rate: c.mean,
        collision_ci_low: c.low,
        collision_ci_high: c.high,
        weight_bound: config.census_bound(m),
        seed: seed::derive(config.seed, &[bits]),
    }
}

/// One row per bit length over `config.semiprimes` random semiprimes.
pub fn run_factoring_experiment(config: &ExperimentConfig) -> Result<Vec<FactoringRow>> {
    config
        .bits
        .iter()
        .map(|bits| {
            let runs = (0..config.semiprimes as u64)
                .map(|i| semiprime_run(config, bits, i))
                .collect::<Result<Vec<_>>>()?;
            Ok(factoring_row(config, bits, &runs))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{BitRange, ExperimentId};

    #[test]
    fn recovery_never_exceeds_the_census() {
        let c = ExperimentConfig::new(ExperimentId::Fig4);
        let n = random_semiprime(24, 5).n;
        for i in 0..4 {
            let s = recovery_sample(&c, &n, 8, i).unwrap();
            assert!(s.found <= s.census);
            assert_eq!(s.found, s.found_total, "full census covers every visited state");
        }
    }

    #[test]
    fn predictions_bracket_the_yields() {
        let mut c = ExperimentConfig::new(ExperimentId::Fig4);
        c.bits = BitRange::single(24);
        c.semiprimes = 2;
        c.recovery_lattices = 4;
        let rows = run_factoring_experiment(&c).unwrap();
        let r = &rows[0];
        assert_eq!(r.factored, 2);
        assert!(r.pred_enum > 0.0 && r.pred_pc > 0.0);
        assert!(r.mean_lattices >= 1.0);
        assert!((0.0..=1.0).contains(&r.recovery_fraction));
        assert_eq!(rows, run_factoring_experiment(&c).unwrap());
    }
}
