//! Census sr-pairs per lattice under different dimension mappings.

use rayon::prelude::*;
use serde::Serialize;

use super::stats::mean_ci;
use super::{random_semiprime, semiprime_seed, ExperimentConfig};
use crate::numtheory::FactorBase;
use crate::oracle::enumerate_sr_pairs;
use crate::pbit::RefinementProblem;
use crate::sieve::lattice_seed;
use crate::{seed, ExactInstance, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingRow {
    pub mapping: String,
    pub bits: u64,
    pub m: usize,
    pub base_size: usize,
    /// Empty for a full census.
    pub weight_bound: Option<usize>,
    pub lattices: usize,
    pub mean_sr_pairs: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Census size of one random lattice for a fresh semiprime.
fn census_count(config: &ExperimentConfig, bits: u64, m: usize, base: &FactorBase, i: u64) -> Result<usize> {
    let n = random_semiprime(bits, semiprime_seed(config.seed, bits, i)).n;
    let ls = lattice_seed(seed::derive(config.seed, &[bits, m as u64]), i);
    let inst = ExactInstance::build(&n, m, config.c, ls)?;
    let problem = RefinementProblem::from_instance(&inst)?;
    Ok(enumerate_sr_pairs(&inst, &problem, base, config.census_bound(m), false)?.sr_pair_count())
}

/// One row per (mapping, bit length) with `M = m^2`.
pub fn run_mapping_experiment(config: &ExperimentConfig) -> Result<Vec<MappingRow>> {
    let mut rows = Vec::new();
    for &mapping in &config.mappings {
        for bits in config.bits.iter() {
            let m = mapping.dimension(bits);
            let base = FactorBase::new(m * m);
            let counts: Vec<Result<usize>> = (0..config.lattices as u64)
                .into_par_iter()
                .map(|i| census_count(config, bits, m, &base, i))
                .collect();
            let counts: Vec<f64> = counts.into_iter().map(|c| c.map(|x| x as f64)).collect::<Result<_>>()?;
            let ci = mean_ci(&counts);
            rows.push(MappingRow {
                mapping: mapping.label(),
                bits,
                m,
                base_size: m * m,
                weight_bound: config.census_bound(m),
                lattices: config.lattices,
                mean_sr_pairs: ci.mean,
                ci_low: ci.low,
                ci_high: ci.high,
                seed: seed::derive(config.seed, &[bits, m as u64]),
            });
        }
    }
    Ok(rows)
}
