//! Collision rate against dimension for a fixed semiprime.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::proportion_ci;
use super::{random_semiprime, semiprime_seed, ExperimentConfig};
use crate::numtheory::FactorBase;
use crate::sieve::{collect_from_lattice, lattice_seed, LatticeHarvest, RelationSet};
use crate::{seed, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionRow {
    pub dimension: usize,
    pub collision_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub lattices: usize,
    pub unique: usize,
    pub collisions: u64,
    #[serde(rename = "N")]
    pub n: String,
    pub base_size: usize,
    pub seed: u64,
}

/// The configured `N`, or a seeded semiprime at the first bit length.
pub fn fixed_n(config: &ExperimentConfig) -> BigInt {
    config
        .n
        .clone()
        .unwrap_or_else(|| random_semiprime(config.bits.start, semiprime_seed(config.seed, config.bits.start, 0)).n)
}

/// One row per dimension; `M` is the square of the largest dimension.
pub fn run_collision_experiment(config: &ExperimentConfig) -> Result<Vec<CollisionRow>> {
    let n = fixed_n(config);
    let (lo, hi) = config.dims;
    let base_size = hi * hi;
    let base = FactorBase::new(base_size);
    (lo..=hi)
        .map(|m| {
            let params = config.collection(m, base_size);
            let point_seed = seed::derive(config.seed, &[m as u64]);
            let harvests: Vec<Result<LatticeHarvest>> = (0..config.lattices as u64)
                .into_par_iter()
                .map(|i| collect_from_lattice(&n, &params, &base, i, lattice_seed(point_seed, i)))
                .collect();
            let mut set = RelationSet::new();
            for h in harvests {
                set.absorb(h?);
            }
            let collisions = set.stats().collisions;
            let ci = proportion_ci(collisions, set.len() as u64 + collisions);
            Ok(CollisionRow {
                dimension: m,
                collision_rate: set.collision_rate(),
                ci_low: ci.low,
                ci_high: ci.high,
                lattices: config.lattices,
                unique: set.len(),
                collisions,
                n: n.to_string(),
                base_size,
                seed: point_seed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentId;

    fn small() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentId::Fig2a);
        c.dims = (6, 7);
        c.lattices = 4;
        c.bits = super::super::BitRange::single(20);
        c
    }

    #[test]
    fn one_lattice_has_no_collisions() {
        let mut c = small();
        c.lattices = 1;
        for row in run_collision_experiment(&c).unwrap() {
            assert_eq!(row.collision_rate, 0.0);
            assert_eq!(row.collisions, 0);
        }
    }

    #[test]
    fn rows_are_reproducible() {
        let c = small();
        let a = run_collision_experiment(&c).unwrap();
        assert_eq!(a, run_collision_experiment(&c).unwrap());
        assert_eq!(a.len(), 2);
        for r in &a {
            assert!(r.ci_low <= r.collision_rate && r.collision_rate <= r.ci_high);
            assert_eq!(r.base_size, 49);
        }
    }
}
