//! Measurement campaigns producing plot-ready CSV datasets.
//!
//! * `fig2a`: collision rate against lattice dimension for one fixed `N`.
//! * `fig2bc`: census sr-pairs per lattice under several dimension mappings.
//! * `fig3`: sweeps needed to reach the enumerated optimum.
//! * `fig4`: lattices needed to factor, with the two predictions.
//!
//! Every row carries the seed it was computed from, and rows are merged in a
//! fixed order, so reruns reproduce files byte for byte.

mod collision;
mod factoring;
mod mapping;
mod refinement;
pub mod stats;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::numtheory::random_prime;
use crate::pbit::{
    COLLECTION_SWEEPS_PER_DIM, DEFAULT_BETA_END, DEFAULT_BETA_START, DEFAULT_COLLECTION_BETA, REFINEMENT_SWEEPS_PER_DIM,
};
use crate::sieve::CollectionParams;
use crate::{seed, Error, Result};

pub use collision::{run_collision_experiment, CollisionRow};
pub use factoring::{
    factoring_row, recovery_sample, run_factoring_experiment, semiprime_run, FactoringRow, RecoverySample, SemiprimeRun,
};
pub use mapping::{run_mapping_experiment, MappingRow};
pub use refinement::{refinement_trial, run_refinement_experiment, screened_trials, RefinementRow, RefinementTrial};

/// Dimensions above this get a popcount-bounded census.
pub const DEFAULT_CENSUS_FULL_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Fig2a,
    Fig2bc,
    Fig3,
    Fig4,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [Self::Fig2a, Self::Fig2bc, Self::Fig3, Self::Fig4];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2a => "fig2a",
            Self::Fig2bc => "fig2bc",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown experiment {s:?}; expected fig2a, fig2bc, fig3 or fig4")))
    }
}

/// Inclusive bit-length range written `start:end` or `start:end:step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitRange {
    pub start: u64,
    pub end: u64,
    pub step: u64,
}

impl BitRange {
    pub fn new(start: u64, end: u64, step: u64) -> Self {
        Self { start, end, step }
    }

    pub fn single(bits: u64) -> Self {
        Self::new(bits, bits, 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        (self.start..=self.end).step_by(self.step.max(1) as usize)
    }
}

impl FromStr for BitRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bit range {s:?} is not start:end[:step]"));
        let parts: Vec<u64> = s
            .split(':')
            .map(|p| p.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let r = match parts[..] {
            [b] => Self::single(b),
            [a, b] => Self::new(a, b, 4),
            [a, b, c] => Self::new(a, b, c),
            _ => return Err(bad()),
        };
        if r.start < 6 || r.end < r.start || r.step == 0 {
            return Err(Error::InvalidInput(format!("bit range {s:?} must satisfy 6 <= start <= end, step > 0")));
        }
        Ok(r)
    }
}

impl fmt::Display for BitRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

/// Bit length to lattice dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mapping {
    /// `m = ceil(k * bits)` with `k = num / den`.
    Linear { num: u64, den: u64 },
    /// `m = ceil(1.5 * bits / log2(bits))`.
    Sublinear,
}

impl Mapping {
    pub const THIRD: Mapping = Mapping::Linear { num: 1, den: 3 };
    pub const HALF: Mapping = Mapping::Linear { num: 1, den: 2 };

    pub fn dimension(self, bits: u64) -> usize {
        let m = match self {
            Self::Linear { num, den } => (num * bits).div_ceil(den) as usize,
            Self::Sublinear => (1.5 * bits as f64 / (bits as f64).log2()).ceil() as usize,
        };
        m.max(2)
    }

    pub fn label(self) -> String {
        match self {
            Self::Linear { num, den } => format!("linear-{num}/{den}"),
            Self::Sublinear => "sublinear".into(),
        }
    }
}

impl FromStr for Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "sublinear" {
            return Ok(Self::Sublinear);
        }
        let k = s.strip_prefix("linear-").unwrap_or(s);
        let (a, b) = k
            .split_once('/')
            .ok_or_else(|| Error::InvalidInput(format!("mapping {s:?} is not sublinear or linear-a/b")))?;
        let parse = |x: &str| x.parse::<u64>().map_err(|_| Error::InvalidInput(format!("bad mapping {s:?}")));
        let (num, den) = (parse(a)?, parse(b)?);
        if num == 0 || den == 0 {
            return Err(Error::InvalidInput(format!("bad mapping {s:?}")));
        }
        Ok(Self::Linear { num, den })
    }
}

/// A random semiprime and its factors, `p < q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Semiprime {
    #[serde(with = "crate::serde_util::bigint")]
    pub n: BigInt,
    #[serde(with = "crate::serde_util::bigint")]
    pub p: BigInt,
    #[serde(with = "crate::serde_util::bigint")]
    pub q: BigInt,
}

/// Product of two random primes of `floor(bits/2)` and `ceil(bits/2)` bits,
/// `p != q`, redrawn until the product has exactly `bits` bits.
pub fn random_semiprime(bits: u64, seed: u64) -> Semiprime {
    assert!(bits >= 6, "semiprimes need at least 6 bits");
    let mut rng = seed::rng(seed);
    loop {
        let a = random_prime(bits / 2, &mut rng);
        let b = random_prime(bits - bits / 2, &mut rng);
        if a == b {
            continue;
        }
        let n = &a * &b;
        if n.bits() == bits {
            let (p, q) = if a < b { (a, b) } else { (b, a) };
            return Semiprime {
                n: n.into(),
                p: p.into(),
                q: q.into(),
            };
        }
    }
}

/// Seed of semiprime `index` at bit length `bits`.
pub fn semiprime_seed(seed: u64, bits: u64, index: u64) -> u64 {
    seed::derive(seed, &[seed::label::SEMIPRIME, bits, index])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub bits: BitRange,
    /// Dimension sweep for `fig2a`.
    pub dims: (usize, usize),
    /// Fixed `N` for `fig2a`; a seeded 30-bit semiprime when absent.
    #[serde(with = "opt_bigint")]
    pub n: Option<BigInt>,
    /// Lattices per data point.
    pub lattices: usize,
    /// Semiprimes per bit length for `fig4`.
    pub semiprimes: usize,
    /// Census lattices per semiprime for `fig4`.
    pub recovery_lattices: usize,
    pub mappings: Vec<Mapping>,
    pub c: u32,
    pub beta: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    pub collection_sweeps_per_dim: usize,
    pub refinement_sweeps_per_dim: usize,
    pub census_full_limit: usize,
    pub weight_bound: usize,
    pub seed: u64,
    pub paper_scale: bool,
}

mod opt_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl ExperimentConfig {
    /// Desk-scale defaults.
    pub fn new(experiment: ExperimentId) -> Self {
        let bits = match experiment {
            ExperimentId::Fig2a => BitRange::single(30),
            ExperimentId::Fig2bc => BitRange::new(20, 40, 4),
            ExperimentId::Fig3 => BitRange::new(20, 36, 4),
            ExperimentId::Fig4 => BitRange::new(20, 40, 4),
        };
        Self {
            experiment,
            bits,
            dims: (8, 14),
            n: None,
            lattices: 50,
            semiprimes: 5,
            recovery_lattices: 10,
            mappings: vec![Mapping::THIRD, Mapping::HALF, Mapping::Sublinear],
            c: crate::lattice::DEFAULT_PRECISION,
            beta: DEFAULT_COLLECTION_BETA,
            beta_start: DEFAULT_BETA_START,
            beta_end: DEFAULT_BETA_END,
            collection_sweeps_per_dim: COLLECTION_SWEEPS_PER_DIM,
            refinement_sweeps_per_dim: REFINEMENT_SWEEPS_PER_DIM,
            census_full_limit: DEFAULT_CENSUS_FULL_LIMIT,
            weight_bound: crate::oracle::DEFAULT_WEIGHT_BOUND,
            seed: 0,
            paper_scale: false,
        }
    }

    /// Published dataset sizes: 500 lattices per point, 25 semiprimes.
    pub fn with_paper_scale(mut self) -> Self {
        self.paper_scale = true;
        self.lattices = 500;
        self.semiprimes = 25;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidInput(msg.into()));
        if self.lattices == 0 {
            return fail("lattices per point must be positive");
        }
        if self.experiment == ExperimentId::Fig4 && (self.semiprimes == 0 || self.recovery_lattices == 0) {
            return fail("semiprimes and recovery lattices must be positive");
        }
        if self.dims.0 < 2 || self.dims.1 < self.dims.0 {
            return fail("dimension range must satisfy 2 <= low <= high");
        }
        if !(self.beta > 0.0 && self.beta_start > 0.0 && self.beta_end > 0.0) {
            return fail("beta values must be positive");
        }
        if self.mappings.is_empty() {
            return fail("at least one mapping is required");
        }
        Ok(())
    }

    /// Collection parameters at dimension `m` with `M = base_size`.
    pub fn collection(&self, m: usize, base_size: usize) -> CollectionParams {
        CollectionParams {
            m,
            base_size,
            c: self.c,
            beta: self.beta,
            sweeps: self.collection_sweeps_per_dim * m,
            priority_order: false,
        }
    }

    /// Census weight bound for dimension `m`: none when full enumeration is
    /// affordable.
    pub fn census_bound(&self, m: usize) -> Option<usize> {
        (m > self.census_full_limit).then_some(self.weight_bound)
    }

    /// Implementation choices the published description leaves open.
    pub fn artifact_choices(&self) -> Vec<String> {
        let mut out = vec![
            "semiprimes: uniform primes of floor(bits/2) and ceil(bits/2) bits, p != q, redrawn until N has exactly `bits` bits".to_string(),
            "refinement energy divided by the mean squared reduced-basis norm before scaling by beta".to_string(),
            format!("linear beta schedule {} -> {}", self.beta_start, self.beta_end),
        ];
        if self.mappings.contains(&Mapping::HALF) {
            out.push("second linear mapping uses k = 1/2".into());
        }
        match self.experiment {
            ExperimentId::Fig2bc => out.push("a fresh semiprime per lattice, shared across mappings".into()),
            ExperimentId::Fig4 => out.push("recovery fraction: per-lattice share of census sr-pair states visited by collection".into()),
            _ => {}
        }
        out
    }
}

/// Rows of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Collision(Vec<CollisionRow>),
    Mapping(Vec<MappingRow>),
    Refinement(Vec<RefinementRow>),
    Factoring(Vec<FactoringRow>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Self::Collision(r) => r.len(),
            Self::Mapping(r) => r.len(),
            Self::Refinement(r) => r.len(),
            Self::Factoring(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        fn write<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        match self {
            Self::Collision(r) => write(r),
            Self::Mapping(r) => write(r),
            Self::Refinement(r) => write(r),
            Self::Factoring(r) => write(r),
        }
    }

    /// Headline numbers recorded in the manifest.
    pub fn summary(&self) -> serde_json::Value {
        match self {
            Self::Collision(rows) => {
                let x: Vec<f64> = rows.iter().map(|r| r.dimension as f64).collect();
                let y: Vec<f64> = rows.iter().map(|r| r.collision_rate).collect();
                serde_json::json!({ "regression": stats::linear_regression(&x, &y) })
            }
            _ => serde_json::Value::Null,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Dataset> {
    config.validate()?;
    Ok(match config.experiment {
        ExperimentId::Fig2a => Dataset::Collision(run_collision_experiment(config)?),
        ExperimentId::Fig2bc => Dataset::Mapping(run_mapping_experiment(config)?),
        ExperimentId::Fig3 => Dataset::Refinement(run_refinement_experiment(config)?),
        ExperimentId::Fig4 => Dataset::Factoring(run_factoring_experiment(config)?),
    })
}

/// Provenance record written next to each dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub experiment: ExperimentId,
    pub crate_version: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub output_file: String,
    pub output_sha256: String,
    pub rows: usize,
    pub summary: serde_json::Value,
    pub artifact_choices: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WrittenExperiment {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub dataset: Dataset,
}

/// Run `config` and write `<id>.csv` and `<id>.manifest.json` into `dir`.
pub fn write_experiment(config: &ExperimentConfig, dir: &Path) -> Result<WrittenExperiment> {
    let dataset = run_experiment(config)?;
    fs::create_dir_all(dir)?;
    let csv = dataset.to_csv()?;
    let name = config.experiment.name();
    let csv_path = dir.join(format!("{name}.csv"));
    fs::write(&csv_path, &csv)?;
    let manifest = Manifest {
        schema_version: 1,
        experiment: config.experiment,
        crate_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        config_sha256: sha256_hex(&serde_json::to_vec(config)?),
        output_file: format!("{name}.csv"),
        output_sha256: sha256_hex(&csv),
        rows: dataset.len(),
        summary: dataset.summary(),
        artifact_choices: config.artifact_choices(),
    };
    let manifest_path = dir.join(format!("{name}.manifest.json"));
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(WrittenExperiment {
        csv_path,
        manifest_path,
        dataset,
    })
}
