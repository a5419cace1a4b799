//! `pbit-factor` command line.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid input, 3 lattice
//! budget exhausted.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::json;

use config::{resolve, resolve_opt, ConfigFile};
use pbit_factor::algebra::{factor, FactorParams, DEFAULT_TAU_TRIALS};
use pbit_factor::experiments::{write_experiment, BitRange, ExperimentConfig, ExperimentId, Mapping};
use pbit_factor::lattice::{PrimeLattice, DEFAULT_DELTA, DEFAULT_PRECISION};
use pbit_factor::oracle::{enumerate_neighborhood, enumerate_sr_pairs, write_census_csv, FULL_ENUMERATION_LIMIT};
use pbit_factor::pbit::{
    improvement_percent, run_refinement, write_trace_csv, BitState, EnergyUnit, RefinementProblem, Schedule, StopCriterion,
    UpdateMode, DEFAULT_BETA_END, DEFAULT_BETA_START, DEFAULT_COLLECTION_BETA, REFINEMENT_SWEEPS_PER_DIM,
};
use pbit_factor::sieve::{lattice_seed, write_relations_jsonl, Campaign, CampaignParams, CollectionParams};
use pbit_factor::numtheory::FactorBase;
use pbit_factor::{seed, Error, ExactInstance, Result};

#[derive(Parser, Debug)]
#[command(name = "pbit-factor", version, about = "Lattice factoring with a simulated p-bit refinement engine")]
struct Cli {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true, env = "PBIT_SEED")]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "PBIT_WORKERS")]
    workers: Option<usize>,
    /// Output directory for files.
    #[arg(long, global = true, env = "PBIT_OUT")]
    out: Option<PathBuf>,
    /// `key = value` file with defaults; flags take precedence.
    #[arg(long, global = true, env = "PBIT_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Factor a composite integer.
    Factor(FactorArgs),
    /// Refine Babai's approximation on one lattice.
    Refine(RefineArgs),
    /// Enumerate a lattice neighborhood and census its sr-pairs.
    Enumerate(EnumerateArgs),
    /// Build a prime lattice and print it as JSON.
    Lattice(LatticeArgs),
    /// Collect sr-pairs into a JSON-lines file.
    Collect(CollectArgs),
    /// Run a measurement campaign and write CSV plus a manifest.
    Experiment(ExperimentArgs),
}

/// Lattice and collection parameters shared by several commands.
#[derive(Args, Debug, Clone)]
struct LatticeOpts {
    /// Lattice dimension (default ceil(bits / 3)).
    #[arg(long)]
    m: Option<usize>,
    /// Factor base size (default m^2).
    #[arg(long = "base-size", short = 'M')]
    base_size: Option<usize>,
    /// Precision of the logarithm row.
    #[arg(long)]
    c: Option<u32>,
}

struct ResolvedLattice {
    m: usize,
    base_size: usize,
    c: u32,
}

impl LatticeOpts {
    fn resolve(&self, n: &BigInt, cfg: &ConfigFile) -> Result<ResolvedLattice> {
        let m = resolve(self.m, cfg, "m", n.bits().div_ceil(3).max(2) as usize)?;
        let base_size = resolve(self.base_size, cfg, "base-size", m * m)?;
        let c = resolve(self.c, cfg, "c", DEFAULT_PRECISION)?;
        if m == 0 || base_size < m {
            return Err(Error::InvalidInput(format!("need 1 <= m <= M, got m = {m}, M = {base_size}")));
        }
        Ok(ResolvedLattice { m, base_size, c })
    }
}

#[derive(Args, Debug)]
struct FactorArgs {
    /// Integer to factor, in decimal.
    n: String,
    #[command(flatten)]
    lattice: LatticeOpts,
    /// Collection inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
    /// Collection sweeps per lattice (default 20 m).
    #[arg(long)]
    sweeps: Option<usize>,
    /// Lattices before giving up (default 200 (M + 2)).
    #[arg(long)]
    budget: Option<usize>,
    /// Nullspace combinations tried per round.
    #[arg(long = "tau-trials")]
    tau_trials: Option<usize>,
    /// No desk-scale lattice budget.
    #[arg(long = "paper-scale")]
    paper_scale: bool,
    /// Print the run report as JSON.
    #[arg(long)]
    json: bool,
}

/// Which lattice to work on.
#[derive(Args, Debug, Clone)]
struct InstanceOpts {
    /// Integer whose prime lattice is built.
    #[arg(long, short = 'n', required_unless_present = "lattice_file")]
    n: Option<String>,
    /// Lattice JSON written by the `lattice` command.
    #[arg(long = "lattice-file")]
    lattice_file: Option<PathBuf>,
    /// Lattice index within the seed's stream, matching collection runs.
    #[arg(long, default_value_t = 0)]
    index: u64,
    #[command(flatten)]
    lattice: LatticeOpts,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UnitArg {
    Raw,
    MeanNorm,
}

#[derive(Args, Debug)]
struct RefineArgs {
    #[command(flatten)]
    instance: InstanceOpts,
    /// Sweep budget (default 50 m).
    #[arg(long)]
    sweeps: Option<usize>,
    /// First beta of the linear schedule (default 0.05).
    #[arg(long = "beta-start")]
    beta_start: Option<f64>,
    /// Last beta of the linear schedule (default 5.0).
    #[arg(long = "beta-end")]
    beta_end: Option<f64>,
    /// Constant beta instead of the linear schedule.
    #[arg(long)]
    beta: Option<f64>,
    /// Energy unit used for biases.
    #[arg(long, value_enum)]
    unit: Option<UnitArg>,
    /// Random single-bit selection instead of sequential sweeps.
    #[arg(long = "random-order")]
    random_order: bool,
    /// Compare with the enumerated optimum.
    #[arg(long)]
    oracle: bool,
    /// Stop once the enumerated optimum is reached (implies --oracle).
    #[arg(long = "stop-at-optimum")]
    stop_at_optimum: bool,
    /// Write the per-sweep trace as CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print the result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    instance: InstanceOpts,
    /// Only states with at most this many bits set.
    #[arg(long = "weight-bound")]
    weight_bound: Option<usize>,
    /// Keep every state, not only sr-pairs.
    #[arg(long)]
    all: bool,
    /// CSV file name inside --out (default stdout).
    #[arg(long)]
    file: Option<String>,
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[command(flatten)]
    instance: InstanceOpts,
    /// Include the reduced basis, Babai's point and directions.
    #[arg(long)]
    reduced: bool,
}

#[derive(Args, Debug)]
struct CollectArgs {
    /// Integer whose relations are collected.
    n: String,
    #[command(flatten)]
    lattice: LatticeOpts,
    /// Collection inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
    /// Collection sweeps per lattice (default 20 m).
    #[arg(long)]
    sweeps: Option<usize>,
    /// Relations wanted (default M + 2).
    #[arg(long)]
    target: Option<usize>,
    /// Lattices before giving up (default 200 (M + 2)).
    #[arg(long)]
    budget: Option<usize>,
    /// JSON-lines file name inside --out (default stdout).
    #[arg(long)]
    file: Option<String>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// fig2a, fig2bc, fig3 or fig4.
    experiment: String,
    /// Bit lengths as start:end[:step].
    #[arg(long)]
    bits: Option<String>,
    /// Dimension range for fig2a, low:high.
    #[arg(long)]
    dims: Option<String>,
    /// Fixed N for fig2a.
    #[arg(long, short = 'n')]
    n: Option<String>,
    /// Lattices per data point.
    #[arg(long)]
    lattices: Option<usize>,
    /// Semiprimes per bit length (fig4).
    #[arg(long)]
    semiprimes: Option<usize>,
    /// Census lattices per semiprime (fig4).
    #[arg(long = "recovery-lattices")]
    recovery_lattices: Option<usize>,
    /// Dimension mappings, e.g. linear-1/3, linear-1/2, sublinear.
    #[arg(long, value_delimiter = ',')]
    mapping: Vec<String>,
    /// Collection inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
    /// Refinement schedule start (fig3).
    #[arg(long = "beta-start")]
    beta_start: Option<f64>,
    /// Refinement schedule end (fig3).
    #[arg(long = "beta-end")]
    beta_end: Option<f64>,
    /// Published dataset sizes (500 lattices, 25 semiprimes).
    #[arg(long = "paper-scale")]
    paper_scale: bool,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_)
            | Error::Prime(_)
            | Error::PerfectPower { .. }
            | Error::EnumerationTooLarge(_)
            | Error::Overflow(_)
            | Error::PointNotInLattice
            | Error::DimensionMismatch { .. }
            | Error::Json(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CmdResult = std::result::Result<(), Failure>;

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    cfg: ConfigFile,
}

impl Ctx {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Write to `--out/<name>` when a name is given, else to stdout.
    fn sink(&self, name: Option<&str>) -> io::Result<(Box<dyn Write>, Option<PathBuf>)> {
        match name {
            Some(name) => {
                let dir = self.out_dir();
                fs::create_dir_all(&dir)?;
                let path = dir.join(name);
                Ok((Box::new(io::BufWriter::new(fs::File::create(&path)?)), Some(path)))
            }
            None => Ok((Box::new(io::stdout().lock()), None)),
        }
    }
}

fn parse_n(s: &str) -> Result<BigInt> {
    let n: BigInt = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{s:?} is not a decimal integer")))?;
    if n.sign() != num_bigint::Sign::Plus {
        return Err(Error::InvalidInput(format!("N must be positive, got {n}")));
    }
    Ok(n)
}

fn build_instance(opts: &InstanceOpts, ctx: &Ctx) -> Result<(ExactInstance, ResolvedLattice)> {
    if let Some(path) = &opts.lattice_file {
        let lattice = PrimeLattice::from_json(&fs::read_to_string(path)?)?;
        let resolved = ResolvedLattice {
            m: lattice.m,
            base_size: resolve(opts.lattice.base_size, &ctx.cfg, "base-size", lattice.m * lattice.m)?,
            c: lattice.c,
        };
        return Ok((ExactInstance::from_lattice(lattice, DEFAULT_DELTA)?, resolved));
    }
    let n = parse_n(opts.n.as_deref().unwrap_or_default())?;
    let r = opts.lattice.resolve(&n, &ctx.cfg)?;
    let ls = lattice_seed(ctx.seed, opts.index);
    let inst = ExactInstance::build(&n, r.m, r.c, seed::derive(ls, &[seed::label::LATTICE]))?;
    Ok((inst, r))
}

fn cmd_factor(a: &FactorArgs, ctx: &Ctx) -> CmdResult {
    let n = parse_n(&a.n)?;
    let r = a.lattice.resolve(&n, &ctx.cfg)?;
    let mut collection = CollectionParams::for_dimension(r.m);
    collection.base_size = r.base_size;
    collection.c = r.c;
    collection.beta = resolve(a.beta, &ctx.cfg, "beta", DEFAULT_COLLECTION_BETA)?;
    collection.sweeps = resolve(a.sweeps, &ctx.cfg, "sweeps", collection.sweeps)?;
    let mut campaign = CampaignParams::new(collection, ctx.seed);
    campaign.lattice_budget = resolve(a.budget, &ctx.cfg, "budget", campaign.lattice_budget)?;
    if a.paper_scale || ctx.cfg.flag("paper-scale")? {
        campaign.lattice_budget = usize::MAX;
    }
    let params = FactorParams {
        campaign,
        tau_trials: resolve(a.tau_trials, &ctx.cfg, "tau-trials", DEFAULT_TAU_TRIALS)?,
    };
    let report = factor(&n, &params)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    } else if let Some([p, q]) = &report.factors {
        println!("p={p} q={q}");
        println!(
            "method={} lattices={} relations={} collision_rate={:.4} tau_trials={} elapsed={:.3}s",
            serde_json::to_value(report.method).map_err(Error::from)?.as_str().unwrap_or_default(),
            report.lattices_consumed,
            report.relations_used,
            report.collision_rate,
            report.tau_trials,
            report.elapsed
        );
    }
    if report.factors.is_none() {
        return Err(Failure {
            code: 3,
            message: format!(
                "lattice budget exhausted after {} lattices with {} relations",
                report.lattices_consumed, report.relations_used
            ),
        });
    }
    Ok(())
}

fn cmd_refine(a: &RefineArgs, ctx: &Ctx) -> CmdResult {
    let (inst, r) = build_instance(&a.instance, ctx)?;
    let unit = match a.unit {
        Some(UnitArg::Raw) => EnergyUnit::Raw,
        Some(UnitArg::MeanNorm) => EnergyUnit::MeanBasisNormSq,
        None => match ctx.cfg.raw("unit") {
            Some("raw") => EnergyUnit::Raw,
            _ => EnergyUnit::default(),
        },
    };
    let problem = RefinementProblem::from_instance(&inst)?.with_energy_unit(unit);
    let sweeps = resolve(a.sweeps, &ctx.cfg, "sweeps", REFINEMENT_SWEEPS_PER_DIM * r.m)?;
    let schedule = match resolve_opt(a.beta, &ctx.cfg, "beta")? {
        Some(beta) => Schedule::constant(beta, sweeps),
        None => Schedule::linear(
            resolve(a.beta_start, &ctx.cfg, "beta-start", DEFAULT_BETA_START)?,
            resolve(a.beta_end, &ctx.cfg, "beta-end", DEFAULT_BETA_END)?,
            sweeps,
        ),
    };
    let use_oracle = a.oracle || a.stop_at_optimum;
    let optimum = if use_oracle {
        let bound = (r.m > FULL_ENUMERATION_LIMIT).then_some(pbit_factor::oracle::DEFAULT_WEIGHT_BOUND);
        Some(enumerate_neighborhood(&problem, bound)?)
    } else {
        None
    };
    let stop = StopCriterion {
        target_energy: optimum.as_ref().filter(|_| a.stop_at_optimum).map(|o| o.best_distance_sq),
    };
    let mode = if a.random_order { UpdateMode::RandomNeighborhood } else { UpdateMode::Sweep };
    let sampler = seed::derive(lattice_seed(ctx.seed, a.instance.index), &[seed::label::SAMPLER]);
    let out = run_refinement(&problem, &schedule, stop, mode, sampler)?;
    if let Some(path) = &a.trace {
        write_trace_csv(&out.trace, fs::File::create(path)?)?;
    }
    let initial = problem.energy(&BitState::zeros(r.m));
    let verdict = optimum.as_ref().map(|o| if out.best_energy <= o.best_distance_sq { "MATCH" } else { "MISS" });
    let report = json!({
        "N": inst.lattice.n.to_string(),
        "m": r.m,
        "sweeps": out.sweeps_run,
        "schedule": schedule,
        "babai_distance_sq": initial.to_string(),
        "babai_distance": (initial as f64).sqrt(),
        "best_distance_sq": out.best_energy.to_string(),
        "best_distance": (out.best_energy as f64).sqrt(),
        "best_state": out.best_state.to_string(),
        "improvement_percent": improvement_percent(initial, out.best_energy),
        "sweeps_to_best": out.first_hit_sweep,
        "optimum_distance_sq": optimum.as_ref().map(|o| o.best_distance_sq.to_string()),
        "optimum_state": optimum.as_ref().map(|o| o.best_state.to_string()),
        "verdict": verdict,
    });
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
        return Ok(());
    }
    println!("babai distance   {:.4} (squared {initial})", (initial as f64).sqrt());
    println!("best distance    {:.4} (squared {})", (out.best_energy as f64).sqrt(), out.best_energy);
    println!("best state       {}", out.best_state);
    println!("improvement      {:.4}%", improvement_percent(initial, out.best_energy));
    println!("sweeps to best   {} of {}", out.first_hit_sweep, out.sweeps_run);
    if let (Some(o), Some(v)) = (&optimum, verdict) {
        println!("oracle optimum   {:.4} (squared {}) at {}", (o.best_distance_sq as f64).sqrt(), o.best_distance_sq, o.best_state);
        println!("{v}");
    }
    Ok(())
}

fn cmd_enumerate(a: &EnumerateArgs, ctx: &Ctx) -> CmdResult {
    let (inst, r) = build_instance(&a.instance, ctx)?;
    let problem = RefinementProblem::from_instance(&inst)?;
    let base = FactorBase::new(r.base_size);
    let bound = resolve_opt(a.weight_bound, &ctx.cfg, "weight-bound")?;
    let census = enumerate_sr_pairs(&inst, &problem, &base, bound, a.all)?;
    let (sink, path) = ctx.sink(a.file.as_deref())?;
    write_census_csv(&census.rows(), sink)?;
    eprintln!(
        "{} states listed, {} sr-pairs{}",
        census.entries.len(),
        census.sr_pair_count(),
        path.map(|p| format!(", written to {}", p.display())).unwrap_or_default()
    );
    Ok(())
}

fn cmd_lattice(a: &LatticeArgs, ctx: &Ctx) -> CmdResult {
    let (inst, _) = build_instance(&a.instance, ctx)?;
    let text = if a.reduced {
        let lattice: serde_json::Value = serde_json::from_str(&inst.lattice.to_json()?).map_err(Error::from)?;
        let strs = |v: &[BigInt]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        serde_json::to_string_pretty(&json!({
            "lattice": lattice,
            "reduced_basis": inst.reduced.vectors.iter().map(|d| strs(d)).collect::<Vec<_>>(),
            "b_op": strs(&inst.babai.b_op),
            "roundings": strs(&inst.babai.roundings),
            "directions": inst.babai.directions,
        }))
        .map_err(Error::from)?
    } else {
        inst.lattice.to_json()?
    };
    println!("{text}");
    Ok(())
}

fn cmd_collect(a: &CollectArgs, ctx: &Ctx) -> CmdResult {
    let n = parse_n(&a.n)?;
    let r = a.lattice.resolve(&n, &ctx.cfg)?;
    let mut collection = CollectionParams::for_dimension(r.m);
    collection.base_size = r.base_size;
    collection.c = r.c;
    collection.beta = resolve(a.beta, &ctx.cfg, "beta", DEFAULT_COLLECTION_BETA)?;
    collection.sweeps = resolve(a.sweeps, &ctx.cfg, "sweeps", collection.sweeps)?;
    let mut params = CampaignParams::new(collection, ctx.seed);
    params.target_relations = resolve(a.target, &ctx.cfg, "target", params.target_relations)?;
    params.lattice_budget = resolve(a.budget, &ctx.cfg, "budget", params.lattice_budget)?;
    let mut campaign = Campaign::new(&n, params)?;
    let complete = campaign.run()?;
    let (sink, path) = ctx.sink(a.file.as_deref())?;
    write_relations_jsonl(campaign.relations().relations(), sink)?;
    let stats = campaign.stats();
    eprintln!(
        "{} relations from {} lattices, collision rate {:.4}{}",
        stats.relations,
        stats.lattices_consumed,
        stats.collision_rate,
        path.map(|p| format!(", written to {}", p.display())).unwrap_or_default()
    );
    if !complete {
        return Err(Failure {
            code: 3,
            message: format!("lattice budget exhausted with {} of {} relations", stats.relations, params.target_relations),
        });
    }
    Ok(())
}

fn parse_pair(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("{s:?} is not low:high"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    Ok((a, b))
}

fn cmd_experiment(a: &ExperimentArgs, ctx: &Ctx) -> CmdResult {
    let id: ExperimentId = a.experiment.parse()?;
    let cfg = &ctx.cfg;
    let mut c = ExperimentConfig::new(id);
    if a.paper_scale || cfg.flag("paper-scale")? {
        c = c.with_paper_scale();
    }
    c.seed = ctx.seed;
    if let Some(b) = resolve_opt(a.bits.clone(), cfg, "bits")? {
        c.bits = b.parse::<BitRange>()?;
    }
    if let Some(d) = resolve_opt(a.dims.clone(), cfg, "dims")? {
        c.dims = parse_pair(&d)?;
    }
    if let Some(n) = resolve_opt(a.n.clone(), cfg, "n")? {
        c.n = Some(parse_n(&n)?);
    }
    c.lattices = resolve(a.lattices, cfg, "lattices", c.lattices)?;
    c.semiprimes = resolve(a.semiprimes, cfg, "semiprimes", c.semiprimes)?;
    c.recovery_lattices = resolve(a.recovery_lattices, cfg, "recovery-lattices", c.recovery_lattices)?;
    c.beta = resolve(a.beta, cfg, "beta", c.beta)?;
    c.beta_start = resolve(a.beta_start, cfg, "beta-start", c.beta_start)?;
    c.beta_end = resolve(a.beta_end, cfg, "beta-end", c.beta_end)?;
    let mappings: Vec<String> = if a.mapping.is_empty() {
        cfg.raw("mapping").map(|m| m.split(',').map(str::to_string).collect()).unwrap_or_default()
    } else {
        a.mapping.clone()
    };
    if !mappings.is_empty() {
        c.mappings = mappings.iter().map(|m| m.trim().parse::<Mapping>()).collect::<Result<_>>()?;
    }
    let written = write_experiment(&c, &ctx.out_dir())?;
    println!("{} rows written to {}", written.dataset.len(), written.csv_path.display());
    println!("manifest {}", written.manifest_path.display());
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let workers = resolve_opt(cli.workers, &cfg, "workers")?;
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidInput("workers must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    let ctx = Ctx {
        seed: resolve(cli.seed, &cfg, "seed", 0)?,
        out: resolve_opt(cli.out.clone(), &cfg, "out")?,
        cfg,
    };
    match &cli.command {
        Command::Factor(a) => cmd_factor(a, &ctx),
        Command::Refine(a) => cmd_refine(a, &ctx),
        Command::Enumerate(a) => cmd_enumerate(a, &ctx),
        Command::Lattice(a) => cmd_lattice(a, &ctx),
        Command::Collect(a) => cmd_collect(a, &ctx),
        Command::Experiment(a) => cmd_experiment(a, &ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
