//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a bound or identity check
//! fails, 2 for usage, parse and I/O errors.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::algorithm::{exact_analysis, run_repeat_until_success, RunConfig, StopRule};
use crate::baselines::{grover_simulate, hill_climb, optimal_iterations, random_search};
use crate::costfn::{CostInstance, Generator, GeneratorKind};
use crate::encoding::{AmplitudeEncoder, JunkPolicy};
use crate::error::{Error, Result};
use crate::statevec::rng_from_seed;
use crate::sweep::{sweep_points, DEFAULT_MAX_DATA_QUBITS};
use crate::verify::{verify, Verification};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "postselect",
    version,
    about = "Post-selection search simulator and bound checker"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a cost instance file.
    Generate(GenerateArgs),
    /// Check the success-probability bounds on an instance or a random sweep.
    Verify(VerifyArgs),
    /// Compare search strategies on an instance.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report destination; records go to stdout and the summary to stderr
    /// when omitted.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Jsonl)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = GeneratorKind::from_str)]
    pub kind: GeneratorKind,
    /// Data qubits (uniform_random, hamming_structured).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Partition weights (number_partition).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub weights: Vec<f64>,
    /// Explicit cost table (explicit).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub costs: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub low: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub high: f64,
    /// Single-bit-flip cost bound (hamming_structured).
    #[arg(long, default_value_t = 1.0)]
    pub lipschitz: f64,
    /// Instance path; `.json` selects the structured format.
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance file to check.
    #[arg(required_unless_present = "sweep", conflicts_with = "sweep")]
    pub instance: Option<PathBuf>,
    /// Check this many generated configurations instead of a file. The sweep
    /// picks its own encoders, junk policies and thresholds.
    #[arg(long)]
    pub sweep: Option<usize>,
    /// Largest data register in a sweep.
    #[arg(long, default_value_t = DEFAULT_MAX_DATA_QUBITS)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "c-tol", allow_negative_numbers = true)]
    pub c_tol: Option<f64>,
    #[arg(long, default_value = "cospow:1", value_parser = AmplitudeEncoder::from_str)]
    pub encoder: AmplitudeEncoder,
    #[arg(long, default_value = "concentrated", value_parser = JunkPolicy::from_str)]
    pub junk: JunkPolicy,
    #[arg(long = "n-anc", default_value_t = 1)]
    pub n_anc: usize,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub instance: PathBuf,
    #[arg(long = "c-tol", allow_negative_numbers = true)]
    pub c_tol: f64,
    /// Comma-separated: random, hillclimb, grover:<t|auto>, postselect.
    #[arg(long, required = true, value_delimiter = ',', value_parser = Strategy::from_str)]
    pub strategy: Vec<Strategy>,
    /// First seed of the seed set.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds, one run each.
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    /// Per-run cap: draws (random), restarts (hillclimb), preparations
    /// (postselect).
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    #[arg(long, default_value = "cospow:1", value_parser = AmplitudeEncoder::from_str)]
    pub encoder: AmplitudeEncoder,
    #[arg(long, default_value = "concentrated", value_parser = JunkPolicy::from_str)]
    pub junk: JunkPolicy,
    #[arg(long = "n-anc", default_value_t = 1)]
    pub n_anc: usize,
    #[command(flatten)]
    pub report: ReportArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroverIterations {
    Auto,
    Fixed(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Random,
    HillClimb,
    Grover(GroverIterations),
    PostSelect,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Random => f.write_str("random"),
            Strategy::HillClimb => f.write_str("hillclimb"),
            Strategy::Grover(GroverIterations::Auto) => f.write_str("grover:auto"),
            Strategy::Grover(GroverIterations::Fixed(t)) => write!(f, "grover:{t}"),
            Strategy::PostSelect => f.write_str("postselect"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "random" => Ok(Strategy::Random),
            "hillclimb" => Ok(Strategy::HillClimb),
            "postselect" => Ok(Strategy::PostSelect),
            "grover:auto" => Ok(Strategy::Grover(GroverIterations::Auto)),
            other => match other.strip_prefix("grover:").map(str::parse::<u64>) {
                Some(Ok(t)) => Ok(Strategy::Grover(GroverIterations::Fixed(t))),
                _ => Err(Error::config(format!(
                    "unknown strategy `{other}` (expected random, hillclimb, grover:<t|auto>, postselect)"
                ))),
            },
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Compare(args) => cmd_compare(&args),
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let need_n = || {
        args.n
            .ok_or_else(|| Error::config(format!("--n is required for {}", args.kind)))
    };
    let generator = match args.kind {
        GeneratorKind::Explicit => Generator::Explicit {
            costs: args.costs.clone(),
        },
        GeneratorKind::UniformRandom => Generator::UniformRandom {
            n_data: need_n()?,
            low: args.low,
            high: args.high,
        },
        GeneratorKind::NumberPartition => Generator::NumberPartition {
            weights: args.weights.clone(),
        },
        GeneratorKind::HammingStructured => Generator::HammingStructured {
            n_data: need_n()?,
            lipschitz: args.lipschitz,
        },
    };
    let instance = generator.generate(args.seed)?;
    instance.save(&args.output)?;
    let (k_min, c_min) = instance.min_cost();
    println!(
        "wrote {} ({}, n_data={}, N={}, seed={}, min cost {} at {}, max cost {})",
        args.output.display(),
        args.kind,
        instance.n_data(),
        instance.len(),
        args.seed,
        c_min,
        k_min,
        instance.c_max()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct MetaRecord<'a> {
    record: &'static str,
    command: &'a str,
    seed: u64,
    version: &'static str,
    timestamp: u64,
}

/// Line-delimited report sink.
pub struct ReportWriter {
    format: ReportFormat,
    jsonl: Option<Box<dyn Write>>,
    csv: Option<csv::Writer<Box<dyn Write>>>,
    to_stdout: bool,
}

impl ReportWriter {
    pub fn open(args: &ReportArgs) -> Result<Self> {
        let (sink, to_stdout): (Box<dyn Write>, bool) = match &args.output {
            Some(path) => (Box::new(BufWriter::new(File::create(path)?)), false),
            None => (Box::new(io::stdout()), true),
        };
        Ok(match args.format {
            ReportFormat::Jsonl => Self {
                format: args.format,
                jsonl: Some(sink),
                csv: None,
                to_stdout,
            },
            ReportFormat::Csv => Self {
                format: args.format,
                jsonl: None,
                csv: Some(csv::Writer::from_writer(sink)),
                to_stdout,
            },
        })
    }

    /// Writes the run metadata line. CSV reports have no metadata row.
    pub fn meta(&mut self, command: &str, seed: u64) -> Result<()> {
        if let Some(out) = &mut self.jsonl {
            let timestamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let meta = MetaRecord {
                record: "meta",
                command,
                seed,
                version: env!("CARGO_PKG_VERSION"),
                timestamp,
            };
            serde_json::to_writer(&mut *out, &meta)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn record<R: Serialize>(&mut self, record: &R) -> Result<()> {
        match self.format {
            ReportFormat::Jsonl => {
                let out = self.jsonl.as_mut().expect("jsonl sink");
                serde_json::to_writer(&mut *out, record)?;
                out.write_all(b"\n")?;
            }
            ReportFormat::Csv => self.csv.as_mut().expect("csv sink").serialize(record)?,
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(out) = &mut self.jsonl {
            out.flush()?;
        }
        if let Some(w) = &mut self.csv {
            w.flush()?;
        }
        Ok(())
    }

    /// Summary goes to stdout unless the records already occupy it.
    fn summary(&self) -> Box<dyn Write> {
        if self.to_stdout {
            Box::new(io::stderr())
        } else {
            Box::new(io::stdout())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyRecord {
    pub record: &'static str,
    pub index: usize,
    pub source: String,
    pub instance_seed: Option<u64>,
    pub n_data: usize,
    pub n_anc: usize,
    pub encoder: String,
    pub junk: String,
    pub c_tol: f64,
    pub m: usize,
    pub n: usize,
    pub p_first: f64,
    pub p_cond: Option<f64>,
    pub p_joint: f64,
    pub bound: f64,
    pub max_per_state_product: f64,
    pub per_state_ceiling: f64,
    pub chain_direct: f64,
    pub chain_via_acceptance: Option<f64>,
    pub chain_via_cost: Option<f64>,
    pub p_accept_given_low: Option<f64>,
    pub tv_distance: f64,
    pub pass: bool,
    pub failed: String,
}

impl VerifyRecord {
    fn new(
        index: usize,
        source: String,
        instance: &CostInstance,
        config: &RunConfig,
        v: &Verification,
    ) -> Self {
        Self {
            record: "verify",
            index,
            source,
            instance_seed: instance.provenance().seed,
            n_data: instance.n_data(),
            n_anc: config.n_anc,
            encoder: config.encoder.to_string(),
            junk: config.junk.to_string(),
            c_tol: config.c_tol,
            m: v.analysis.m,
            n: v.analysis.n,
            p_first: v.analysis.p_first,
            p_cond: v.analysis.p_cond,
            p_joint: v.analysis.p_joint,
            bound: v.analysis.bound,
            max_per_state_product: v.analysis.max_per_state_product(),
            per_state_ceiling: v.analysis.per_state_ceiling(),
            chain_direct: v.chain.direct,
            chain_via_acceptance: v.chain.via_acceptance,
            chain_via_cost: v.chain.via_cost,
            p_accept_given_low: v.chain.p_accept_given_low,
            tv_distance: v.tv_distance,
            pass: v.checks.all(),
            failed: v.checks.failures().join("+"),
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.12}"))
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let mut cases = Vec::new();
    let command;
    match (&args.instance, args.sweep) {
        (Some(path), None) => {
            command = "verify";
            let instance = load_instance(path)?;
            let c_tol = args
                .c_tol
                .ok_or_else(|| Error::config("--c-tol is required when verifying an instance file"))?;
            let config = RunConfig::new(c_tol, args.encoder)
                .with_junk(args.junk)
                .with_ancillas(args.n_anc);
            cases.push((path.display().to_string(), instance, config));
        }
        (None, Some(count)) => {
            command = "verify --sweep";
            for point in sweep_points(count, args.seed, args.n)? {
                let (instance, config) = point.build()?;
                cases.push((format!("sweep:{}", point.kind), instance, config));
            }
        }
        _ => return Err(Error::config("give either an instance file or --sweep <count>")),
    }

    let mut report = ReportWriter::open(&args.report)?;
    report.meta(command, args.seed)?;
    let mut failures = Vec::new();
    let mut records = Vec::with_capacity(cases.len());
    for (index, (source, instance, config)) in cases.iter().enumerate() {
        let v = verify(instance, config)?;
        let record = VerifyRecord::new(index, source.clone(), instance, config, &v);
        report.record(&record)?;
        if !record.pass {
            failures.push(index);
        }
        records.push(record);
    }

    let mut out = report.summary();
    report.finish()?;
    if let [r] = records.as_slice() {
        writeln!(out, "instance      {}", r.source)?;
        writeln!(
            out,
            "encoder       {} (junk {}, n_anc {})",
            r.encoder, r.junk, r.n_anc
        )?;
        writeln!(out, "c_tol         {}  (M = {}, N = {})", r.c_tol, r.m, r.n)?;
        writeln!(out, "p_first       {:.12}", r.p_first)?;
        writeln!(out, "p_cond        {}", fmt_opt(r.p_cond))?;
        writeln!(out, "p_joint       {:.12}", r.p_joint)?;
        writeln!(out, "M/N           {:.12}", r.bound)?;
        writeln!(
            out,
            "max p(k & 0)  {:.12}  (1/N = {:.12})",
            r.max_per_state_product, r.per_state_ceiling
        )?;
        writeln!(
            out,
            "chain         {:.12} / {} / {}",
            r.chain_direct,
            fmt_opt(r.chain_via_acceptance),
            fmt_opt(r.chain_via_cost)
        )?;
        writeln!(out, "TV distance   {:e}", r.tv_distance)?;
    } else {
        let worst_gap = records
            .iter()
            .map(|r| r.p_joint - r.bound)
            .fold(f64::NEG_INFINITY, f64::max);
        let worst_tv = records.iter().map(|r| r.tv_distance).fold(0.0, f64::max);
        writeln!(out, "configurations  {}", records.len())?;
        writeln!(out, "passed          {}", records.len() - failures.len())?;
        writeln!(out, "max p_joint-M/N {worst_gap:e}")?;
        writeln!(out, "max TV distance {worst_tv:e}")?;
    }
    for &i in &failures {
        let r = &records[i];
        eprintln!(
            "CHECK FAILED [{}]: index {} source {} seed {:?} n_data {} n_anc {} encoder {} junk {} c_tol {} p_joint {} bound {}",
            r.failed, r.index, r.source, r.instance_seed, r.n_data, r.n_anc, r.encoder, r.junk, r.c_tol, r.p_joint, r.bound
        );
    }
    writeln!(
        out,
        "{}",
        if failures.is_empty() {
            "all checks passed"
        } else {
            "CHECKS FAILED"
        }
    )?;
    Ok(if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn load_instance(path: &Path) -> Result<CostInstance> {
    CostInstance::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

#[derive(Debug, Serialize)]
pub struct CompareRecord {
    pub record: &'static str,
    pub strategy: String,
    pub source: String,
    pub c_tol: f64,
    pub encoder: String,
    pub junk: String,
    pub n_anc: usize,
    pub seed: u64,
    pub seeds: u64,
    pub budget: u64,
    pub n: usize,
    pub m: usize,
    pub hits: u64,
    pub hit_rate: f64,
    /// Mean cost evaluations (or preparations) to the first hit over
    /// hitting runs.
    pub mean_trials_to_hit: Option<f64>,
    /// Exact expectation of the same quantity when known.
    pub expected_trials_to_hit: Option<f64>,
    /// Exact per-attempt success probability when known.
    pub success_probability: Option<f64>,
    /// M/N, the per-draw probability of uniform sampling.
    pub bound: f64,
    pub grover_iterations: Option<u64>,
}

pub fn cmd_compare(args: &CompareArgs) -> Result<i32> {
    if args.strategy.is_empty() {
        return Err(Error::config("at least one strategy is required"));
    }
    if args.seeds == 0 || args.budget == 0 {
        return Err(Error::config("--seeds and --budget must be at least 1"));
    }
    let instance = load_instance(&args.instance)?;
    let n = instance.len();
    let m = instance.count_below(args.c_tol);
    let bound = m as f64 / n as f64;
    let seeds = args.seed..args.seed + args.seeds;

    let mut report = ReportWriter::open(&args.report)?;
    report.meta("compare", args.seed)?;
    let mut records = Vec::new();
    let mut violated = false;

    for &strategy in &args.strategy {
        let mut record = CompareRecord {
            record: "compare",
            strategy: strategy.to_string(),
            source: args.instance.display().to_string(),
            c_tol: args.c_tol,
            encoder: args.encoder.to_string(),
            junk: args.junk.to_string(),
            n_anc: args.n_anc,
            seed: args.seed,
            seeds: args.seeds,
            budget: args.budget,
            n,
            m,
            hits: 0,
            hit_rate: 0.0,
            mean_trials_to_hit: None,
            expected_trials_to_hit: None,
            success_probability: None,
            bound,
            grover_iterations: None,
        };
        let mut hit_trials = Vec::new();
        match strategy {
            Strategy::Random => {
                for s in seeds.clone() {
                    let r = random_search(&instance, args.c_tol, s, args.budget)?;
                    if r.hit {
                        hit_trials.push(r.trials_used);
                    }
                }
                record.success_probability = Some(bound);
                record.expected_trials_to_hit = (m > 0).then(|| n as f64 / m as f64);
            }
            Strategy::HillClimb => {
                for s in seeds.clone() {
                    let r = hill_climb(&instance, args.c_tol, s, args.budget)?;
                    if r.hit {
                        hit_trials.push(r.trials_used);
                    }
                }
            }
            Strategy::PostSelect => {
                let base = RunConfig::new(args.c_tol, args.encoder)
                    .with_junk(args.junk)
                    .with_ancillas(args.n_anc)
                    .with_budget(args.budget, StopRule::FirstHit);
                let analysis = exact_analysis(&instance, &base)?;
                violated |= !analysis.within_bound();
                for s in seeds.clone() {
                    let stats = run_repeat_until_success(&instance, &base.clone().with_seed(s))?;
                    if let Some(at) = stats.first_hit_at {
                        hit_trials.push(at);
                    }
                }
                record.success_probability = Some(analysis.p_joint);
                record.expected_trials_to_hit = analysis.expected_preparations_per_hit();
            }
            Strategy::Grover(iters) if m > 0 => {
                let t = match iters {
                    GroverIterations::Auto => optimal_iterations(instance.n_data(), m)?,
                    GroverIterations::Fixed(t) => t,
                };
                let p = grover_simulate(&instance, args.c_tol, t)?;
                for s in seeds.clone() {
                    if rng_from_seed(s).gen::<f64>() < p {
                        hit_trials.push(1);
                    }
                }
                record.grover_iterations = Some(t);
                record.success_probability = Some(p);
                record.expected_trials_to_hit = (p > 0.0).then(|| 1.0 / p);
            }
            // No marked state: amplitude amplification is undefined.
            Strategy::Grover(_) => {}
        }
        record.hits = hit_trials.len() as u64;
        record.hit_rate = record.hits as f64 / args.seeds as f64;
        record.mean_trials_to_hit =
            (!hit_trials.is_empty()).then(|| hit_trials.iter().sum::<u64>() as f64 / hit_trials.len() as f64);
        report.record(&record)?;
        records.push(record);
    }

    let mut out = report.summary();
    report.finish()?;
    writeln!(
        out,
        "instance {}  c_tol {}  M {}  N {}  M/N {:.6}",
        args.instance.display(),
        args.c_tol,
        m,
        n,
        bound
    )?;
    writeln!(
        out,
        "{:<14} {:>6} {:>8} {:>14} {:>14} {:>12}",
        "strategy", "hits", "hit rate", "mean to hit", "expected", "p(success)"
    )?;
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.5}"));
    for r in &records {
        writeln!(
            out,
            "{:<14} {:>6} {:>8.4} {:>14} {:>14} {:>12}",
            r.strategy,
            r.hits,
            r.hit_rate,
            opt(r.mean_trials_to_hit),
            opt(r.expected_trials_to_hit),
            opt(r.success_probability)
        )?;
    }
    if violated {
        eprintln!("CHECK FAILED: post-selection p_joint exceeds M/N");
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}
