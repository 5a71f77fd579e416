//! `useqd` command-line front end.
//!
//! Data goes to files; stdout carries a short human summary.
//!
//! Exit codes: 0 success, 2 invalid input, 3 strategy construction failed,
//! 4 a copy or dimension cap was exceeded, 5 a certification or
//! unambiguity check failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{bounds_report, mixed_bounds_report, BlockPolicy, BoundsError, BoundsOptions};
use crate::certificate::Certificate;
use crate::ensembles::{
    auto_eps, gen_near_orthogonal, gen_random, gen_random_mixed, gen_two_state, overlaps,
    read_ensemble, write_ensemble, AnyEnsemble, Ensemble, EnsembleError, MixedEnsemble,
    PureEnsemble,
};
use crate::simulator::{
    records_csv, simulate, simulate_with_records, Sequential, SimConfig, SimError,
    SimulationReport, TwoStageSampler,
};
use crate::strategy::{
    build_strategy, build_strategy_auto, build_strategy_mixed, check_conditions, min_block_size,
    StrategyError, StrategyOptions, TwoStageStrategy,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_STRATEGY: i32 = 3;
pub const EXIT_CAP: i32 = 4;
pub const EXIT_CERTIFY: i32 = 5;

/// Column order of `sweep` output.
pub const SWEEP_HEADER: &str = "N,overlap,th1,th2,closed_form_EL,mc_mean,mc_ci_lo,mc_ci_hi";

#[derive(Debug, Parser)]
#[command(name = "useqd", version, about = "Sequential unambiguous discrimination of quantum states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated ensemble to a JSON file.
    Gen {
        #[command(subcommand)]
        spec: GenSpec,
        #[arg(long, default_value = "ensemble.json", global = true)]
        out: PathBuf,
    },
    /// Monte Carlo run of the two-stage strategy.
    Simulate(SimulateArgs),
    /// Closed-form bounds with an ordering certificate.
    Bounds(BoundsArgs),
    /// Certify the strategy conditions, bounds and zero-error sampling.
    Certify(CertifyArgs),
    /// Dump the strategy's Kraus operator and POVMs.
    Strategy(StrategyArgs),
    /// Bounds and Monte Carlo over a range of N or overlaps.
    Sweep(SweepArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenSpec {
    /// `{|0⟩, c|0⟩ + √(1−c²)|1⟩}`
    TwoState {
        #[arg(long)]
        overlap: f64,
    },
    /// `√(1−ε²)|i⟩ + ε|N+1⟩`
    NearOrth {
        #[arg(long)]
        n: usize,
        /// A number in (0, 1) or `auto` for 1/(2N²).
        #[arg(long, default_value = "auto")]
        eps: String,
    },
    /// Normalized complex Gaussian states.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random mixed states with the given ranks.
    Mixed {
        /// Comma-separated ranks, one per state.
        #[arg(long, value_delimiter = ',')]
        ranks: Vec<usize>,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct BlockArgs {
    /// Fixed block size.
    #[arg(long, conflicts_with = "delta")]
    pub k: Option<usize>,
    /// Choose `k = ⌈ln((N−1)/δ)/(−ln c)⌉`.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub ensemble: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Copy budget per trial.
    #[arg(long, default_value_t = 100_000)]
    pub cap: u64,
    #[command(flatten)]
    pub block: BlockArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; the report does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write one `s,L,D,truncated` row per trial.
    #[arg(long)]
    pub trials_csv: Option<PathBuf>,
    /// Print the wall time of the sampling phase.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub ensemble: PathBuf,
    /// Largest inconclusive probability assumed for the optimal method.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Largest error probability for the error-tolerant lower bound.
    #[arg(long)]
    pub pe: Option<f64>,
    #[command(flatten)]
    pub block: BlockArgs,
    #[arg(long, default_value = "bounds.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub ensemble: PathBuf,
    #[command(flatten)]
    pub block: BlockArgs,
    /// Monte Carlo trials for the zero-error check; 0 skips it.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 100_000)]
    pub cap: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "certificate.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct StrategyArgs {
    #[arg(long)]
    pub ensemble: PathBuf,
    #[command(flatten)]
    pub block: BlockArgs,
    #[arg(long, default_value = "strategy.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    /// Near-orthogonal ensembles of size N.
    N,
    /// Two-state ensembles with overlap c.
    Overlap,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated points.
    #[arg(long, conflicts_with = "range")]
    pub values: Option<String>,
    /// `start:end:step`, end inclusive.
    #[arg(long)]
    pub range: Option<String>,
    /// ε for the N axis: a number or `auto`.
    #[arg(long, default_value = "auto")]
    pub eps: String,
    #[arg(long, default_value_t = 20_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 100_000)]
    pub cap: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Failure with an exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<StrategyError> for CliError {
    fn from(e: StrategyError) -> Self {
        let code = match e {
            StrategyError::DimensionCapExceeded { .. } => EXIT_CAP,
            StrategyError::DeltaOutOfRange(_) | StrategyError::ZeroBlockSize => EXIT_INPUT,
            _ => EXIT_STRATEGY,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::BadCap { .. } => EXIT_CAP,
            SimError::AmbiguousOutcome { .. } => EXIT_CERTIFY,
            SimError::Mismatch(_) => EXIT_STRATEGY,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Strategy(s) => s.into(),
            other => Self::input(other.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok((code, summary)) => {
            print!("{summary}");
            code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cmd: Command) -> Result<(i32, String), CliError> {
    match cmd {
        Command::Gen { spec, out } => cmd_gen(&spec, &out),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Certify(a) => cmd_certify(&a),
        Command::Strategy(a) => cmd_strategy(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn write_file(path: &Path, mut text: String) -> Result<(), CliError> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn set_threads(threads: Option<usize>) -> usize {
    if let Some(t) = threads {
        // a second call in the same process leaves the first pool in place
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    rayon::current_num_threads()
}

fn parse_eps(eps: &str, n: usize) -> Result<f64, CliError> {
    if eps == "auto" {
        return Ok(auto_eps(n));
    }
    eps.parse()
        .map_err(|_| CliError::input(format!("eps must be a number or `auto`, got `{eps}`")))
}

pub fn cmd_gen(spec: &GenSpec, out: &Path) -> Result<(i32, String), CliError> {
    let e = match spec {
        GenSpec::TwoState { overlap } => AnyEnsemble::Pure(gen_two_state(*overlap)?),
        GenSpec::NearOrth { n, eps } => {
            AnyEnsemble::Pure(gen_near_orthogonal(*n, parse_eps(eps, *n)?)?)
        }
        GenSpec::Random { n, dim, seed } => AnyEnsemble::Pure(gen_random(*n, *dim, *seed)?),
        GenSpec::Mixed { ranks, dim, seed } => {
            AnyEnsemble::Mixed(gen_random_mixed(ranks, *dim, *seed)?)
        }
    };
    write_ensemble(out, &e)?;
    let mut s = String::new();
    match &e {
        AnyEnsemble::Pure(p) => {
            let o = overlaps(p);
            let _ = writeln!(
                s,
                "pure ensemble: N={} dim={} max|<psi_i|psi_j>|={:.6} -> {}",
                p.len(),
                p.dim(),
                o.max_abs_overlap,
                out.display()
            );
        }
        AnyEnsemble::Mixed(m) => {
            let f = m
                .max_fidelity(&StrategyOptions::default().tol)
                .map_err(|e| CliError::input(e.to_string()))?;
            let _ = writeln!(
                s,
                "mixed ensemble: N={} dim={} max fidelity={:.6} -> {}",
                m.len(),
                m.dim(),
                f,
                out.display()
            );
        }
    }
    Ok((EXIT_OK, s))
}

/// `--k` is used as given; `--delta` starts the search at
/// `min_block_size(δ)`; otherwise it is the smallest `k` at which the tensor
/// states are independent.
pub fn choose_strategy(
    e: &PureEnsemble,
    block: &BlockArgs,
    opts: &StrategyOptions,
) -> Result<TwoStageStrategy, StrategyError> {
    match (block.k, block.delta) {
        (Some(k), _) => build_strategy(e, k, opts),
        (None, Some(d)) => build_strategy_auto(e, min_block_size(e, d)?, opts),
        (None, None) => build_strategy_auto(e, 1, opts),
    }
}

fn strategy_for(
    e: &AnyEnsemble,
    block: &BlockArgs,
    opts: &StrategyOptions,
) -> Result<TwoStageStrategy, CliError> {
    match e {
        AnyEnsemble::Pure(p) => Ok(choose_strategy(p, block, opts)?),
        AnyEnsemble::Mixed(m) => {
            if block.k.is_some_and(|k| k != 1) || block.delta.is_some() {
                return Err(CliError::input("mixed ensembles support k = 1 only"));
            }
            Ok(build_strategy_mixed(m, opts)?)
        }
    }
}

fn sample(
    strategy: &TwoStageStrategy,
    e: &dyn Ensemble,
    cfg: &SimConfig,
    records: Option<&Path>,
) -> Result<SimulationReport, CliError> {
    let sampler = Sequential(TwoStageSampler::new(strategy, e)?);
    match records {
        None => Ok(simulate(&sampler, e.priors(), cfg)?),
        Some(path) => {
            let (report, recs) = simulate_with_records(&sampler, e.priors(), cfg)?;
            write_file(path, records_csv(&recs, e.len()))?;
            Ok(report)
        }
    }
}

fn as_dyn(e: &AnyEnsemble) -> &dyn Ensemble {
    match e {
        AnyEnsemble::Pure(p) => p,
        AnyEnsemble::Mixed(m) => m,
    }
}

/// Per-hypothesis summary with 1-based hypotheses.
pub fn report_csv(r: &SimulationReport) -> String {
    let mut s = String::from("s,trials,mean_L,std_L,ci_lo,ci_hi,errors,inconclusive,truncated\n");
    for h in &r.per_hypothesis {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            h.hypothesis,
            h.trials,
            h.mean_copies,
            h.std_copies,
            h.ci95[0],
            h.ci95[1],
            h.errors,
            h.inconclusive,
            h.truncated
        );
    }
    s
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<(i32, String), CliError> {
    let shards = set_threads(a.threads);
    let e = read_ensemble(&a.ensemble)?;
    let opts = StrategyOptions::from_env();
    let strategy = strategy_for(&e, &a.block, &opts)?;
    let cfg = SimConfig::new(a.trials, a.cap, a.seed)
        .with_stream(a.stream)
        .with_shards(shards);
    let start = Instant::now();
    let report = sample(&strategy, as_dyn(&e), &cfg, a.trials_csv.as_deref())?;
    let elapsed = start.elapsed();
    let text = match a.format {
        Format::Json => report.to_json(),
        Format::Csv => report_csv(&report),
    };
    write_file(&a.out, text)?;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "k={} trials={} mean L={:.6} max_s mean L={:.6} errors={} inconclusive={} truncated={}",
        strategy.k(),
        report.trials,
        report.mean_copies,
        report.max_mean_copies,
        report.errors,
        report.inconclusive,
        report.truncated
    );
    if a.timing {
        let _ = writeln!(s, "wall time {:.3} s", elapsed.as_secs_f64());
    }
    let _ = writeln!(s, "report -> {}", a.out.display());
    let code = if report.errors == 0 { EXIT_OK } else { EXIT_CERTIFY };
    Ok((code, s))
}

fn block_policy(block: &BlockArgs) -> BlockPolicy {
    match (block.k, block.delta) {
        (Some(k), _) => BlockPolicy::Fixed(k),
        (None, Some(d)) => BlockPolicy::Delta(d),
        (None, None) => BlockPolicy::Theorem2Argmin,
    }
}

fn summarize_certificate(s: &mut String, cert: &Certificate) {
    for c in &cert.checks {
        let _ = writeln!(
            s,
            "  [{}] {} (residual {:.3e}, tol {:.1e})",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        );
    }
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<(i32, String), CliError> {
    let e = read_ensemble(&a.ensemble)?;
    let mut s = String::new();
    let (json, passed, cert) = match &e {
        AnyEnsemble::Pure(p) => {
            let opts = BoundsOptions {
                p: a.p,
                max_pe: a.pe,
                block: block_policy(&a.block),
            };
            let r = bounds_report(p, &opts, &StrategyOptions::from_env().tol)?;
            let _ = writeln!(
                s,
                "N={} c={:.6} k={} th1={:.6} th2={:.6} closed-form E[L]={:.6} lemma4={:.6}",
                r.inputs.n,
                r.inputs.max_overlap,
                r.k,
                r.th1_lower,
                r.th2_upper.value,
                r.closed_form_el,
                r.lemma4_upper
            );
            for w in &r.warnings {
                let _ = writeln!(s, "warning: {w}");
            }
            (r.to_json(), r.passed(), r.certificate)
        }
        AnyEnsemble::Mixed(m) => {
            let r = mixed_bounds_report(m, a.p, &StrategyOptions::from_env())?;
            let _ = writeln!(
                s,
                "N={} F={:.6} th1_mixed={:.6} support condition {}",
                r.n,
                r.max_fidelity,
                r.th1_mixed_lower,
                if r.support.holds { "holds" } else { "fails" }
            );
            for w in &r.warnings {
                let _ = writeln!(s, "warning: {w}");
            }
            (r.to_json(), r.passed(), r.certificate)
        }
    };
    write_file(&a.out, json)?;
    summarize_certificate(&mut s, &cert);
    let _ = writeln!(s, "bounds -> {}", a.out.display());
    Ok((if passed { EXIT_OK } else { EXIT_CERTIFY }, s))
}

fn mixed_certificate(m: &MixedEnsemble, opts: &StrategyOptions) -> Result<Certificate, CliError> {
    Ok(mixed_bounds_report(m, 0.0, opts)?.certificate)
}

pub fn cmd_certify(a: &CertifyArgs) -> Result<(i32, String), CliError> {
    let shards = set_threads(a.threads);
    let e = read_ensemble(&a.ensemble)?;
    let opts = StrategyOptions::from_env();
    let strategy = strategy_for(&e, &a.block, &opts)?;
    let mut cert = Certificate::new();
    match &e {
        AnyEnsemble::Pure(p) => {
            cert.extend(check_conditions(p, strategy.lambda()));
            let bopts = BoundsOptions {
                block: BlockPolicy::Fixed(strategy.k()),
                ..BoundsOptions::default()
            };
            cert.extend(bounds_report(p, &bopts, &opts.tol)?.certificate);
        }
        AnyEnsemble::Mixed(m) => cert.extend(mixed_certificate(m, &opts)?),
    }
    cert.check_le(
        "first_stage_completeness",
        strategy.first_stage().completeness_residual(),
        crate::strategy::POVM_TOL,
    );
    cert.check_le(
        "second_stage_completeness",
        strategy.second_stage().completeness_residual(),
        crate::strategy::POVM_TOL,
    );
    if a.trials > 0 {
        let cfg = SimConfig::new(a.trials, a.cap, a.seed).with_shards(shards);
        match sample(&strategy, as_dyn(&e), &cfg, None) {
            Ok(r) => {
                cert.check_le("sampled_wrong_decisions", r.errors as f64, 0.0);
            }
            Err(err) if err.code == EXIT_CERTIFY => {
                cert.check_le("born_wrong_outcome_probability", f64::INFINITY, 0.0);
            }
            Err(err) => return Err(err),
        }
    }
    let json = serde_json::to_string_pretty(&cert).expect("certificate serializes");
    write_file(&a.out, json)?;
    let mut s = String::new();
    let _ = writeln!(s, "k={} checks={}", strategy.k(), cert.checks.len());
    summarize_certificate(&mut s, &cert);
    let _ = writeln!(s, "certificate -> {}", a.out.display());
    Ok((if cert.passed() { EXIT_OK } else { EXIT_CERTIFY }, s))
}

pub fn cmd_strategy(a: &StrategyArgs) -> Result<(i32, String), CliError> {
    let e = read_ensemble(&a.ensemble)?;
    let strategy = strategy_for(&e, &a.block, &StrategyOptions::from_env())?;
    let json = serde_json::to_string_pretty(&strategy.dump()).expect("dump serializes");
    write_file(&a.out, json)?;
    let probs: Vec<String> = strategy
        .success_probs()
        .iter()
        .map(|p| format!("{p:.6}"))
        .collect();
    let s = format!(
        "k={} tensor dim={} stage-1 pass probabilities [{}] -> {}\n",
        strategy.k(),
        strategy.lambda().rows(),
        probs.join(", "),
        a.out.display()
    );
    Ok((EXIT_OK, s))
}

/// Points from `a,b,c` or `start:end:step` (end inclusive).
pub fn parse_points(values: Option<&str>, range: Option<&str>) -> Result<Vec<f64>, CliError> {
    let bad = |what: &str| CliError::input(format!("bad sweep points: {what}"));
    let points: Vec<f64> = match (values, range) {
        (Some(v), None) => v
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad(t)))
            .collect::<Result<_, _>>()?,
        (None, Some(r)) => {
            let parts: Vec<f64> = r
                .split(':')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad(t)))
                .collect::<Result<_, _>>()?;
            let [start, end, step] = parts[..] else {
                return Err(bad(r));
            };
            if !(step > 0.0) || end < start {
                return Err(bad(r));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        _ => return Err(CliError::input("give exactly one of --values or --range")),
    };
    if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
        return Err(bad("empty or non-finite"));
    }
    Ok(points)
}

/// One `sweep` row: bounds and Monte Carlo for a single ensemble.
pub fn sweep_row(e: &PureEnsemble, cfg: &SimConfig) -> Result<String, CliError> {
    let pol = StrategyOptions::from_env();
    let r = bounds_report(e, &BoundsOptions::default(), &pol.tol)?;
    let strategy = build_strategy(e, r.k, &pol)?;
    let report = sample(&strategy, e, cfg, None)?;
    let worst = report
        .per_hypothesis
        .iter()
        .max_by(|a, b| a.mean_copies.total_cmp(&b.mean_copies))
        .expect("at least one hypothesis");
    Ok(format!(
        "{},{},{},{},{},{},{},{}",
        r.inputs.n,
        r.inputs.max_overlap,
        r.th1_lower,
        r.th2_upper.value,
        r.closed_form_el,
        worst.mean_copies,
        worst.ci95[0],
        worst.ci95[1]
    ))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<(i32, String), CliError> {
    let shards = set_threads(a.threads);
    let points = parse_points(a.values.as_deref(), a.range.as_deref())?;
    let mut out = format!("{SWEEP_HEADER}\n");
    let mut s = String::new();
    for (i, &x) in points.iter().enumerate() {
        let e = match a.axis {
            Axis::N => {
                if x.fract() != 0.0 || x < 2.0 {
                    return Err(CliError::input(format!("N must be an integer ≥ 2, got {x}")));
                }
                let n = x as usize;
                gen_near_orthogonal(n, parse_eps(&a.eps, n)?)?
            }
            Axis::Overlap => gen_two_state(x)?,
        };
        let cfg = SimConfig::new(a.trials, a.cap, a.seed)
            .with_stream(i as u64)
            .with_shards(shards);
        let row = sweep_row(&e, &cfg)?;
        let _ = writeln!(s, "{row}");
        out.push_str(&row);
        out.push('\n');
    }
    write_file(&a.out, out)?;
    let _ = writeln!(s, "{} rows -> {}", points.len(), a.out.display());
    Ok((EXIT_OK, format!("{SWEEP_HEADER}\n{s}")))
}
