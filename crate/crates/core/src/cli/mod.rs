//! Command-line front end. `run` parses arguments, executes one subcommand
//! and returns the process exit code.

pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::bounds::{
    ece_lower, ece_lower_lipschitz, ece_upper_bilipschitz, ece_upper_binary, ece_upper_fiberwise, ece_upper_invariant,
    ece_upper_naive, gence_sq_lower, gence_upper, hoeffding_n, m_prime, BoundReport, ConfidenceDensity, FiberError,
};
use crate::dataset::{load_dataset, uniform_weights, write_dataset, DatasetHeader, WeightedDataset};
use crate::error::Error;
use crate::generators::{DatasetSpec, VectorFieldKind};
use crate::group::{build_group, decompose_orbits, GroupDescriptor, DEFAULT_TOL};
use crate::metrics::{
    aleatoric_bleed, ece_binned, gence, gence_sq, regression_error, ClassifierOutput, FiberMode, FiberPartition,
    RegressorOutput, DEFAULT_BINS,
};
use crate::models::experiments::{run_swissroll_sweep, run_vectorfield_experiment, summarize_sweep, SwissConfig, VectorFieldConfig};
use crate::rng::child_seed;
use crate::symmetry::{classification_bounds_with, equivariant_orbit_lower_bound, invariant_regression_lower_bound, orbit_stats};
use crate::worked::worked_example;
use output::{digest_file, Format, Outputs, Provenance, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "EQUICALIB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "equicalib", version, about = "Calibration metrics and symmetry-derived calibration bounds")]
pub struct Cli {
    /// Base seed; experiment seeds are derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for tables, records and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a dataset file.
    Gen(GenArgs),
    /// Compute a calibration metric from a predictions file and a truth dataset.
    Metric(MetricArgs),
    /// Evaluate one calibration bound.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Orbit statistics and error bounds of a dataset under a group.
    Analyze(AnalyzeArgs),
    /// Reproduce a worked example.
    Example(ExampleArgs),
    /// Run a training experiment.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

const GEN_GRAMMAR: &str = "circle20 | swiss [--ratio r --n n] | permutation24 | pointcloud | spiral [--n n --radius r] | sinusoidal [--n n --radius r] | calibrated-gaussian [--n n --dims d --s-min a --s-max b]";

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Dataset kind.
    pub kind: String,
    /// Correct-invariance ratio (swiss).
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    /// Sample count (points per arm for swiss).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1)]
    pub dims: usize,
    #[arg(long, default_value_t = 0.1)]
    pub s_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub s_max: f64,
    /// Output path; defaults to `<out-dir>/<kind>.jsonl`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricKind {
    Ece,
    Gence,
    GenceSq,
    Bleed,
    RegressionError,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(value_enum)]
    pub kind: MetricKind,
    /// JSON lines with `label`/`confidence` or `mean`/`variance` fields.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Dataset file with labels or targets and weights.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Fiber scheme: exact, eps:<width> or quantile:<k>.
    #[arg(long, default_value = "quantile:10")]
    pub fibers: String,
    /// Compare predicted variances against a zero true variance (bleed).
    #[arg(long)]
    pub zero_truth: bool,
}

#[derive(Debug, Subcommand)]
pub enum BoundCmd {
    /// ECE upper bound: naive, or invariant with --k-star, or fiberwise with --m.
    EceUpper {
        #[arg(long)]
        density: String,
        #[arg(long, conflicts_with = "m")]
        k_star: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        p2_mass: f64,
    },
    /// `1 − m` for binary tasks.
    EceUpperBinary {
        #[arg(long)]
        m: f64,
    },
    EceUpperBilipschitz {
        #[arg(long)]
        k2: f64,
        #[arg(long)]
        k_star: f64,
        #[arg(long, default_value_t = 1.0)]
        p2_mass: f64,
        #[arg(long)]
        min_orbit_mass: f64,
    },
    EceLower {
        #[arg(long)]
        density: String,
        #[arg(long)]
        m: f64,
    },
    /// `m'` of a labeled dataset under a group.
    MPrime {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        group: String,
    },
    EceLowerLipschitz {
        #[arg(long)]
        k: f64,
        #[arg(long)]
        m_prime: f64,
        #[arg(long)]
        min_orbit_mass: f64,
    },
    /// GENCE upper bound from per-fiber `mass,error,s1[;s2...]` triples.
    GenceUpper {
        #[arg(long = "fiber", required = true)]
        fibers: Vec<String>,
    },
    /// Squared-GENCE lower bound for equally weighted scalar variances.
    GenceSqLower {
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        m: f64,
    },
    /// Samples needed for an ε-accurate ECE estimate with probability 1 − δ.
    Hoeffding {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Same as the top-level `example` command.
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// cyclic:<n>, dihedral:<n>, symmetric:<n>, reflect-x or z-swap.
    #[arg(long)]
    pub group: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// 4.1, 4.2, 4.3, 4.4 or 5.1.
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub k_star: Option<f64>,
    #[arg(long)]
    pub s1: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// Swiss-roll sweep over correct-invariance ratios.
    Swiss {
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        ratios: Vec<f64>,
        /// Number of seeds, derived from --seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long)]
        n_per_arm: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Planar vector-field regression with both model kinds.
    Vectorfield {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
    },
}

// ─── errors and exit codes ───────────────────────────────────────────────────

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(e) | CliError::Data(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Data(_) => EXIT_DATA,
            CliError::Lib(Error::InvalidInput(_) | Error::UnsupportedGroup(_)) => EXIT_USAGE,
            CliError::Lib(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "data error: {e}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn data<T>(r: crate::Result<T>) -> CliResult<T> {
    r.map_err(CliError::Data)
}

fn usage<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

// ─── entry point ─────────────────────────────────────────────────────────────

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to stderr, summaries to stdout.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let command: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("equicalib: {e}");
            if let CliError::Usage(_) = e {
                if e.to_string().contains("dataset kind") {
                    eprintln!("grammar: {GEN_GRAMMAR}");
                }
            }
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn execute(cli: Cli, command: Vec<String>) -> CliResult<()> {
    let started = Instant::now();
    let provenance = Provenance {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into_iter().skip(1).collect(),
        seeds: vec![cli.seed],
        inputs: Vec::new(),
    };
    let mut out = Outputs::new(cli.out_dir.clone(), cli.format, provenance);
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, cli.seed, &mut out)?,
        Command::Metric(a) => cmd_metric(&a, &mut out)?,
        Command::Bound(b) => cmd_bound(b, &mut out)?,
        Command::Analyze(a) => cmd_analyze(&a, &mut out)?,
        Command::Example(a) => cmd_example(&a, &mut out)?,
        Command::Experiment(e) => cmd_experiment(e, cli.seed, &mut out)?,
    }
    out.finish(started.elapsed().as_secs_f64())?;
    Ok(())
}

fn add_input(out: &mut Outputs, path: &Path) -> CliResult<()> {
    out.provenance.inputs.push(data(digest_file(path))?);
    Ok(())
}

// ─── gen ─────────────────────────────────────────────────────────────────────

fn dataset_spec(a: &GenArgs) -> CliResult<DatasetSpec> {
    Ok(match a.kind.as_str() {
        "circle20" => DatasetSpec::Circle20,
        "swiss" | "swiss_roll" => DatasetSpec::SwissRoll { correct_ratio: a.ratio, n_per_arm: a.n.unwrap_or(100) },
        "permutation24" => DatasetSpec::Permutation24,
        "pointcloud" | "pointcloud_gence" => DatasetSpec::PointcloudGence,
        "spiral" | "sinusoidal" => DatasetSpec::VectorField {
            field: usage(a.kind.parse::<VectorFieldKind>())?,
            n: a.n.unwrap_or(1000),
            radius: a.radius,
        },
        "calibrated-gaussian" | "calibrated_gaussian" => {
            DatasetSpec::CalibratedGaussian { n: a.n.unwrap_or(10_000), dims: a.dims, s_min: a.s_min, s_max: a.s_max }
        }
        other => return Err(CliError::Usage(format!("unknown dataset kind `{other}`"))),
    })
}

fn cmd_gen(a: &GenArgs, seed: u64, out: &mut Outputs) -> CliResult<()> {
    let spec = dataset_spec(a)?;
    let ds = spec.generate(seed)?;
    let path = a.output.clone().unwrap_or_else(|| out.dir.join(format!("{}.jsonl", a.kind)));
    let header = DatasetHeader::new(ds.kind, spec.to_string(), Some(seed));
    out.file(path.clone(), |f| write_dataset(&ds, &header, f))?;
    println!("{} records -> {}", ds.len(), path.display());
    Ok(())
}

// ─── metric ──────────────────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionRecord {
    #[serde(default)]
    label: Option<usize>,
    #[serde(default)]
    confidence: Option<f64>,
    #[serde(default)]
    mean: Option<Vec<f64>>,
    #[serde(default)]
    variance: Option<Vec<f64>>,
}

fn read_predictions(path: &Path) -> crate::Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with("{\"provenance\"") {
            continue;
        }
        out.push(serde_json::from_str(t).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?);
    }
    if out.is_empty() {
        return Err(Error::Empty("no prediction records".into()));
    }
    Ok(out)
}

fn schema(msg: &str) -> CliError {
    CliError::Data(Error::Parse { line: 0, message: msg.into() })
}

fn classifier_outputs(preds: &[PredictionRecord]) -> CliResult<Vec<ClassifierOutput>> {
    preds
        .iter()
        .map(|p| match (p.label, p.confidence) {
            (Some(label), Some(confidence)) => Ok(ClassifierOutput { label, confidence }),
            _ => Err(schema("classifier predictions need `label` and `confidence`")),
        })
        .collect()
}

fn regressor_outputs(preds: &[PredictionRecord], need_mean: bool) -> CliResult<Vec<RegressorOutput>> {
    preds
        .iter()
        .map(|p| match (&p.mean, &p.variance) {
            (Some(m), Some(v)) => Ok(RegressorOutput { mean: m.clone(), variance: v.clone() }),
            (None, Some(v)) if !need_mean => Ok(RegressorOutput { mean: Vec::new(), variance: v.clone() }),
            _ => Err(schema("regressor predictions need `mean` and `variance`")),
        })
        .collect()
}

fn load_truth(a: &MetricArgs, n: usize, out: &mut Outputs) -> CliResult<WeightedDataset> {
    let path = a.truth.as_ref().ok_or_else(|| CliError::Usage("--truth is required for this metric".into()))?;
    add_input(out, path)?;
    let ds = data(load_dataset(path))?;
    if ds.len() != n {
        return Err(CliError::Data(Error::ShapeMismatch { expected: n, actual: ds.len() }));
    }
    Ok(ds)
}

fn cmd_metric(a: &MetricArgs, out: &mut Outputs) -> CliResult<()> {
    add_input(out, &a.predictions)?;
    let preds = data(read_predictions(&a.predictions))?;
    let n = preds.len();
    let (value, table) = match a.kind {
        MetricKind::Ece => {
            let outputs = classifier_outputs(&preds)?;
            let ds = load_truth(a, n, out)?;
            let rep = data(ece_binned(&outputs, data(ds.labels())?, &ds.weights, a.bins))?;
            let mut t = Table::new(&["lower", "upper", "count", "mass", "accuracy", "confidence"]);
            for b in &rep.bins {
                t.push(vec![b.lower.into(), b.upper.into(), b.count.into(), b.mass.into(), b.accuracy.into(), b.confidence.into()]);
            }
            (rep.ece, t)
        }
        MetricKind::Gence | MetricKind::GenceSq => {
            let outputs = regressor_outputs(&preds, true)?;
            let ds = load_truth(a, n, out)?;
            let mode: FiberMode = usage(a.fibers.parse())?;
            let vars: Vec<Vec<f64>> = outputs.iter().map(|o| o.variance.clone()).collect();
            let fibers = data(FiberPartition::from_vectors(&vars, &ds.weights, mode))?;
            let truths = data(ds.targets())?;
            let rep = if a.kind == MetricKind::Gence {
                gence(&outputs, truths, &ds.weights, &fibers)
            } else {
                gence_sq(&outputs, truths, &ds.weights, &fibers)
            };
            let rep = data(rep)?;
            let mut t = Table::new(&["fiber", "size", "mass", "variance_norm", "numerator", "denominator"]);
            for (i, f) in rep.fibers.iter().enumerate() {
                let vn = f.variance.iter().map(|v| v * v).sum::<f64>().sqrt();
                t.push(vec![i.into(), f.size.into(), f.mass.into(), vn.into(), f.numerator.into(), f.denominator.into()]);
            }
            (rep.value, t)
        }
        MetricKind::Bleed => {
            let outputs = regressor_outputs(&preds, false)?;
            let vars: Vec<Vec<f64>> = outputs.iter().map(|o| o.variance.clone()).collect();
            let (truth_vars, weights) = if a.zero_truth {
                let weights = match &a.truth {
                    Some(_) => load_truth(a, n, out)?.weights,
                    None => uniform_weights(n),
                };
                (vars.iter().map(|v| vec![0.0; v.len()]).collect::<Vec<_>>(), weights)
            } else {
                let ds = load_truth(a, n, out)?;
                (data(ds.targets())?.to_vec(), ds.weights)
            };
            let v = data(aleatoric_bleed(&vars, &truth_vars, &weights))?;
            (v, Table::new(&["bleed"]))
        }
        MetricKind::RegressionError => {
            let outputs = regressor_outputs(&preds, true)?;
            let ds = load_truth(a, n, out)?;
            let means: Vec<Vec<f64>> = outputs.iter().map(|o| o.mean.clone()).collect();
            let v = data(regression_error(&means, data(ds.targets())?, &ds.weights, None))?;
            (v, Table::new(&["regression_error"]))
        }
    };
    let mut table = table;
    if table.rows.is_empty() {
        table.push(vec![value.into()]);
    }
    let kind = format!("{:?}", a.kind).to_lowercase();
    out.table(&format!("metric_{kind}"), &table)?;
    println!("{kind} = {}", crate::numeric::fmt_f64(value));
    Ok(())
}

// ─── bounds and examples ─────────────────────────────────────────────────────

fn density(s: &str) -> CliResult<ConfidenceDensity> {
    usage(s.parse::<ConfidenceDensity>())
}

fn print_reports(reports: &[BoundReport]) {
    for r in reports {
        println!("{:<42} {:>24}  [{}]", r.label, crate::numeric::fmt_f64(r.value), r.kind);
        for (k, v) in &r.components {
            println!("    {k:<30} {}", crate::numeric::fmt_f64(*v));
        }
        for f in &r.flags {
            println!("    ! {f}");
        }
    }
}

fn emit_reports(stem: &str, reports: &[BoundReport], out: &mut Outputs) -> CliResult<()> {
    let mut t = Table::new(&["label", "kind", "value", "components", "flags"]);
    for r in reports {
        let comps = r.components.iter().map(|(k, v)| format!("{k}={}", crate::numeric::fmt_f64(*v))).collect::<Vec<_>>().join(";");
        t.push(vec![r.label.clone().into(), r.kind.to_string().into(), r.value.into(), comps.into(), r.flags.join("; ").into()]);
    }
    out.table(stem, &t)?;
    out.json(stem, &reports)?;
    print_reports(reports);
    Ok(())
}

fn parse_fiber(s: &str) -> CliResult<FiberError> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || CliError::Usage(format!("bad fiber `{s}` (expected mass,error,s1[;s2...])"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mass = parts[0].trim().parse().map_err(|_| bad())?;
    let error = parts[1].trim().parse().map_err(|_| bad())?;
    let variance = parts[2].split(';').map(|v| v.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?;
    Ok(FiberError { mass, error, variance })
}

fn cmd_bound(b: BoundCmd, out: &mut Outputs) -> CliResult<()> {
    let report = match b {
        BoundCmd::EceUpper { density: d, k_star, m, p2_mass } => {
            let r = density(&d)?;
            match (k_star, m) {
                (Some(k), _) => ece_upper_invariant(&r, k, p2_mass)?,
                (None, Some(m)) => ece_upper_fiberwise(&r, m, p2_mass)?,
                (None, None) => ece_upper_naive(&r)?,
            }
        }
        BoundCmd::EceUpperBinary { m } => ece_upper_binary(m)?,
        BoundCmd::EceUpperBilipschitz { k2, k_star, p2_mass, min_orbit_mass } => {
            ece_upper_bilipschitz(k2, k_star, p2_mass, min_orbit_mass)?
        }
        BoundCmd::EceLower { density: d, m } => ece_lower(&density(&d)?, m)?,
        BoundCmd::MPrime { data: path, group } => {
            add_input(out, &path)?;
            let ds = data(load_dataset(&path))?;
            let g = build_group(usage(group.parse::<GroupDescriptor>())?)?;
            m_prime(&ds, &g)?
        }
        BoundCmd::EceLowerLipschitz { k, m_prime, min_orbit_mass } => ece_lower_lipschitz(k, m_prime, min_orbit_mass)?,
        BoundCmd::GenceUpper { fibers } => {
            let f = fibers.iter().map(|s| parse_fiber(s)).collect::<CliResult<Vec<_>>>()?;
            gence_upper(&f)?
        }
        BoundCmd::GenceSqLower { values, m } => gence_sq_lower(&values, &uniform_weights(values.len()), m)?,
        BoundCmd::Hoeffding { epsilon, delta } => {
            let n = hoeffding_n(epsilon, delta)?;
            let mut t = Table::new(&["epsilon", "delta", "n"]);
            t.push(vec![epsilon.into(), delta.into(), n.into()]);
            out.table("hoeffding", &t)?;
            println!("n = {n}");
            return Ok(());
        }
        BoundCmd::Example(a) => return cmd_example(&a, out),
    };
    emit_reports("bound", &[report], out)
}

fn cmd_example(a: &ExampleArgs, out: &mut Outputs) -> CliResult<()> {
    let reports = worked_example(&a.id, a.k_star, a.s1)?;
    emit_reports(&format!("example_{}", a.id.replace('.', "_")), &reports, out)
}

// ─── analyze ─────────────────────────────────────────────────────────────────

fn cmd_analyze(a: &AnalyzeArgs, out: &mut Outputs) -> CliResult<()> {
    add_input(out, &a.data)?;
    let ds = data(load_dataset(&a.data))?;
    let group = build_group(usage(a.group.parse::<GroupDescriptor>())?)?;
    let orbits = decompose_orbits(&ds, &group, a.tol)?;
    let stats = orbit_stats(&ds, &orbits)?;
    let mut t = Table::new(&["orbit", "size", "mass", "k", "kappa", "v"]);
    for (i, s) in stats.iter().enumerate() {
        t.push(vec![i.into(), s.size.into(), s.mass.into(), s.majority_dissent.into(), s.minority_dissent.into(), s.target_variance.into()]);
    }
    out.table("orbits", &t)?;
    let mut summary = serde_json::Map::new();
    summary.insert("orbits".into(), orbits.len().into());
    summary.insert("min_orbit_mass".into(), serde_json::json!(orbits.min_mass()));
    println!("orbits: {}", orbits.len());
    if ds.labels.is_some() {
        let cb = classification_bounds_with(&ds, orbits.clone())?;
        println!("classification error in [{}, {}]", crate::numeric::fmt_f64(cb.lower), crate::numeric::fmt_f64(cb.upper));
        for w in cb.warnings() {
            eprintln!("warning: {w}");
        }
        summary.insert("cls_error_lower".into(), serde_json::json!(cb.lower));
        summary.insert("cls_error_upper".into(), serde_json::json!(cb.upper));
        summary.insert("warnings".into(), serde_json::json!(cb.warnings()));
    }
    if ds.targets.is_some() {
        let inv = invariant_regression_lower_bound(&ds, &orbits)?;
        println!("invariant regression error >= {}", crate::numeric::fmt_f64(inv));
        summary.insert("invariant_regression_lower".into(), serde_json::json!(inv));
        let target_dim = ds.targets()?.first().map_or(0, Vec::len);
        if target_dim == ds.kind.len() {
            match group.clone().with_output_from_input().and_then(|g| equivariant_orbit_lower_bound(&ds, &g, a.tol)) {
                Ok(eq) => {
                    println!("equivariant regression error >= {}", crate::numeric::fmt_f64(eq));
                    summary.insert("equivariant_regression_lower".into(), serde_json::json!(eq));
                }
                Err(e) => eprintln!("warning: equivariant bound unavailable: {e}"),
            }
        }
    }
    out.json("analysis", &summary)?;
    Ok(())
}

// ─── experiments ─────────────────────────────────────────────────────────────

fn cmd_experiment(e: ExperimentCmd, base_seed: u64, out: &mut Outputs) -> CliResult<()> {
    match e {
        ExperimentCmd::Swiss { ratios, seeds, n_per_arm, epochs, bins } => {
            let seeds: Vec<u64> = (0..seeds).map(|i| child_seed(base_seed, i)).collect();
            out.provenance.seeds = seeds.clone();
            let mut cfg = SwissConfig { n_bins: bins, ..Default::default() };
            if let Some(n) = n_per_arm {
                cfg.n_per_arm = n;
            }
            if let Some(ep) = epochs {
                cfg.invariant.train.epochs = ep;
                cfg.unconstrained.train.epochs = ep;
            }
            let rows = run_swissroll_sweep(&ratios, &seeds, &cfg)?;
            let mut t = Table::new(&["ratio", "seed", "model", "acc", "ece", "lb", "ub"]);
            for r in &rows {
                t.push(vec![r.ratio.into(), r.seed.into(), r.model.clone().into(), r.acc.into(), r.ece.into(), r.lb.into(), r.ub.into()]);
            }
            out.table("swiss_results", &t)?;
            let summary = summarize_sweep(&rows);
            let mut s = Table::new(&["ratio", "model", "acc", "ece"]);
            for r in &summary {
                s.push(vec![r.ratio.into(), r.model.clone().into(), r.acc.into(), r.ece.into()]);
                println!("ratio {:<5} {:<14} acc {:.4}  ece {:.4}", r.ratio, r.model, r.acc, r.ece);
            }
            out.table("swiss_summary", &s)?;
            out.json("swiss_summary", &serde_json::json!({ "config": cfg, "summary": summary }))?;
        }
        ExperimentCmd::Vectorfield { kind, seeds, n, epochs } => {
            let field: VectorFieldKind = usage(kind.parse())?;
            let seeds: Vec<u64> = (0..seeds).map(|i| child_seed(base_seed, i)).collect();
            out.provenance.seeds = seeds.clone();
            let mut cfg = VectorFieldConfig::default();
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(ep) = epochs {
                cfg.model.train.epochs = ep;
            }
            let rep = run_vectorfield_experiment(field, &seeds, &cfg)?;
            let mut t = Table::new(&["seed", "model", "mse", "beta_nll", "bleed", "gence", "mean_norm", "target_second_moment"]);
            for r in &rep.rows {
                t.push(vec![
                    r.seed.into(),
                    r.model.to_string().into(),
                    r.mse.into(),
                    r.beta_nll.into(),
                    r.bleed.into(),
                    r.gence.into(),
                    r.mean_norm.into(),
                    r.target_second_moment.into(),
                ]);
            }
            out.table(&format!("vectorfield_{field}_results"), &t)?;
            let mut a = Table::new(&["model", "sector", "angle_lo", "angle_hi", "mse", "beta_nll"]);
            for r in &rep.per_angle {
                a.push(vec![r.model.to_string().into(), r.sector.into(), r.angle_lo.into(), r.angle_hi.into(), r.mse.into(), r.beta_nll.into()]);
            }
            out.table(&format!("vectorfield_{field}_per_angle"), &a)?;
            let mut summary = Vec::new();
            for m in [crate::models::VectorModelKind::Unconstrained, crate::models::VectorModelKind::RadialEquivariant] {
                let mse = rep.mean_of(m, |r| r.mse);
                let bleed = rep.mean_of(m, |r| r.bleed);
                println!("{field} {:<14} mse {mse:.5}  bleed {bleed:.5}", m.to_string());
                summary.push(serde_json::json!({ "model": m, "mse": mse, "bleed": bleed }));
            }
            out.json(&format!("vectorfield_{field}_summary"), &serde_json::json!({ "config": cfg, "summary": summary }))?;
        }
    }
    Ok(())
}
