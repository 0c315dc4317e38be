use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use corrcov::bounds::{self, BoundReport, PaulinParams, ReportOptions};
use corrcov::experiments::{self, ExperimentConfig, ExperimentResult, LinearFit};
use corrcov::io;
use corrcov::linalg::{DenseMatrix, SpdMatrix};
use corrcov::{Error, ModelDescriptor};

/// Covariance estimation from linearly correlated Gaussian samples.
#[derive(Debug, Parser)]
#[command(name = "corrcov", version, about)]
struct Cli {
    /// Worker threads for Monte Carlo trials (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the error bounds for one configuration and print them as JSON.
    Bound(BoundArgs),
    /// Run an experiment described by a JSON config file.
    Experiment(ExperimentArgs),
    /// Run the three reference experiments and write figures and summaries.
    ReproducePaper(ReproduceArgs),
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// Dimension of each sample.
    #[arg(long)]
    n: usize,
    /// Number of samples.
    #[arg(long)]
    m: usize,
    /// identity | toeplitz:<theta> | all_ones | random_diag:<mu>,<sigma>
    #[arg(long)]
    model: ModelDescriptor,
    /// JSON file holding the covariance as a list of rows (default: identity).
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Tail level delta (default: sqrt(2 n ln 3)).
    #[arg(long)]
    delta: Option<f64>,
    /// Use closed-form norms of the shape matrix instead of computed ones.
    #[arg(long)]
    analytic: bool,
    /// Seed for random models.
    #[arg(long, env = "CORRCOV_SEED", default_value_t = 0)]
    seed: u64,
    /// Entry bound L for the matrix-Bernstein comparison bound.
    #[arg(long, requires = "paulin_sigma")]
    paulin_l: Option<f64>,
    /// Entry standard deviation for the matrix-Bernstein comparison bound.
    #[arg(long, requires = "paulin_l")]
    paulin_sigma: Option<f64>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long, env = "CORRCOV_SEED")]
    seed: Option<u64>,
    /// Trial count, overriding the config.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Master seed.
    #[arg(long, env = "CORRCOV_SEED", default_value_t = 0)]
    seed: u64,
    /// Fraction of the 500 reference trials to run, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

const FULL_TRIALS: f64 = 500.0;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 1,
        Error::Config(_) | Error::Json(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.threads {
        Some(0) => Err(Error::Config("--threads must be >= 1".into())),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
            .and_then(|pool| pool.install(|| run(cli.command))),
        None => run(cli.command),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: Command) -> corrcov::Result<()> {
    match command {
        Command::Bound(args) => cmd_bound(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::ReproducePaper(args) => cmd_reproduce(args),
    }
}

fn read_sigma(path: &Path) -> corrcov::Result<SpdMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    SpdMatrix::new(DenseMatrix::from_rows(&rows)?)
}

fn cmd_bound(args: BoundArgs) -> corrcov::Result<()> {
    if args.n == 0 || args.m == 0 {
        return Err(Error::Config("--n and --m must be >= 1".into()));
    }
    let sigma = match &args.sigma {
        Some(path) => read_sigma(path)?,
        None => SpdMatrix::identity(args.n),
    };
    if sigma.dim() != args.n {
        return Err(Error::Config(format!("covariance is {0}x{0} but --n is {1}", sigma.dim(), args.n)));
    }
    let model = args.model.build(args.m, args.seed)?;
    let inputs = bounds::inputs_from_model(&model, &sigma, args.analytic)?;
    let paulin = match (args.paulin_l, args.paulin_sigma) {
        (Some(l_bound), Some(entry_sigma)) => Some(PaulinParams { l_bound, entry_sigma }),
        _ => None,
    };
    let report = BoundReport::evaluate(&inputs, &ReportOptions { delta: args.delta, paulin })?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn create_dir(dir: &Path) -> corrcov::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn progress(line: &str) {
    eprintln!("{line}");
}

/// Runs one experiment and writes its CSVs, SVG and JSON into `out`.
fn run_and_write(cfg: &ExperimentConfig, out: &Path) -> corrcov::Result<ExperimentResult> {
    let result = experiments::run_experiment(cfg, &progress)?;
    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    io::write_csv_per_model(&result, out)?;
    match io::plot_for(&result, out.join(format!("{}.svg", result.name))) {
        Ok(spec) => io::render_svg(&spec)?,
        Err(Error::InvalidPlot(why)) => eprintln!("warning: no plot written: {why}"),
        Err(e) => return Err(e),
    }
    io::write_json(&result, &out.join(format!("{}.json", result.name)))?;
    Ok(result)
}

fn load_config(path: &Path) -> corrcov::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn cmd_experiment(args: ExperimentArgs) -> corrcov::Result<()> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    create_dir(&args.out)?;
    run_and_write(&cfg, &args.out)?;
    Ok(())
}

#[derive(Serialize)]
struct FitSummary<'a> {
    model_id: &'a str,
    #[serde(flatten)]
    fit: LinearFit,
}

#[derive(Serialize)]
struct ExperimentSummary<'a> {
    name: &'a str,
    trials: usize,
    fits: Vec<FitSummary<'a>>,
    censored: usize,
    bound_violations: usize,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct DominanceCheck {
    model_id: String,
    n: usize,
    m: usize,
    expectation_bound: f64,
    comparison_soloveychik: f64,
    dominates: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    master_seed: u64,
    scale: f64,
    experiments: Vec<ExperimentSummary<'a>>,
    dominance: Vec<DominanceCheck>,
}

#[derive(Serialize)]
struct BoundEntry {
    model_id: String,
    m: usize,
    report: BoundReport,
}

/// Expectation bound against the Soloveychik bound at `m = 10 n`.
fn dominance_grid() -> corrcov::Result<Vec<DominanceCheck>> {
    let mut out = Vec::new();
    for family in [ModelDescriptor::Identity, ModelDescriptor::Toeplitz { theta: 0.5 }] {
        for n in [10usize, 50, 100, 500] {
            let m = 10 * n;
            let model = family.build(m, 0)?;
            let inputs = bounds::inputs_from_model(&model, &SpdMatrix::identity(n), false)?;
            let report = bounds::covariance_error_expectation(&inputs)?;
            out.push(DominanceCheck {
                model_id: family.to_string(),
                n,
                m,
                expectation_bound: report.expectation_bound,
                comparison_soloveychik: report.comparison_soloveychik,
                dominates: report.expectation_bound < report.comparison_soloveychik,
            });
        }
    }
    Ok(out)
}

fn cmd_reproduce(args: ReproduceArgs) -> corrcov::Result<()> {
    if !(args.scale > 0.0 && args.scale <= 1.0) {
        return Err(Error::Config(format!("--scale must lie in (0, 1], got {}", args.scale)));
    }
    let trials = ((FULL_TRIALS * args.scale).round() as usize).max(1);
    create_dir(&args.out)?;
    let configs = [
        ExperimentConfig::time_variant_scale(trials, args.seed),
        ExperimentConfig::toeplitz_sample_size(trials, args.seed),
        ExperimentConfig::error_decay(trials, args.seed),
    ];
    let mut results = Vec::new();
    for cfg in &configs {
        results.push(run_and_write(cfg, &args.out)?);
    }
    let bound_entries: Vec<BoundEntry> = experiments::bound_reports(&configs[2])?
        .into_iter()
        .map(|(model_id, m, report)| BoundEntry { model_id, m, report })
        .collect();
    io::write_json(&bound_entries, &args.out.join("bounds.json"))?;

    let summary = Summary {
        master_seed: args.seed,
        scale: args.scale,
        experiments: results
            .iter()
            .map(|r| ExperimentSummary {
                name: &r.name,
                trials: r.trials,
                fits: r.fits.iter().map(|f| FitSummary { model_id: &f.model_id, fit: f.fit }).collect(),
                censored: r.censored_total(),
                bound_violations: r.bound_violations().len(),
                warnings: &r.warnings,
            })
            .collect(),
        dominance: dominance_grid()?,
    };
    io::write_json(&summary, &args.out.join("summary.json"))?;
    Ok(())
}
