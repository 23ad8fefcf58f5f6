use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use rrn_core::dist::EdgeDistribution;
use rrn_core::experiments::{
    self, CouplingConfig, ExperimentError, ExperimentReport, GammaSchedule, Lemma11Config, Verdict,
};
use rrn_core::gw::LimitPolicy;
use rrn_core::network::ResistorNetwork;
use rrn_core::solve::try_effective_resistance;

const EXIT_USAGE: u8 = 1;
const EXIT_FAIL: u8 = 2;
const EXIT_ABSTAIN: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "rrn",
    version,
    about = "Random resistor networks on complete graphs and branching trees"
)]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, env = "RRN_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Also write raw samples as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Omit timestamp and runtime so identical runs give identical reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Effective resistance of a network file.
    Resistance { file: PathBuf },
    /// Extinction frequency and generation sizes of Poisson branching processes.
    Gw {
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 30)]
        depth: usize,
    },
    /// Seeded Monte Carlo experiment with pass/fail criteria.
    Experiment {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        params: Params,
    },
    /// Deterministic identities that need no sampling.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Kind {
    T1,
    T2,
    T3,
    Lemma7,
    Coupling,
    Lemma11,
}

#[derive(clap::Args, Debug)]
struct Params {
    /// Number of vertices; t2 takes a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// A number, `log_n` or `sqrt_n`.
    #[arg(long)]
    gamma: Option<GammaSchedule>,
    #[arg(long)]
    delta: Option<f64>,
    /// `point:c`, `uniform:a,b`, `exp:rate` or `discrete:x1:p1,x2:p2,...`.
    #[arg(long)]
    dist: Option<EdgeDistribution>,
    /// Trials, or coupling runs.
    #[arg(long)]
    trials: Option<usize>,
    /// Exploration radius (lemma7) or coupled-tree depth (coupling).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    depth_cap: Option<usize>,
    #[arg(long)]
    node_cap: Option<usize>,
    #[arg(long)]
    stabilization: Option<f64>,
    /// Minimum offspring counts for the coupling goodness-of-fit test.
    #[arg(long)]
    gof_nodes: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Experiment(ExperimentError),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Experiment(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Experiment(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let started = Instant::now();
    let mut report = match &cli.command {
        Command::Resistance { file } => {
            let text = fs::read_to_string(file)?;
            let net = ResistorNetwork::parse(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
            let r = try_effective_resistance(&net).map_err(|e| CliError::Usage(e.to_string()))?;
            emit(&cli, &format!("{r}\n"))?;
            return Ok(ExitCode::SUCCESS);
        }
        Command::Gw {
            gamma,
            trials,
            depth,
        } => experiments::lemma2_experiment(*gamma, *trials, *depth, cli.seed)?,
        Command::Experiment { kind, params } => experiment(*kind, params, cli.seed)?,
        Command::Selftest => experiments::selftest(),
    };
    if !cli.no_timestamp {
        report.runtime_seconds = Some(started.elapsed().as_secs_f64());
        report.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    if let Some(path) = &cli.csv {
        fs::write(path, report.samples_csv())?;
    }
    let body = match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    emit(&cli, &body)?;
    Ok(match report.overall() {
        Verdict::Fail => ExitCode::from(EXIT_FAIL),
        Verdict::Abstain => ExitCode::from(EXIT_ABSTAIN),
        _ => ExitCode::SUCCESS,
    })
}

fn emit(cli: &Cli, body: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn single_n(params: &Params, default: usize) -> Result<usize, CliError> {
    match params.n.as_slice() {
        [] => Ok(default),
        [n] => Ok(*n),
        _ => Err(CliError::Usage("--n takes a single value here".into())),
    }
}

fn constant_gamma(params: &Params, default: f64, n: usize) -> Result<f64, CliError> {
    Ok(params
        .gamma
        .unwrap_or(GammaSchedule::Constant(default))
        .value(n))
}

fn point_mass() -> EdgeDistribution {
    EdgeDistribution::point(1.0).expect("unit point mass")
}

fn uniform_band() -> EdgeDistribution {
    EdgeDistribution::uniform(0.5, 1.5).expect("valid band")
}

fn experiment(kind: Kind, p: &Params, seed: u64) -> Result<ExperimentReport, CliError> {
    let report = match kind {
        Kind::T1 => {
            let n = single_n(p, 3000)?;
            experiments::theorem1_experiment(
                n,
                p.gamma.unwrap_or(GammaSchedule::LogN),
                &p.dist.clone().unwrap_or_else(point_mass),
                p.trials.unwrap_or(300),
                seed,
            )?
        }
        Kind::T2 => {
            let n_list = if p.n.is_empty() {
                vec![200, 800]
            } else {
                p.n.clone()
            };
            let gamma = match p.gamma.unwrap_or(GammaSchedule::Constant(0.8)) {
                GammaSchedule::Constant(g) => g,
                other => {
                    return Err(CliError::Usage(format!(
                        "t2 needs a constant gamma, got {other}"
                    )))
                }
            };
            experiments::theorem2_experiment(
                &n_list,
                gamma,
                &p.dist.clone().unwrap_or_else(point_mass),
                p.trials.unwrap_or(1000),
                seed,
            )?
        }
        Kind::T3 => {
            let n = single_n(p, 200)?;
            let defaults = LimitPolicy::default();
            let policy = LimitPolicy {
                depth_cap: p.depth_cap.unwrap_or(defaults.depth_cap),
                node_cap: p.node_cap.unwrap_or(experiments::LIMIT_LAW_NODE_CAP),
                stabilization: p.stabilization.unwrap_or(defaults.stabilization),
            };
            if policy.stabilization.is_nan()
                || policy.stabilization <= 0.0
                || policy.depth_cap == 0
                || policy.node_cap == 0
            {
                return Err(CliError::Usage(
                    "depth cap, node cap and stabilization must be positive".into(),
                ));
            }
            experiments::theorem3_experiment(
                n,
                constant_gamma(p, 2.0, n)?,
                &p.dist.clone().unwrap_or_else(uniform_band),
                p.trials.unwrap_or(2000),
                &policy,
                seed,
            )?
        }
        Kind::Lemma7 => {
            let n = single_n(p, 500)?;
            experiments::lemma7_experiment(
                n,
                constant_gamma(p, 2.0, n)?,
                p.k.unwrap_or(2),
                p.trials.unwrap_or(20_000),
                seed,
            )?
        }
        Kind::Coupling => {
            let n = single_n(p, 10_000)?;
            let config = CouplingConfig {
                n,
                gamma: constant_gamma(p, 2.0, n)?,
                delta: p.delta.unwrap_or(1.5),
                runs: p.trials.unwrap_or(200),
                depth: p.k,
                gof_nodes: p.gof_nodes.unwrap_or(10_000),
            };
            experiments::coupling_experiment(&config, seed)?
        }
        Kind::Lemma11 => {
            let n = single_n(p, 10_000)?;
            let config = Lemma11Config {
                n,
                gamma: constant_gamma(p, 2.0, n)?,
                delta: p.delta.unwrap_or(1.5),
                dist: p.dist.clone().unwrap_or_else(uniform_band),
                runs: p.trials.unwrap_or(200),
                epsilon: p.epsilon.unwrap_or(0.125),
            };
            experiments::lemma11_experiment(&config, seed)?
        }
    };
    Ok(report)
}
