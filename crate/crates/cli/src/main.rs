//! `multicopy` command-line front end.
//!
//! Exit codes: 0 success, 2 bad usage or configuration, 3 numerical or I/O
//! failure.

mod commands;
mod manifest;
mod parse;
mod settings;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multicopy::decision::RuleSource;
use multicopy::{DetectorModel, ReceiverKind};

use commands::Output;
use manifest::RunManifest;
use settings::{ClassicalSettings, Curve, FileConfig, HelstromSettings};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(multicopy::Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_usage() => 2,
            _ => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<multicopy::Error> for CliError {
    fn from(e: multicopy::Error) -> Self {
        CliError::Core(e)
    }
}

const EXPONENTS_HELP: &str = "\
Output: exponents.csv with columns
  nbar_s         source mean photon number
  nbar_r         received mean photon number (efficiency * nbar_s)
  receiver       kennedy | gk | dd | helstrom2 | helstrom
  xi             error exponent per copy
  s_min          minimizing s of the Chernoff quantity
  xi_asymptotic  leading-order small-nbar approximation";

const SIMULATE_HELP: &str = "\
Outputs:
  simulate_curve.csv    nbar_r,receiver,M,trials,perr_hat,err_coh_given_th,err_th_given_coh
                        (error counts pooled over replications)
  simulate_summary.csv  nbar_r,receiver,xi_fit,xi_stderr,a_fit,xi_theory
                        (xi_fit is the mean over replications, xi_stderr their spread)";

const CLASSICAL_HELP: &str = "\
Outputs:
  classical.csv     snr,M,soft_perr,hard_perr,soft_xi,hard_xi,ratio
                    (exact error probabilities and asymptotic exponents)
  classical_mc.csv  snr,M,trials,soft_perr_hat,hard_perr_hat,soft_perr_exact,hard_perr_exact
                    (only with --trials > 0)";

const HELSTROM_HELP: &str = "\
Output: helstrom.csv with columns
  nbar_r,dim,p,q,perr,bias,s_min,xi,xi_over_qcb,xi_lower_bound
  p = P(thermal | coherent), q = P(coherent | thermal); xi_over_qcb compares
  the multi-copy exponent of the Helstrom measurement with the collective
  quantum bound; xi_lower_bound is the fidelity-only guarantee.";

#[derive(Parser, Debug)]
#[command(
    name = "multicopy",
    version,
    about = "Coherent vs thermal discrimination with many copies"
)]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// JSON config file or a previous run manifest.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Theoretical error exponents versus mean photon number.
    #[command(after_help = EXPONENTS_HELP)]
    Exponents(ExponentsArgs),
    /// Monte Carlo multi-copy experiment and exponent fits.
    #[command(after_help = SIMULATE_HELP)]
    Simulate(SimulateArgs),
    /// Antipodal signals in Gaussian noise: soft vs hard combining.
    #[command(after_help = CLASSICAL_HELP)]
    Classical(ClassicalArgs),
    /// Single-copy Helstrom measurement in truncated Fock space.
    #[command(after_help = HELSTROM_HELP)]
    Helstrom(HelstromArgs),
}

#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn grid(text: &str) -> Result<Grid, String> {
    parse::real_grid(text).map(Grid)
}

#[derive(Debug, Clone)]
struct Counts(Vec<usize>);

fn counts(text: &str) -> Result<Counts, String> {
    parse::list(text).map(Counts)
}

#[derive(Debug, Clone)]
struct Curves(Vec<Curve>);

fn curves(text: &str) -> Result<Curves, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map(Curves)
}

#[derive(Debug, Clone)]
struct Receivers(Vec<ReceiverKind>);

fn receivers(text: &str) -> Result<Receivers, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<ReceiverKind>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()
        .map(Receivers)
}

#[derive(Args, Debug)]
struct ExponentsArgs {
    /// Source photon numbers: `start:stop:step` or a comma list.
    #[arg(long, value_parser = grid)]
    nbar: Option<Grid>,
    /// Comma list of kennedy, gk, dd, helstrom2, helstrom.
    #[arg(long, alias = "receiver", value_parser = curves)]
    receivers: Option<Curves>,
    /// Channel efficiency applied to the source photon number.
    #[arg(long)]
    efficiency: Option<f64>,
    /// Fixed Fock dimension for the full Helstrom curve.
    #[arg(long)]
    helstrom_dim: Option<usize>,
    /// Mean extraneous counts per window.
    #[arg(long)]
    dark_mean: Option<f64>,
    /// Detector saturation count.
    #[arg(long)]
    saturation: Option<u32>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RuleArg {
    Theoretical,
    Empirical,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Received photon numbers: `start:stop:step` or a comma list.
    #[arg(long, value_parser = grid)]
    nbar: Option<Grid>,
    /// Comma list of kennedy, gk, dd.
    #[arg(long, alias = "receiver", value_parser = receivers)]
    receivers: Option<Receivers>,
    /// Comma list of copy numbers.
    #[arg(long, value_parser = counts)]
    m_grid: Option<Counts>,
    /// Trials per copy number.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    /// Copies per simulated dataset.
    #[arg(long)]
    copies: Option<usize>,
    /// Detector efficiency.
    #[arg(long)]
    efficiency: Option<f64>,
    #[arg(long)]
    dark_mean: Option<f64>,
    #[arg(long)]
    saturation: Option<u32>,
    /// Displacement magnitude override.
    #[arg(long)]
    beta: Option<f64>,
    /// Draw copies from each dataset without replacement.
    #[arg(long)]
    without_replacement: bool,
    /// Where the per-copy decision rule comes from.
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
}

#[derive(Args, Debug)]
struct ClassicalArgs {
    /// Signal-to-noise ratios E/sigma^2: `start:stop:step` or a comma list.
    #[arg(long, value_parser = grid)]
    snr: Option<Grid>,
    #[arg(long, value_parser = counts)]
    m_grid: Option<Counts>,
    /// Monte Carlo trials per point; 0 skips the simulation.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct HelstromArgs {
    #[arg(long, value_parser = grid)]
    nbar: Option<Grid>,
    /// Comma list of Fock dimensions.
    #[arg(long, value_parser = counts)]
    dims: Option<Counts>,
    /// Skip the extra row at a dimension with negligible truncation.
    #[arg(long)]
    no_adequate: bool,
}

fn detector_with(
    base: DetectorModel,
    efficiency: Option<f64>,
    dark: Option<f64>,
    sat: Option<u32>,
) -> Result<DetectorModel, CliError> {
    Ok(DetectorModel::new(
        efficiency.unwrap_or(base.efficiency),
        dark.unwrap_or(base.dark_mean),
        sat.unwrap_or(base.saturation),
    )?)
}

fn write_outputs(dir: &Path, outputs: &[Output]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    for o in outputs {
        let path = dir.join(o.name);
        let file = File::create(&path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        o.table
            .write_to(BufWriter::new(file))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("cannot start thread pool: {e}")))?;
    }
    let file = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(CliError::Usage)?,
        None => FileConfig::default(),
    };
    let mut seed = cli.seed.or(file.seed).unwrap_or(0);
    let mut resolved = FileConfig::default();

    let (name, outputs) = match cli.command {
        Command::Exponents(a) => {
            let mut s = file.exponents.unwrap_or_default();
            if let Some(Grid(v)) = a.nbar {
                s.nbar = v;
            }
            if let Some(Curves(v)) = a.receivers {
                s.receivers = v;
            }
            if let Some(e) = a.efficiency {
                s.efficiency = e;
            }
            if a.helstrom_dim.is_some() {
                s.helstrom_dim = a.helstrom_dim;
            }
            s.detector = detector_with(s.detector, None, a.dark_mean, a.saturation)?;
            let out = commands::exponents(&s)?;
            resolved.exponents = Some(s);
            ("exponents", out)
        }
        Command::Simulate(a) => {
            let mut s = file.simulate.unwrap_or_default();
            if let Some(Grid(v)) = a.nbar {
                s.nbar = v;
            }
            if let Some(Receivers(v)) = a.receivers {
                s.receivers = v;
            }
            let e = &mut s.experiment;
            if let Some(Counts(v)) = a.m_grid {
                e.m_grid = v;
            }
            if let Some(t) = a.trials {
                e.trials_per_m = t;
            }
            if let Some(r) = a.replications {
                e.replications = r;
            }
            if let Some(c) = a.copies {
                e.copies_per_dataset = c;
            }
            if a.beta.is_some() {
                e.beta = a.beta;
            }
            if a.without_replacement {
                e.with_replacement = false;
            }
            if let Some(rule) = a.rule {
                e.rule_source = match rule {
                    RuleArg::Theoretical => RuleSource::Theoretical,
                    RuleArg::Empirical => RuleSource::EmpiricalHistogram,
                };
            }
            e.detector = detector_with(e.detector, a.efficiency, a.dark_mean, a.saturation)?;
            if cli.seed.is_some() || file.seed.is_some() {
                e.seed = seed;
            }
            seed = e.seed;
            let out = commands::simulate(&s)?;
            resolved.simulate = Some(s);
            ("simulate", out)
        }
        Command::Classical(a) => {
            let mut s: ClassicalSettings = file.classical.unwrap_or_default();
            if let Some(Grid(v)) = a.snr {
                s.snr = v;
            }
            if let Some(Counts(v)) = a.m_grid {
                s.m_grid = v;
            }
            if let Some(t) = a.trials {
                s.trials = t;
            }
            let out = commands::classical(&s, seed)?;
            resolved.classical = Some(s);
            ("classical", out)
        }
        Command::Helstrom(a) => {
            let mut s: HelstromSettings = file.helstrom.unwrap_or_default();
            if let Some(Grid(v)) = a.nbar {
                s.nbar = v;
            }
            if let Some(Counts(v)) = a.dims {
                s.dims = v;
            }
            if a.no_adequate {
                s.adequate = false;
            }
            let out = commands::helstrom(&s)?;
            resolved.helstrom = Some(s);
            ("helstrom", out)
        }
    };

    write_outputs(&cli.out, &outputs)?;
    resolved.seed = Some(seed);
    let manifest = RunManifest {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        threads: cli.threads.unwrap_or(0),
        config: resolved,
        outputs: outputs.iter().map(|o| o.name.to_string()).collect(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    manifest
        .write(&cli.out)
        .map_err(|e| CliError::Io(format!("cannot write manifest: {e}")))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
