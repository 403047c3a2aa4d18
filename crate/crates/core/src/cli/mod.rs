//! Command-line front end: JSON configuration in, CSV or JSON tables out.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 when a numerical
//! procedure fails.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use commands::{
    batch_estimator_error, bin_averaged_density, fisher, fmt, heterodyne_deviation, homodyne_ks,
    hwhm_map, indirect, mc_checks, mc_validate, noisy_fisher, opo_moments, phase_dist, thresholds,
    Check, FisherTable, HwhmTable, Table, BATCHES, BATCH_RTOL, BATCH_SIZE, EMPIRICAL_FI_RTOL,
    MAX_BIN_DEVIATION, SIGNIFICANCE,
};
pub use config::{ConfigError, OpoConfig, RunConfig, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Caps the worker pool; read once at start-up.
pub const THREADS_ENV: &str = "OPO_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "opo-lab",
    version,
    about = "Phase-noise mitigation with an optical parametric oscillator"
)]
pub struct Cli {
    /// JSON configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Gauss–Hermite nodes for phase diffusion (odd).
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Points of the phase grid.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HwhmTableArg {
    Surface,
    Seed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FisherTableArg {
    R,
    Phi,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output moments of the OPO over pump ratios and seed phases.
    OpoMoments,
    /// Heterodyne phase densities of the seed, dephased seed and OPO output.
    PhaseDist,
    /// HWHM of the central phase peak over amplitude and noise.
    HwhmMap {
        #[arg(long, value_enum, default_value = "surface")]
        table: HwhmTableArg,
    },
    /// Threshold amplitude, noise levels and pump ratio.
    Thresholds,
    /// Closed-form indirect phase variances.
    Indirect,
    /// QFI and optimised homodyne FI against squeezing, or FI against angle.
    Fisher {
        #[arg(long, value_enum, default_value = "r")]
        table: FisherTableArg,
    },
    /// Homodyne FI with a dephased seed.
    NoisyFisher,
    /// Monte-Carlo checks of the analytic results.
    McValidate,
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            RunError::Model(_) => EXIT_CONFIG,
            RunError::Io(_) => EXIT_FAILURE,
        }
    }
}

/// Configuration after applying command-line overrides, re-validated.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(nodes) = cli.nodes {
        cfg.nodes = nodes;
    }
    if let Some(grid) = cli.grid {
        cfg.grid = grid;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn with_metadata(cfg: &RunConfig, body: Value) -> Value {
    let mut out = json!({
        "config_hash": cfg.hash(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut out, body) {
        dst.extend(src);
    }
    out
}

/// Runs a parsed command and returns its rendered output.
pub fn render(command: &Command, cfg: &RunConfig) -> crate::Result<String> {
    let json_text =
        |v: Value| serde_json::to_string_pretty(&with_metadata(cfg, v)).expect("valid json") + "\n";
    Ok(match command {
        Command::OpoMoments => opo_moments(cfg)?.to_csv(),
        Command::PhaseDist => phase_dist(cfg)?.to_csv(),
        Command::HwhmMap { table } => {
            let t = match table {
                HwhmTableArg::Surface => HwhmTable::Surface,
                HwhmTableArg::Seed => HwhmTable::Seed,
            };
            hwhm_map(cfg, t)?.to_csv()
        }
        Command::Thresholds => json_text(thresholds(cfg)?),
        Command::Indirect => indirect(cfg)?.to_csv(),
        Command::Fisher { table } => {
            let t = match table {
                FisherTableArg::R => FisherTable::Squeezing,
                FisherTableArg::Phi => FisherTable::Angle,
            };
            fisher(cfg, t)?.to_csv()
        }
        Command::NoisyFisher => noisy_fisher(cfg)?.to_csv(),
        Command::McValidate => json_text(mc_validate(cfg)?),
    })
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let cfg = resolve_config(cli)?;
    let text = render(&cli.command, &cfg)?;
    let target = cli
        .out
        .clone()
        .or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
    match target {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        ConfigError::Invalid(format!(
            "{THREADS_ENV} must be a positive integer, got {value:?}"
        ))
    })?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Entry point of the `opo-lab` binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
