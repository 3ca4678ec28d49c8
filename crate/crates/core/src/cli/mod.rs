//! Command-line front end: configuration, execution and output files.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{render_images, RenderedImage};
pub use config::{CommandConfig, ExperimentConfig, SCHEMA_VERSION};
pub use output::{Report, Status};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "spectral-noise", version, about = "Random fields on compact manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment configuration; defaults are used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Directory receiving the report and data files.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, value_name = "N", env = "SPECTRAL_NOISE_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Eigenvalue counts against the Weyl prediction.
    Weyl,
    /// Lists the first eigenmodes.
    Modes,
    /// Draws one coefficient vector and optionally its field.
    Sample,
    /// Writes 16-bit PGM images of sampled fields.
    Render,
    /// Sobolev norm trajectories along partial sums.
    Norms,
    /// Estimates the Sobolev regularity threshold.
    Threshold,
    /// Hilbert-Schmidt growth of an operator.
    Hs,
    /// Localized frequency-cone probe along partial sums.
    Probe,
    /// Probe exponents over positions and directions.
    Scan,
    /// Monte Carlo probability inequalities.
    Mc,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Weyl => "weyl",
            Command::Modes => "modes",
            Command::Sample => "sample",
            Command::Render => "render",
            Command::Norms => "norms",
            Command::Threshold => "threshold",
            Command::Hs => "hs",
            Command::Probe => "probe",
            Command::Scan => "scan",
            Command::Mc => "mc",
        }
    }
}

/// A finished run: the report envelope and the files to write beside it.
pub struct Execution {
    pub report: Report,
    pub files: Vec<(String, Vec<u8>)>,
}

/// Runs a configuration on the current rayon pool.
pub fn execute(config: &ExperimentConfig) -> Result<Execution> {
    let outcome = commands::dispatch(&config.params)?;
    Ok(Execution {
        report: Report::new(config, outcome.status, outcome.result),
        files: outcome.files,
    })
}

/// Runs a configuration on a dedicated pool of `threads` workers.
pub fn execute_with_threads(config: &ExperimentConfig, threads: usize) -> Result<Execution> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute(config))
}

/// Loads the configuration for `cli`, applying the seed override.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?;
            if cfg.params.name() != cli.command.name() {
                return Err(Error::Config(format!(
                    "configuration is for {} but the subcommand is {}",
                    cfg.params.name(),
                    cli.command.name()
                )));
            }
            cfg
        }
        None => ExperimentConfig::new(CommandConfig::default_for(cli.command.name())?),
    };
    if let Some(seed) = cli.seed {
        cfg.params.set_seed(seed);
    }
    Ok(cfg)
}

fn run_parsed(cli: &Cli) -> Result<Status> {
    let cfg = resolve_config(cli)?;
    let threads = match cli.threads {
        Some(0) => return Err(Error::Config("--threads must be positive".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let exec = execute_with_threads(&cfg, threads)?;
    for (name, bytes) in &exec.files {
        output::write_atomic(&cli.out, name, bytes)?;
    }
    output::write_atomic(&cli.out, "report.json", exec.report.to_json().as_bytes())?;
    println!(
        "{}: {:?} (report in {})",
        exec.report.command,
        exec.report.status,
        cli.out.join("report.json").display()
    );
    Ok(exec.report.status)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_parsed(&cli) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            Status::Fail.exit_code()
        }
    }
}
