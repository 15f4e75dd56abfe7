//! Command-line front end for the `roughvol` library.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use roughvol::pathgen::with_workers;

use config::{parse_override, ConfigError, RunConfig};
use output::{emit, render, Header};

pub const THREADS_ENV: &str = "ROUGHVOL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "roughvol", version, about = "Long-memory score-driven volatility: simulation, pricing, diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Price the European, Asian, lookback and barrier table.
    Price,
    /// Dump simulated paths (t, lambda, Lambda, X).
    Simulate,
    /// Distance between the discrete kernel and its Mittag-Leffler limit over an n-ladder.
    VerifyKernel,
    /// Compare marginals of the discrete model with the Volterra reference scheme.
    CompareLimit,
    /// Moment-scaling Hurst estimate of simulated log-volatility.
    Hurst,
    /// Per-path simulation time for both convolution backends.
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::Simulate => "simulate",
            Command::VerifyKernel => "verify-kernel",
            Command::CompareLimit => "compare-limit",
            Command::Hurst => "hurst",
            Command::Bench => "bench",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Fft,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "M")]
    pub paths: Option<usize>,
    /// Steps per unit time, n.
    #[arg(long, global = true, value_name = "N")]
    pub steps: Option<usize>,
    #[arg(long, global = true, value_name = "T")]
    pub horizon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Worker threads; falls back to ROUGHVOL_THREADS.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Output file; missing directories are created. Defaults to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Override a config field, e.g. `--set model.kappa=0.2`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    /// `--set` entries followed by the dedicated flags, which win.
    fn overrides(&self) -> Result<Vec<(String, Value)>, ConfigError> {
        let mut out = self.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
        let mut push = |key: &str, v: Value| out.push((key.to_string(), v));
        if let Some(s) = self.seed {
            push("execution.seed", s.into());
        }
        if let Some(m) = self.paths {
            push("execution.paths", m.into());
        }
        if let Some(n) = self.steps {
            push("discretization.n", n.into());
        }
        if let Some(t) = self.horizon {
            push("discretization.horizon", t.into());
        }
        if let Some(b) = self.backend {
            push("discretization.backend", if b == BackendArg::Fft { "fft" } else { "naive" }.into());
        }
        if let Some(f) = self.format {
            push("output.format", if f == FormatArg::Csv { "csv" } else { "json" }.into());
        }
        Ok(out)
    }
}

/// Why a run stopped; each maps to an exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::Io(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

/// Flag, then config, then `ROUGHVOL_THREADS`, then the hardware default.
fn worker_count(flag: Option<usize>, config: &RunConfig) -> Result<Option<usize>, Failure> {
    if flag.is_some() || config.execution.threads.is_some() {
        return Ok(flag.or(config.execution.threads));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Config(format!("{THREADS_ENV}={v} is not a worker count"))),
        Err(_) => Ok(None),
    }
}

/// Loads the configuration, runs `command` and writes its artifact.
pub fn execute(command: Command, common: &CommonArgs) -> Result<(), Failure> {
    let config = RunConfig::load(common.config.as_deref(), &common.overrides()?)?;
    let threads = worker_count(common.threads, &config)?;
    let artifact = with_workers(threads, || match command {
        Command::Price => commands::price(&config),
        Command::Simulate => commands::simulate(&config),
        Command::VerifyKernel => commands::verify_kernel(&config),
        Command::CompareLimit => commands::compare_limit(&config),
        Command::Hurst => commands::hurst(&config),
        Command::Bench => commands::bench(&config),
    })??;
    let bytes = render(&Header::new(command.name(), &config), &artifact, config.output.format)?;
    let out = common.out.clone().or_else(|| config.output.path.as_ref().map(PathBuf::from));
    emit(&bytes, out.as_deref())?;
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli.command, &cli.common) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("roughvol {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
