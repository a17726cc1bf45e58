//! `chaoscope`: matrix construction, percolation runs, bound evaluation,
//! Gaussian certification, SDE simulation and the verification battery.

mod cmd;
mod output;
mod source;

use clap::{Parser, Subcommand};
use output::{Format, Output, RunManifest};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Parser, Debug)]
#[command(name = "chaoscope", version, about = "Entropy bounds for non-exchangeable interacting diffusions")]
struct Cli {
    /// Worker threads for Monte Carlo and sweeps (default: available parallelism).
    #[arg(long, global = true, env = "CHAOSCOPE_THREADS")]
    threads: Option<usize>,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the primary output here instead of stdout. A run manifest is
    /// written next to it as `<out>.manifest.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Write a gnuplot script `<out>.gp` next to a CSV output.
    #[arg(long, global = true)]
    emit_gnuplot: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Build or load an interaction matrix and report its functionals.
    Matrix(cmd::matrix::MatrixArgs),
    /// Expectations of set functions of the percolation process.
    Percolate(cmd::percolate::PercolateArgs),
    /// Evaluate an entropy bound.
    Bound(cmd::bound::BoundArgs),
    /// Exact Gaussian entropies and their sandwiches.
    Gaussian(cmd::gaussian::GaussianArgs),
    /// Euler–Maruyama simulation of the particle system or its projection.
    Simulate(cmd::simulate::SimulateArgs),
    /// Run the randomized inequality battery.
    Verify(cmd::verify::VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Matrix(_) => "matrix",
            Command::Percolate(_) => "percolate",
            Command::Bound(_) => "bound",
            Command::Gaussian(_) => "gaussian",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Matrix(a) => Some(a.seed),
            Command::Percolate(a) => Some(a.seed),
            Command::Bound(_) => None,
            Command::Gaussian(a) => Some(a.seed),
            Command::Simulate(a) => Some(a.seed),
            Command::Verify(a) => Some(a.seed),
        }
    }

    fn run(&self, format: Option<Format>) -> Result<Output, CliError> {
        match self {
            Command::Matrix(a) => cmd::matrix::run(a, format),
            Command::Percolate(a) => cmd::percolate::run(a, format),
            Command::Bound(a) => cmd::bound::run(a, format),
            Command::Gaussian(a) => cmd::gaussian::run(a, format),
            Command::Simulate(a) => cmd::simulate::run(a, format),
            Command::Verify(a) => cmd::verify::run(a, format),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(chaoscope_core::Error),
}

impl From<chaoscope_core::Error> for CliError {
    fn from(e: chaoscope_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

pub fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // clap exits 2 on usage errors and 0 for --help / --version
        Err(e) => e.exit(),
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("chaoscope: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitCode, CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return usage("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if cli.emit_gnuplot && cli.out.is_none() {
        return usage("--emit-gnuplot needs --out");
    }
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let clock = Instant::now();
    let result = cli.command.run(cli.format)?;

    let mut outputs: Vec<PathBuf> = result.files.clone();
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &result.text)?;
            outputs.insert(0, path.clone());
            if cli.emit_gnuplot {
                match &result.plot {
                    Some(plot) if result.format == Format::Csv => {
                        let gp = output::sibling(path, "gp");
                        std::fs::write(&gp, plot.script(path))?;
                        outputs.push(gp);
                    }
                    _ => eprintln!("chaoscope: no plot for this output (needs --format csv)"),
                }
            }
        }
        None => print!("{}", result.text),
    }
    if let Some(anchor) = outputs.first() {
        let manifest = RunManifest {
            subcommand: cli.command.name().to_string(),
            params: serde_json::to_value(&cli.command).unwrap_or(serde_json::Value::Null),
            threads: cli.threads,
            format: result.format,
            seed: cli.command.seed(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: started,
            wall_clock_seconds: clock.elapsed().as_secs_f64(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        };
        std::fs::write(output::sibling(anchor, "manifest.json"), manifest.to_json())?;
    }
    if !result.ok {
        return Ok(ExitCode::from(EXIT_CHECK_FAILED));
    }
    Ok(ExitCode::SUCCESS)
}
