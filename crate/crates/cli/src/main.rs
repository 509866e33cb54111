//! `sgl`: batch front-end over problem spec files.
//!
//! Exit codes: 0 success, 2 parse error, 3 semantic error in the spec,
//! 4 numerically unreliable result, 5 internal error.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use sgl_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed spec file.
    Input(String),
    Semantic(String),
    Core {
        context: String,
        error: Error,
    },
    Io(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Semantic(_) => 3,
            CliError::Core { error, .. } => match error.root() {
                Error::Parse { .. } | Error::NonPolynomialExponent { .. } => 2,
                Error::TruncationInsufficient(_) | Error::Unreliable(_) => 4,
                _ => 3,
            },
            CliError::Io(_) | CliError::Internal(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m)
            | CliError::Semantic(m)
            | CliError::Io(m)
            | CliError::Internal(m) => f.write_str(m),
            CliError::Core { context, error } => write!(f, "{context}: {error}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "sgl",
    version,
    about = "Growth analysis of f'' + A f' + B f = 0 with exponential-polynomial coefficients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem spec file (JSON).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Write all artifacts of the chosen format into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Critical rays and sector signs of e^P.
    Rays,
    /// Taylor solutions and running order estimates.
    Solve,
    /// Verdict of the classification rules.
    Classify,
    /// Full growth report with per-ray Riccati traces.
    Trace,
    /// Score candidate d against the hypotheses for P.
    WitnessSearch,
}

/// Sweep phase from `SGL_SEED` (0 when unset).
fn sweep_phase() -> Result<f64, CliError> {
    let seed = match std::env::var("SGL_SEED") {
        Ok(s) => s.trim().parse::<u64>().map_err(|_| {
            CliError::Semantic(format!("SGL_SEED `{s}` is not an unsigned integer"))
        })?,
        Err(_) => 0,
    };
    Ok(rand_chacha::ChaCha8Rng::seed_from_u64(seed).random::<f64>())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Semantic("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let path = cli
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Semantic("--spec is required".into()))?;
    let loaded = spec::load(path)?;
    let artifacts = match cli.command {
        Command::Rays => commands::rays(&loaded)?,
        Command::Solve => commands::solve(&loaded)?,
        Command::Classify => commands::classify(&loaded)?,
        Command::Trace => commands::trace(&loaded, sweep_phase()?)?,
        Command::WitnessSearch => commands::witness_search(&loaded)?,
    };
    let files = match cli.format {
        Format::Json => artifacts.json,
        Format::Csv => artifacts.csv,
    };
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for (name, content) in files {
                let p = dir.join(name);
                std::fs::write(&p, content)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            }
        }
        None => {
            use std::io::Write;
            let (_, content) = files
                .into_iter()
                .next()
                .ok_or_else(|| CliError::Internal("no output".into()))?;
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(5),
    }
}
