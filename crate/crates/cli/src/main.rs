//! `hyst2d`: runs scenario files against the planar hysteresis model.
//!
//! Exit codes: 0 success, 1 model error or failed checks, 2 bad config.

mod config;
mod svg;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use config::Task;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("model error: {0} [{0:?}]")]
    Model(#[from] hyst2d_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "hyst2d", version, about = "Planar-input Preisach hysteresis scenarios")]
struct Cli {
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `output`, else `out` beside it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the config's task.
    Run { config: PathBuf },
    /// Runs the foliation checks of any config.
    Validate { config: PathBuf },
}

/// Writes to a hidden temp file first, then renames into place.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, dir.join(name))
}

fn execute(cli: &Cli) -> Result<tasks::Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let (path, validate_only) = match &cli.command {
        Command::Run { config } => (config, false),
        Command::Validate { config } => (config, true),
    };
    let cfg = config::load(path)?;
    let task = if validate_only { Task::ValidateFoliation } else { cfg.scenario.task };
    cfg.check(task)?;
    let seed = cli.seed.unwrap_or(cfg.scenario.seed);
    let outcome = tasks::run(&cfg, task, seed)?;
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output_dir());
    std::fs::create_dir_all(&dir)?;
    for a in &outcome.artifacts {
        write_atomic(&dir, a.name, &a.bytes)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(o) => {
            println!("{}", o.summary);
            if o.failed_checks > 0 {
                eprintln!("{} check(s) failed; see validation_report.txt", o.failed_checks);
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
