//! Command-line runner: reads a TOML run configuration, executes the sweeps
//! it describes, and writes one CSV per sweep plus a JSON manifest.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
//! 3 walker left the simulation window, 4 zero-hit estimate with
//! `fatal_zero_hits = true`.

pub mod config;
pub mod manifest;
pub mod recipes;
pub mod runner;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "RWDRE_WORKERS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Window(String),
    ZeroHits(String),
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(_) => 1,
            CliError::Config(_) => 2,
            CliError::Window(_) => 3,
            CliError::ZeroHits(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid config: {m}"),
            CliError::Window(m) => write!(f, "window too small: {m}"),
            CliError::ZeroHits(m) => write!(f, "zero hits: {m}"),
            CliError::Run(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rwdre::Error> for CliError {
    fn from(e: rwdre::Error) -> Self {
        match e {
            rwdre::Error::WindowTooSmall { .. } => CliError::Window(e.to_string()),
            rwdre::Error::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Run(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rwdre",
    version,
    about = "Random walks in dynamic random environments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute every sweep in a config and write CSVs and a manifest.
    Run {
        config: PathBuf,
        /// Output directory; overrides `run.output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Canned configurations.
    Recipes {
        #[command(subcommand)]
        action: RecipeAction,
    },
}

#[derive(Debug, Subcommand)]
enum RecipeAction {
    List,
    Emit { name: String },
}

/// Worker count from [`WORKERS_ENV`], if set.
pub fn workers_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "{WORKERS_ENV} must be a positive integer, got '{v}'"
                ))
            }),
        Err(_) => Ok(None),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "rwdre: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            out: out_dir,
        } => {
            let start = Instant::now();
            let loaded = config::load(&config)?;
            let dir = out_dir.unwrap_or_else(|| loaded.base.join(&loaded.config.run.output_dir));
            let report = runner::execute(&loaded, &dir)?;
            let manifest = manifest::RunManifest::new(&loaded, &config, &report, start.elapsed());
            manifest.write(&dir)?;
            for s in &report {
                writeln!(
                    out,
                    "{}: {} rows -> {}",
                    s.name,
                    s.rows,
                    dir.join(&s.file).display()
                )?;
            }
            writeln!(
                out,
                "manifest -> {}",
                dir.join(manifest::MANIFEST_FILE).display()
            )?;
            let zero: usize = report.iter().map(|s| s.zero_hit_rows).sum();
            if zero > 0 && loaded.config.run.fatal_zero_hits {
                return Err(CliError::ZeroHits(format!(
                    "{zero} estimate rows have no hits (outputs were still written)"
                )));
            }
            Ok(())
        }
        Command::Validate { config } => {
            let loaded = config::load(&config)?;
            runner::validation_report(&loaded, out)?;
            Ok(())
        }
        Command::Recipes { action } => match action {
            RecipeAction::List => {
                for r in recipes::RECIPES {
                    writeln!(out, "{:<14} {}", r.name, r.about)?;
                }
                Ok(())
            }
            RecipeAction::Emit { name } => {
                let r = recipes::find(&name).ok_or_else(|| {
                    CliError::Config(format!("unknown recipe '{name}'; see `rwdre recipes list`"))
                })?;
                write!(out, "{}", r.toml)?;
                Ok(())
            }
        },
    }
}
