//! `fbns` batch front-end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on numerical
//! failure (diagnostics are written before exiting).

mod commands;
mod config;
mod init;
mod output;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use commands::NumericalFailure;
use output::Workdir;

#[derive(Debug, Parser)]
#[command(name = "fbns", version, about = "Spectral laboratory for rotating Navier-Stokes")]
struct Cli {
    /// Directory every relative path is resolved against.
    #[arg(long, global = true, default_value = ".")]
    workdir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML configuration with one section per subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override `key=value` inside the subcommand's section (dotted keys
    /// reach nested tables).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fourier-Besov norm of a checkpointed field.
    Fbnorm(commands::fbnorm::FbnormArgs),
    /// Apply the Stokes-Coriolis semigroup.
    Semigroup(ConfigArgs),
    /// Picard iteration for the 3D mild solution.
    Solve3d(ConfigArgs),
    /// 2D vorticity run with rotating-frame and L^p diagnostics.
    Solve2d(ConfigArgs),
    /// Ensemble checks of the estimates.
    Lab(ConfigArgs),
    /// Checkpoint utilities.
    Checkpoint(commands::checkpoint::CheckpointArgs),
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FBNS_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .with_context(|| format!("FBNS_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    configure_threads()?;
    let wd = Workdir::new(cli.workdir.clone());
    let cfg_path = |a: &ConfigArgs| a.config.as_ref().map(|p| wd.resolve(p));
    match &cli.command {
        Command::Fbnorm(a) => commands::fbnorm::run(a, &wd),
        Command::Checkpoint(a) => commands::checkpoint::run(a, &wd),
        Command::Semigroup(a) => {
            let cfg = config::resolve(cfg_path(a).as_deref(), "semigroup", &a.overrides)?;
            commands::semigroup::run(&cfg, &wd)
        }
        Command::Solve3d(a) => {
            let cfg = config::resolve(cfg_path(a).as_deref(), "solve3d", &a.overrides)?;
            commands::solve3d::run(&cfg, &wd)
        }
        Command::Solve2d(a) => {
            let cfg = config::resolve(cfg_path(a).as_deref(), "solve2d", &a.overrides)?;
            commands::solve2d::run(&cfg, &wd)
        }
        Command::Lab(a) => {
            let cfg = config::resolve(cfg_path(a).as_deref(), "lab", &a.overrides)?;
            commands::lab::run(&cfg, &wd)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| {
        e.is::<NumericalFailure>() || matches!(e.downcast_ref::<fbns::Error>(), Some(fbns::Error::Breakdown { .. }))
    });
    if numerical {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
