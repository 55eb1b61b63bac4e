use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use fbns::checkpoint;
use fbns::random::{random_divfree_field, random_scalar_field, SpectrumProfile};
use fbns::Grid;
use std::path::PathBuf;

use crate::output::{json_line, Workdir};

#[derive(Debug, Args)]
pub struct CheckpointArgs {
    #[command(subcommand)]
    pub action: CheckpointAction,
}

#[derive(Debug, Subcommand)]
pub enum CheckpointAction {
    /// Read, re-encode and compare a checkpoint byte for byte.
    Verify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a random field.
    Generate {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        period_l: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        xi_c: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Scalar field instead of a divergence-free vector field.
        #[arg(long)]
        scalar: bool,
    },
}

pub fn run(args: &CheckpointArgs, wd: &Workdir) -> Result<()> {
    match &args.action {
        CheckpointAction::Verify { input } => {
            let path = wd.resolve(input);
            let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let report = checkpoint::verify_roundtrip(&bytes).with_context(|| format!("verifying {}", path.display()))?;
            print!("{}", json_line(&report)?);
            if !report.identical {
                bail!("{} does not re-encode to identical bytes", path.display());
            }
        }
        CheckpointAction::Generate {
            output,
            dim,
            n,
            period_l,
            seed,
            xi_c,
            amplitude,
            scalar,
        } => {
            let g = Grid::new(*dim, *n, *period_l)?;
            let prof = SpectrumProfile::Gaussian { xi_c: *xi_c };
            let f = if *scalar {
                random_scalar_field(g, *seed, prof)
            } else {
                random_divfree_field(g, *seed, prof)?
            };
            checkpoint::write(&wd.resolve(output), &f.scaled(*amplitude))?;
        }
    }
    Ok(())
}
