use anyhow::{Context, Result};
use clap::Args;
use fbns::checkpoint;
use fbns::lp::{build_partition, fb_norm, BesovParams, Exponent};
use std::path::PathBuf;

use crate::output::{json_line, Workdir};

#[derive(Debug, Args)]
pub struct FbnormArgs {
    /// FBNS checkpoint holding the field.
    #[arg(long)]
    pub input: PathBuf,
    /// Regularity index; defaults to the critical value 2 - 3/p.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Exponent,
    #[arg(long)]
    pub r: Exponent,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: &FbnormArgs, wd: &Workdir) -> Result<()> {
    let path = wd.resolve(&args.input);
    let f = checkpoint::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let params = match args.s {
        Some(s) => BesovParams::new(s, args.p, args.r),
        None => BesovParams::critical(args.p, args.r),
    };
    let part = build_partition(f.grid());
    let report = fb_norm(&f, &part, params);
    let text = json_line(&report)?;
    match &args.output {
        Some(out) => checkpoint::write_atomic(&wd.resolve(out), text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}
