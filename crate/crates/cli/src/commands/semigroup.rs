use anyhow::{bail, Result};
use fbns::lp::{build_partition, fb_norm, BesovParams, Exponent};
use fbns::semigroup::{apply_semigroup, relative_divergence};
use fbns::Grid;
use serde::{Deserialize, Serialize};

use super::{finite_field, output_dir, NumericalFailure};
use crate::config::Resolved;
use crate::init::InitialData;
use crate::output::{RunOutput, Status, Workdir};

fn default_period() -> f64 {
    1.0
}

/// `[semigroup]`: apply `T(t)` at each listed time.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupConfig {
    pub n: usize,
    #[serde(default = "default_period")]
    pub period_l: f64,
    #[serde(default)]
    pub omega: f64,
    pub times: Vec<f64>,
    pub p: Exponent,
    pub r: Exponent,
    #[serde(default = "output_dir")]
    pub output_dir: String,
    pub initial: InitialData,
}

#[derive(Serialize)]
struct Row {
    t: f64,
    file: String,
    l2_norm: f64,
    fb_norm: f64,
    relative_divergence: f64,
}

pub fn run(cfg: &Resolved<SemigroupConfig>, wd: &Workdir) -> Result<()> {
    let c = &cfg.value;
    let g = Grid::new(3, c.n, c.period_l)?;
    if c.times.is_empty() {
        bail!("times must not be empty");
    }
    if let Some(t) = c.times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        bail!("times must be finite and nonnegative, got {t}");
    }
    if !c.omega.is_finite() {
        bail!("omega must be finite");
    }
    let u0 = c.initial.build(g, wd)?;
    let part = build_partition(&g);
    let params = BesovParams::critical(c.p, c.r);
    let mut out = RunOutput::create(wd.resolve(&c.output_dir), "semigroup", cfg.echo()?)?;
    let mut rows = Vec::new();
    let mut failure = None;
    for (i, &t) in c.times.iter().enumerate() {
        let u = apply_semigroup(&u0, t, c.omega)?;
        let file = format!("u_{i:04}.fbns");
        out.field(&file, &u)?;
        rows.push(Row {
            t,
            file,
            l2_norm: u.l2_norm(),
            fb_norm: fb_norm(&u, &part, params).total,
            relative_divergence: relative_divergence(&u)?,
        });
        if !finite_field(&u) {
            failure = Some(format!("non-finite coefficients at t = {t}"));
            break;
        }
    }
    out.json("report.json", &rows)?;
    match failure {
        Some(msg) => {
            out.finish(Status::NumericalFailure, Some(&msg))?;
            Err(NumericalFailure(msg).into())
        }
        None => {
            out.finish(Status::Ok, None)?;
            Ok(())
        }
    }
}
