use anyhow::{bail, Result};
use fbns::solver2d::{
    gronwall_csv, gronwall_diagnostic, residual_4_5, sample_windows, vorticity_trajectory, InteriorMask,
    VorticityState,
};
use fbns::Grid;
use serde::{Deserialize, Serialize};

use super::{finite_field, output_dir, NumericalFailure};
use crate::config::Resolved;
use crate::init::InitialData;
use crate::output::{RunOutput, Status, Workdir};

fn one_usize() -> usize {
    1
}

fn default_period() -> f64 {
    1.0
}

fn default_fraction() -> f64 {
    0.9
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallConfig {
    pub p: Vec<f64>,
    #[serde(default)]
    pub t1: f64,
}

/// Rotated-frame residual on windows centered at `times`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualConfig {
    pub omega: f64,
    pub times: Vec<f64>,
    #[serde(default = "default_fraction")]
    pub mask_fraction: f64,
}

/// `[solve2d]`: vorticity run with optional diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solve2dConfig {
    pub n: usize,
    #[serde(default = "default_period")]
    pub period_l: f64,
    pub dt: f64,
    pub steps: usize,
    /// Record every k-th step.
    #[serde(default = "one_usize")]
    pub every: usize,
    /// Write every k-th recorded sample; 0 keeps only the first and last.
    #[serde(default)]
    pub checkpoint_every: usize,
    #[serde(default = "output_dir")]
    pub output_dir: String,
    pub initial: InitialData,
    #[serde(default)]
    pub gronwall: Option<GronwallConfig>,
    #[serde(default)]
    pub residual: Option<ResidualConfig>,
}

#[derive(Serialize)]
struct SampleRow {
    t: f64,
    l2_norm: f64,
    finite: bool,
}

fn validate(c: &Solve2dConfig) -> Result<()> {
    if !(c.dt.is_finite() && c.dt > 0.0) {
        bail!("dt must be positive, got {}", c.dt);
    }
    if c.steps == 0 || c.every == 0 || !c.steps.is_multiple_of(c.every) {
        bail!("steps ({}) must be a positive multiple of every ({})", c.steps, c.every);
    }
    if let Some(gr) = &c.gronwall {
        if gr.p.is_empty() {
            bail!("gronwall.p must list at least one exponent");
        }
        if let Some(p) = gr.p.iter().find(|p| !(p.is_finite() && **p >= 2.0)) {
            bail!("gronwall.p entries must satisfy 2 <= p < inf, got {p}");
        }
    }
    if let Some(res) = &c.residual {
        if res.times.is_empty() {
            bail!("residual.times must not be empty");
        }
        if let Some(t) = res.times.iter().find(|t| !(**t / c.dt >= 1.0)) {
            bail!("residual time {t} leaves no step before it");
        }
    }
    Ok(())
}

pub fn run(cfg: &Resolved<Solve2dConfig>, wd: &Workdir) -> Result<()> {
    let c = &cfg.value;
    validate(c)?;
    let g = Grid::new(2, c.n, c.period_l)?;
    let state = VorticityState::new(c.initial.build(g, wd)?, 0.0)?;
    let mask = match &c.residual {
        Some(res) => Some(InteriorMask::disk(&g, res.mask_fraction)?),
        None => None,
    };

    let mut out = RunOutput::create(wd.resolve(&c.output_dir), "solve2d", cfg.echo()?)?;
    let traj = vorticity_trajectory(&state, c.dt, c.steps, c.every)?;
    let rows: Vec<SampleRow> = traj
        .times()
        .into_iter()
        .zip(traj.samples())
        .map(|(t, w)| SampleRow {
            t,
            l2_norm: w.l2_norm(),
            finite: finite_field(w),
        })
        .collect();
    out.json("samples.json", &rows)?;
    if let Some(bad) = rows.iter().find(|r| !r.finite || !r.l2_norm.is_finite()) {
        let msg = format!("vorticity became non-finite by t = {}", bad.t);
        out.finish(Status::NumericalFailure, Some(&msg))?;
        return Err(NumericalFailure(msg).into());
    }

    let last = traj.len() - 1;
    for (i, w) in traj.samples().iter().enumerate() {
        if i == 0 || i == last || (c.checkpoint_every > 0 && i % c.checkpoint_every == 0) {
            out.field(&format!("checkpoints/w_{i:05}.fbns"), w)?;
        }
    }
    if let Some(gr) = &c.gronwall {
        let reports = gr
            .p
            .iter()
            .map(|&p| gronwall_diagnostic(&traj, p, gr.t1))
            .collect::<fbns::Result<Vec<_>>>()?;
        out.bytes("gronwall.csv", gronwall_csv(&reports).as_bytes())?;
        out.json("gronwall.json", &reports)?;
    }
    if let (Some(res), Some(mask)) = (&c.residual, &mask) {
        let centers: Vec<usize> = res.times.iter().map(|t| (t / c.dt).round() as usize).collect();
        let windows = sample_windows(&state, c.dt, &centers)?;
        let report = residual_4_5(&windows, res.omega, mask)?;
        out.json("residual.json", &report)?;
    }
    out.finish(Status::Ok, None)?;
    Ok(())
}
