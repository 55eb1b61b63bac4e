use anyhow::Result;
use fbns::lab::{
    calibrate_gate_constant, ensemble_initial_data, omega_independence_scan, reports_csv, verify_bilinear22,
    verify_lemma21, verify_linear32, EnsembleSpec, EstimateParams, EstimateReport, GateCalibration, OmegaScanReport,
    ScanExperiment, TimeGrid,
};
use fbns::lp::Exponent;
use serde::{Deserialize, Serialize};

use super::{output_dir, NumericalFailure};
use crate::config::Resolved;
use crate::output::{RunOutput, Status, Workdir};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexPair {
    pub p: Exponent,
    pub r: Exponent,
    #[serde(default)]
    pub omega: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub experiment: ScanExperiment,
    pub omegas: Vec<f64>,
}

/// `[lab]`: ensemble checks of the estimates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    #[serde(default = "output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub duhamel: Vec<EstimateParams>,
    #[serde(default)]
    pub bilinear: Vec<EstimateParams>,
    #[serde(default)]
    pub linear: Vec<IndexPair>,
    #[serde(default)]
    pub gate: Vec<IndexPair>,
    #[serde(default)]
    pub scan: Vec<ScanConfig>,
}

#[derive(Serialize)]
struct GateRow {
    p: Exponent,
    r: Exponent,
    omega: f64,
    #[serde(flatten)]
    calibration: GateCalibration,
}

#[derive(Serialize)]
struct LabOutput<'a> {
    estimates: &'a [EstimateReport],
    gate: &'a [GateRow],
    scans: &'a [OmegaScanReport],
}

pub fn run(cfg: &Resolved<LabConfig>, wd: &Workdir) -> Result<()> {
    let c = &cfg.value;
    c.ensemble.grid()?;
    c.ensemble.steps()?;
    let mut estimates = Vec::new();
    for params in &c.duhamel {
        estimates.push(verify_lemma21(params, &c.ensemble)?);
    }
    for params in &c.bilinear {
        estimates.push(verify_bilinear22(params, &c.ensemble)?);
    }
    if !c.linear.is_empty() {
        let data = ensemble_initial_data(&c.ensemble)?;
        let time = TimeGrid {
            horizon: c.ensemble.horizon,
            dt: c.ensemble.dt,
        };
        for lp in &c.linear {
            let reps = verify_linear32(&data, lp.p, lp.r, lp.omega, time)?;
            estimates.push(reps.sup);
            estimates.push(reps.integrated);
        }
    }
    let gate = c
        .gate
        .iter()
        .map(|g| {
            Ok(GateRow {
                p: g.p,
                r: g.r,
                omega: g.omega,
                calibration: calibrate_gate_constant(&c.ensemble, g.p, g.r, g.omega)?,
            })
        })
        .collect::<fbns::Result<Vec<_>>>()?;
    let scans = c
        .scan
        .iter()
        .map(|s| omega_independence_scan(&s.experiment, &s.omegas))
        .collect::<fbns::Result<Vec<_>>>()?;

    let mut out = RunOutput::create(wd.resolve(&c.output_dir), "lab", cfg.echo()?)?;
    out.json(
        "reports.json",
        &LabOutput {
            estimates: &estimates,
            gate: &gate,
            scans: &scans,
        },
    )?;
    out.bytes("reports.csv", reports_csv(&estimates).as_bytes())?;
    let bad = estimates
        .iter()
        .find(|r| !r.max.is_finite())
        .map(|r| format!("{} produced a non-finite ratio", r.inequality))
        .or_else(|| {
            gate.iter()
                .find(|g| !g.calibration.c_emp.is_finite())
                .map(|_| "gate calibration is non-finite".to_string())
        });
    match bad {
        Some(msg) => {
            out.finish(Status::NumericalFailure, Some(&msg))?;
            Err(NumericalFailure(msg).into())
        }
        None => {
            for r in &estimates {
                if !r.pass {
                    log::warn!("{}: ensemble maximum not stable (change {:.3})", r.inequality, r.stability);
                }
            }
            out.finish(Status::Ok, None)?;
            Ok(())
        }
    }
}
