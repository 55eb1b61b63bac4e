use anyhow::{bail, Result};
use fbns::lp::build_partition;
use fbns::picard::{picard_solve, smallness_gate, summarize, SolverConfig3D};
use fbns::Error;
use serde::{Deserialize, Serialize};

use super::{output_dir, NumericalFailure};
use crate::config::Resolved;
use crate::init::InitialData;
use crate::output::{RunOutput, Status, Workdir};

/// Optional smallness gate on the initial datum.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub c_emp: f64,
    /// Scale the datum onto the gate threshold before solving.
    #[serde(default)]
    pub rescale: bool,
    /// Refuse to solve when the gate fails.
    #[serde(default)]
    pub enforce: bool,
}

/// `[solve3d]`: Picard iteration for the rotating mild solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solve3dConfig {
    #[serde(default = "output_dir")]
    pub output_dir: String,
    /// Write every k-th time sample; 0 keeps only the first and last.
    #[serde(default)]
    pub checkpoint_every: usize,
    pub solver: SolverConfig3D,
    pub initial: InitialData,
    #[serde(default)]
    pub gate: Option<GateConfig>,
}

pub fn run(cfg: &Resolved<Solve3dConfig>, wd: &Workdir) -> Result<()> {
    let c = &cfg.value;
    c.solver.validate()?;
    let g = c.solver.grid()?;
    let mut u0 = c.initial.build(g, wd)?;
    let part = build_partition(&g);
    let gate = match &c.gate {
        Some(gc) => {
            if !(gc.c_emp.is_finite() && gc.c_emp > 0.0) {
                bail!("gate.c_emp must be positive, got {}", gc.c_emp);
            }
            let mut rep = smallness_gate(&u0, &part, c.solver.p, c.solver.r, gc.c_emp);
            if gc.rescale && rep.norm > 0.0 {
                u0 = u0.scaled(rep.threshold / rep.norm);
                rep = smallness_gate(&u0, &part, c.solver.p, c.solver.r, gc.c_emp);
            }
            if gc.enforce && !rep.pass {
                bail!(
                    "initial datum fails the smallness gate: norm {:.6e} > threshold {:.6e}",
                    rep.norm,
                    rep.threshold
                );
            }
            Some(rep)
        }
        None => None,
    };

    let mut out = RunOutput::create(wd.resolve(&c.output_dir), "solve3d", cfg.echo()?)?;
    let outcome = match picard_solve(&u0, &c.solver) {
        Ok(o) => o,
        Err(Error::Breakdown {
            iteration,
            reason,
            mut diagnostics,
        }) => {
            diagnostics.gate = gate;
            out.json("diagnostics.json", &diagnostics)?;
            let msg = format!("Picard iteration {iteration}: {reason}");
            out.finish(Status::NumericalFailure, Some(&msg))?;
            return Err(NumericalFailure(msg).into());
        }
        Err(e) => return Err(e.into()),
    };
    let mut diag = outcome.diagnostics;
    diag.gate = gate;
    let traj = outcome.trajectory;
    let last = traj.len() - 1;
    for (i, u) in traj.samples().iter().enumerate() {
        let keep = i == 0 || i == last || (c.checkpoint_every > 0 && i % c.checkpoint_every == 0);
        if keep {
            out.field(&format!("checkpoints/u_{i:05}.fbns"), u)?;
        }
    }
    out.json("diagnostics.json", &diag)?;
    let summary = summarize(&traj, &part, c.solver.p, c.solver.r)?;
    out.json("summary.json", &summary)?;
    if !diag.converged {
        let msg = format!(
            "Picard iteration did not reach tolerance {:e} in {} iterations",
            c.solver.tolerance, c.solver.max_iterations
        );
        out.finish(Status::NumericalFailure, Some(&msg))?;
        return Err(NumericalFailure(msg).into());
    }
    out.finish(Status::Ok, None)?;
    log::info!(
        "solve3d converged in {} iterations, |u|_X = {:.6e}",
        diag.iterations.len(),
        diag.final_x_norm().unwrap_or(0.0)
    );
    Ok(())
}
