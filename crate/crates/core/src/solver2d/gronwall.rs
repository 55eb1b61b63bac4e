use super::vorticity::biot_savart;
use crate::error::{Error, Result};
use crate::field::{inverse_transform, PhysicalField, SpectralField};
use crate::ops::gradient;
use crate::trajectory::Trajectory;
use serde::Serialize;
use std::fmt::Write as _;

/// Slack on the vorticity bound `‖w(t)‖ ≤ C‖w(t₁)‖`.
pub const VORTICITY_SLACK: f64 = 1e-10;

/// Physical `L^p` norms of one vorticity sample and its velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateNorms {
    pub v: f64,
    pub w: f64,
    pub grad_v: f64,
}

/// `‖v‖_p`, `‖w‖_p` and `‖∇v‖_p` (pointwise Frobenius) with weight `dx²`.
pub fn state_norms(w: &SpectralField, p: f64) -> Result<StateNorms> {
    let v = biot_savart(w)?;
    let mut grads = Vec::with_capacity(4);
    for c in 0..2 {
        grads.extend(inverse_transform(&gradient(&v.scalar(c))?).components().to_vec());
    }
    let grad = PhysicalField::new(*w.grid(), grads)?;
    Ok(StateNorms {
        v: inverse_transform(&v).lp_norm(p),
        w: inverse_transform(w).lp_norm(p),
        grad_v: grad.lp_norm(p),
    })
}

/// Calderón–Zygmund constant `p²/(p−1)`.
pub fn cz_constant(p: f64) -> f64 {
    p * p / (p - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GronwallRow {
    pub t: f64,
    pub norms: StateNorms,
    /// `p²/(p−1)‖w‖ − ‖∇v‖`.
    pub cz_margin: f64,
    /// `(1 + 1e−10)‖w(t₁)‖ − ‖w(t)‖` for `t ≥ t₁`.
    pub vorticity_margin: Option<f64>,
    /// `‖w(t_{i−1})‖ − ‖w(t_i)‖`.
    pub monotone_margin: Option<f64>,
    /// `‖v(t₁)‖exp(t‖w(t₁)‖) − ‖v(t)‖` for `t ≥ t₁`, i.e. with `C = 1`.
    pub gronwall_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GronwallReport {
    pub p: f64,
    pub t1: f64,
    pub rows: Vec<GronwallRow>,
    pub min_cz_margin: f64,
    pub min_vorticity_margin: f64,
    pub min_monotone_margin: f64,
    pub min_gronwall_margin: f64,
    /// Smallest `C` with `‖v(t)‖ ≤ C‖v(t₁)‖exp(Ct‖w(t₁)‖)` for all `t ≥ t₁`.
    pub minimal_c: f64,
}

impl GronwallReport {
    /// Vorticity non-increase and the Calderón–Zygmund bound both hold.
    pub fn holds(&self, tol: f64) -> bool {
        self.min_cz_margin >= -tol && self.min_monotone_margin >= -tol && self.min_vorticity_margin >= -tol
    }
}

fn min_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::INFINITY, f64::min)
}

fn minimal_constant(v1: f64, w1: f64, tail: &[(f64, f64)]) -> f64 {
    let holds = |c: f64| tail.iter().all(|&(t, v)| v <= c * v1 * (c * t * w1).exp());
    if tail.iter().all(|&(_, v)| v == 0.0) {
        return 0.0;
    }
    if v1 == 0.0 {
        return f64::INFINITY;
    }
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Margins of the vorticity, Calderón–Zygmund and Gronwall bounds along a
/// vorticity trajectory, for `2 ≤ p < ∞`. `t₁` is rounded to the nearest
/// sample time.
pub fn gronwall_diagnostic(traj: &Trajectory, p: f64, t1: f64) -> Result<GronwallReport> {
    if !(p.is_finite() && p >= 2.0) {
        return Err(Error::InvalidParameter(format!("p must satisfy 2 <= p < inf, got {p}")));
    }
    if !(t1 >= 0.0 && t1 <= traj.horizon() + 0.5 * traj.dt()) {
        return Err(Error::InvalidParameter(format!(
            "t1 = {t1} is outside [0, {}]",
            traj.horizon()
        )));
    }
    let norms: Vec<StateNorms> = traj
        .samples()
        .iter()
        .map(|w| state_norms(w, p))
        .collect::<Result<_>>()?;
    let times = traj.times();
    let i1 = ((t1 / traj.dt()).round() as usize).min(times.len() - 1);
    let (v1, w1) = (norms[i1].v, norms[i1].w);
    let cz = cz_constant(p);

    let rows: Vec<GronwallRow> = norms
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let t = times[i];
            let after = i >= i1;
            GronwallRow {
                t,
                norms: *n,
                cz_margin: cz * n.w - n.grad_v,
                vorticity_margin: after.then_some((1.0 + VORTICITY_SLACK) * w1 - n.w),
                monotone_margin: (i > 0).then(|| norms[i - 1].w - n.w),
                gronwall_margin: after.then(|| v1 * (t * w1).exp() - n.v),
            }
        })
        .collect();
    let tail: Vec<(f64, f64)> = rows[i1..].iter().map(|r| (r.t, r.norms.v)).collect();
    Ok(GronwallReport {
        p,
        t1: times[i1],
        min_cz_margin: min_of(rows.iter().map(|r| r.cz_margin)),
        min_vorticity_margin: min_of(rows.iter().filter_map(|r| r.vorticity_margin)),
        min_monotone_margin: min_of(rows.iter().filter_map(|r| r.monotone_margin)),
        min_gronwall_margin: min_of(rows.iter().filter_map(|r| r.gronwall_margin)),
        minimal_c: minimal_constant(v1, w1, &tail),
        rows,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_default()
}

/// CSV time series, one block of rows per report.
pub fn gronwall_csv(reports: &[GronwallReport]) -> String {
    let mut out = String::from("t,p,v_norm,w_norm,grad_v_norm,cz_margin,vorticity_margin,gronwall_margin\n");
    for r in reports {
        for row in &r.rows {
            writeln!(
                out,
                "{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
                row.t,
                r.p,
                row.norms.v,
                row.norms.w,
                row.norms.grad_v,
                row.cz_margin,
                opt(row.vorticity_margin),
                opt(row.gronwall_margin)
            )
            .expect("writing to a String");
        }
    }
    out
}
