//! Empirical constants for the Duhamel smoothing, bilinear product and
//! linear semigroup estimates, and scans of their dependence on `Ω`.
//!
//! "There is a constant `C`" is read as: the ensemble maximum of
//! LHS/RHS is finite and moves by less than 20% when the ensemble doubles.

use crate::error::{Error, Result};
use crate::field::{inverse_transform, SpectralField};
use crate::grid::Grid;
use crate::lp::{build_partition, fb_norm, BesovParams, DyadicPartition, Exponent, ShellHistory};
use crate::ops::products;
use crate::picard::{bilinear_b_trajectory, picard_solve, SolverConfig3D};
use crate::random::{random_divfree_field, SpectrumProfile};
use crate::semigroup::{duhamel_trajectory, linear_trajectory, DuhamelScheme};
use crate::trajectory::Trajectory;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Largest relative growth of the ensemble maximum, from the first half of
/// the ensemble to all of it, still read as stable.
pub const STABILITY_TOLERANCE: f64 = 0.2;

/// Relative spread of a scanned constant above which it is flagged.
pub const OMEGA_VARIATION_FLAG: f64 = 0.5;

/// Index tuple `(s, p, q, a, r, Ω)` of an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateParams {
    pub s: f64,
    pub p: Exponent,
    #[serde(default = "inf")]
    pub q: Exponent,
    #[serde(default = "one")]
    pub a: Exponent,
    pub r: Exponent,
    #[serde(default)]
    pub omega: f64,
}

fn inf() -> Exponent {
    Exponent::INF
}

fn one() -> Exponent {
    Exponent::ONE
}

impl EstimateParams {
    pub fn new(s: f64, p: Exponent, q: Exponent, a: Exponent, r: Exponent, omega: f64) -> Self {
        Self { s, p, q, a, r, omega }
    }

    fn with_q(mut self, q: Exponent) -> Self {
        self.q = q;
        self
    }
}

/// Random trajectories `e^{−t}(g + sin(ωt)h)` on a small periodic box.
/// Fields are divergence-free, Gaussian-shaped and confined to
/// `|k_i| ≤ (n/2 − 1)/2`, so pointwise products are alias-free.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSpec {
    pub n: usize,
    pub period_l: f64,
    pub horizon: f64,
    pub dt: f64,
    pub size: usize,
    pub seed: u64,
    pub xi_c: f64,
    /// Angular frequency `ω` of the optional oscillating part.
    pub oscillation: Option<f64>,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            n: 24,
            period_l: 2.0,
            horizon: 1.0,
            dt: 1.0 / 16.0,
            size: 20,
            seed: 0,
            xi_c: 1.5,
            oscillation: None,
        }
    }
}

impl EnsembleSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(3, self.n, self.period_l)
    }

    pub fn with_size(mut self, size: usize) -> Self {
        self.size = size;
        self
    }

    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.horizon > 0.0) {
            return Err(Error::InvalidParameter("horizon and dt must be positive".into()));
        }
        let m = (self.horizon / self.dt).round() as usize;
        if m == 0 || (m as f64 * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::InvalidParameter(format!(
                "horizon {} is not an integer multiple of dt {}",
                self.horizon, self.dt
            )));
        }
        Ok(m)
    }

    fn member_seed(&self, index: usize, slot: u64) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(4 * index as u64 + slot)
    }

    /// Random initial datum number `index` (`slot` separates the fields a
    /// member needs).
    pub fn field(&self, index: usize, slot: u64) -> Result<SpectralField> {
        let g = self.grid()?;
        let cut = ((self.n / 2).saturating_sub(1) / 2) as i64;
        let f = random_divfree_field(g, self.member_seed(index, slot), SpectrumProfile::Gaussian { xi_c: self.xi_c })?;
        Ok(f.apply_symbol(|idx| {
            if g.k_of(idx).iter().all(|k| k.abs() <= cut) {
                1.0
            } else {
                0.0
            }
        }))
    }

    /// Random trajectory number `index`.
    pub fn trajectory(&self, index: usize, slot: u64) -> Result<Trajectory> {
        let g0 = self.field(index, 2 * slot)?;
        let h = match self.oscillation {
            Some(_) => Some(self.field(index, 2 * slot + 1)?),
            None => None,
        };
        let omega = self.oscillation.unwrap_or(0.0);
        Trajectory::from_fn(self.dt, self.steps()?, |t| {
            let mut f = g0.clone();
            if let Some(h) = &h {
                f.axpy((omega * t).sin(), h).expect("same shape");
            }
            f.scaled((-t).exp())
        })
    }
}

/// Ratio statistics of one inequality over an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub inequality: String,
    pub params: EstimateParams,
    pub ensemble_size: usize,
    /// Members whose right-hand side vanished.
    pub discarded: usize,
    /// LHS/RHS of every retained member, in member order.
    pub ratios: Vec<f64>,
    pub max: f64,
    pub median: f64,
    /// Maximum over the first half of the ensemble.
    pub half_max: f64,
    /// `(max − half_max)/half_max`.
    pub stability: f64,
    pub pass: bool,
}

impl EstimateReport {
    /// Builds the statistics from per-member `(lhs, rhs)` pairs.
    pub fn from_pairs(inequality: &str, params: EstimateParams, pairs: &[(f64, f64)]) -> Self {
        let half = pairs.len().div_ceil(2);
        let mut ratios = Vec::with_capacity(pairs.len());
        let mut half_max = 0.0_f64;
        let mut discarded = 0;
        for (i, &(lhs, rhs)) in pairs.iter().enumerate() {
            if rhs > 0.0 {
                let r = lhs / rhs;
                if i < half {
                    half_max = half_max.max(r);
                }
                ratios.push(r);
            } else {
                discarded += 1;
            }
        }
        let max = ratios.iter().fold(0.0_f64, |m, &r| m.max(r));
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let median = match sorted.len() {
            0 => 0.0,
            n if n % 2 == 1 => sorted[n / 2],
            n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
        };
        let stability = if half_max > 0.0 {
            (max - half_max) / half_max
        } else if max > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self {
            inequality: inequality.to_string(),
            params,
            ensemble_size: pairs.len(),
            discarded,
            ratios,
            max,
            median,
            half_max,
            stability,
            pass: max.is_finite() && stability < STABILITY_TOLERANCE,
        }
    }
}

fn check_time_exponents(q: Exponent, a: Exponent) -> Result<()> {
    if a > q {
        return Err(Error::InvalidParameter(format!(
            "time exponents need 1 <= a <= q <= inf, got a = {a}, q = {q}"
        )));
    }
    Ok(())
}

/// LHS and RHS of the Duhamel smoothing estimate for one forcing:
/// `‖∫₀ᵗT(t−τ)f‖_{L̃^q ḞB^s_{p,r}}` and `‖f‖_{L̃^a ḞB^{s−2−2/q+2/a}_{p,r}}`.
pub fn duhamel_sides(f: &Trajectory, part: &DyadicPartition, params: &EstimateParams) -> Result<(f64, f64)> {
    check_time_exponents(params.q, params.a)?;
    let integral = duhamel_trajectory(f, params.omega, DuhamelScheme::ExponentialMidpoint)?;
    let lhs = ShellHistory::new(&integral, part, params.p).chemin_lerner(params.s, params.r, params.q)?;
    let s_rhs = params.s - 2.0 - 2.0 * params.q.recip() + 2.0 * params.a.recip();
    let rhs = ShellHistory::new(f, part, params.p).chemin_lerner(s_rhs, params.r, params.a)?;
    Ok((lhs.total, rhs.total))
}

/// Duhamel smoothing estimate in Chemin–Lerner scales over a random
/// forcing ensemble.
pub fn verify_lemma21(params: &EstimateParams, ensemble: &EnsembleSpec) -> Result<EstimateReport> {
    check_time_exponents(params.q, params.a)?;
    let part = build_partition(&ensemble.grid()?);
    let pairs = (0..ensemble.size)
        .into_par_iter()
        .map(|i| duhamel_sides(&ensemble.trajectory(i, 0)?, &part, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateReport::from_pairs("duhamel_smoothing", *params, &pairs))
}

fn check_product_range(s: f64, p: Exponent) -> Result<()> {
    if p.value() <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "the product estimate needs 1 < p <= inf, got p = {p}"
        )));
    }
    let upper = 3.0 - 3.0 * p.recip();
    if !(s > -1.0 && s < upper) {
        return Err(Error::InvalidParameter(format!(
            "the product estimate needs -1 < s < {upper}, got s = {s}"
        )));
    }
    Ok(())
}

/// Pointwise tensor product `u_i v_j` (9 components), without truncation.
pub fn tensor_product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.ensure_same_shape(v)?;
    let n = u.ncomp();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    products(&inverse_transform(u), &inverse_transform(v), &pairs, false)
}

/// `‖u‖_{L̃^∞ ḞB^s} + ‖u‖_{L̃^1 ḞB^{4−3/p}}`.
pub fn y_norm(u: &Trajectory, part: &DyadicPartition, s: f64, p: Exponent, r: Exponent) -> Result<f64> {
    let h = ShellHistory::new(u, part, p);
    Ok(h.chemin_lerner(s, r, Exponent::INF)?.total + h.chemin_lerner(4.0 - 3.0 * p.recip(), r, Exponent::ONE)?.total)
}

/// LHS `‖uv‖_{L̃^1 ḞB^{s+1}}` and RHS `‖u‖_Y‖v‖_Y` of the product estimate.
pub fn bilinear_sides(u: &Trajectory, v: &Trajectory, part: &DyadicPartition, params: &EstimateParams) -> Result<(f64, f64)> {
    check_product_range(params.s, params.p)?;
    u.ensure_aligned(v)?;
    let prod = u
        .samples()
        .iter()
        .zip(v.samples())
        .map(|(a, b)| tensor_product(a, b))
        .collect::<Result<Vec<_>>>()?;
    let prod = Trajectory::new(u.dt(), prod)?;
    let lhs = ShellHistory::new(&prod, part, params.p).chemin_lerner(params.s + 1.0, params.r, Exponent::ONE)?;
    let rhs = y_norm(u, part, params.s, params.p, params.r)? * y_norm(v, part, params.s, params.p, params.r)?;
    Ok((lhs.total, rhs))
}

/// Product estimate over random trajectory pairs.
pub fn verify_bilinear22(params: &EstimateParams, ensemble: &EnsembleSpec) -> Result<EstimateReport> {
    check_product_range(params.s, params.p)?;
    let part = build_partition(&ensemble.grid()?);
    let pairs = (0..ensemble.size)
        .into_par_iter()
        .map(|i| bilinear_sides(&ensemble.trajectory(i, 0)?, &ensemble.trajectory(i, 1)?, &part, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateReport::from_pairs("bilinear_product", *params, &pairs))
}

/// Sampling of `[0, T]` for the linear estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub dt: f64,
}

impl TimeGrid {
    fn steps(&self) -> Result<usize> {
        EnsembleSpec {
            horizon: self.horizon,
            dt: self.dt,
            ..Default::default()
        }
        .steps()
    }
}

/// Both linear estimates: `sup_t` in `ḞB^s` and `L¹_t` in `ḞB^{s+2}`,
/// each against `‖u₀‖_{ḞB^s}`, `s = 2 − 3/p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearReports {
    pub sup: EstimateReport,
    pub integrated: EstimateReport,
}

/// `(‖T u₀‖_{L̃^∞ḞB^s}, ‖T u₀‖_{L̃^1ḞB^{s+2}}, ‖u₀‖_{ḞB^s})`.
pub fn linear_sides(
    u0: &SpectralField,
    part: &DyadicPartition,
    p: Exponent,
    r: Exponent,
    omega: f64,
    time: TimeGrid,
) -> Result<(f64, f64, f64)> {
    let s = 2.0 - 3.0 * p.recip();
    let traj = linear_trajectory(u0, time.dt, time.steps()?, omega)?;
    let h = ShellHistory::new(&traj, part, p);
    let sup = h.chemin_lerner(s, r, Exponent::INF)?.total;
    let l1 = h.chemin_lerner(s + 2.0, r, Exponent::ONE)?.total;
    let norm = fb_norm(u0, part, BesovParams::new(s, p, r)).total;
    Ok((sup, l1, norm))
}

/// Linear semigroup estimates over an ensemble of initial data.
pub fn verify_linear32(u0s: &[SpectralField], p: Exponent, r: Exponent, omega: f64, time: TimeGrid) -> Result<LinearReports> {
    let params = EstimateParams::new(2.0 - 3.0 * p.recip(), p, Exponent::INF, Exponent::INF, r, omega);
    let Some(first) = u0s.first() else {
        return Ok(LinearReports {
            sup: EstimateReport::from_pairs("linear_sup", params, &[]),
            integrated: EstimateReport::from_pairs("linear_integrated", params.with_q(Exponent::ONE), &[]),
        });
    };
    let part = build_partition(first.grid());
    let sides = u0s
        .par_iter()
        .map(|u| linear_sides(u, &part, p, r, omega, time))
        .collect::<Result<Vec<_>>>()?;
    let sup: Vec<(f64, f64)> = sides.iter().map(|x| (x.0, x.2)).collect();
    let l1: Vec<(f64, f64)> = sides.iter().map(|x| (x.1, x.2)).collect();
    Ok(LinearReports {
        sup: EstimateReport::from_pairs("linear_sup", params, &sup),
        integrated: EstimateReport::from_pairs("linear_integrated", params.with_q(Exponent::ONE), &l1),
    })
}

/// Initial data of an ensemble (`slot` 0 of every member).
pub fn ensemble_initial_data(ensemble: &EnsembleSpec) -> Result<Vec<SpectralField>> {
    (0..ensemble.size).map(|i| ensemble.field(i, 0)).collect()
}

/// Empirical constant for the smallness gate: the larger of the linear and
/// bilinear ensemble maxima.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCalibration {
    pub linear_constant: f64,
    /// `max ‖B(u,v)‖_X / (‖u‖_X‖v‖_X)`.
    pub bilinear_constant: f64,
    pub c_emp: f64,
}

/// Calibrates the gate constant on an ensemble at the given `Ω`.
pub fn calibrate_gate_constant(ensemble: &EnsembleSpec, p: Exponent, r: Exponent, omega: f64) -> Result<GateCalibration> {
    let time = TimeGrid {
        horizon: ensemble.horizon,
        dt: ensemble.dt,
    };
    let lin = verify_linear32(&ensemble_initial_data(ensemble)?, p, r, omega, time)?;
    let part = build_partition(&ensemble.grid()?);
    let bil: Vec<f64> = (0..ensemble.size)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let u = ensemble.trajectory(i, 0)?;
            let v = ensemble.trajectory(i, 1)?;
            let b = bilinear_b_trajectory(&u, &v, omega, DuhamelScheme::ExponentialMidpoint, true)?;
            let xb = ShellHistory::new(&b, &part, p).x_norm(r)?;
            let xu = ShellHistory::new(&u, &part, p).x_norm(r)?;
            let xv = ShellHistory::new(&v, &part, p).x_norm(r)?;
            Ok(if xu * xv > 0.0 { xb / (xu * xv) } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    let linear_constant = lin.sup.max.max(lin.integrated.max);
    let bilinear_constant = bil.iter().fold(0.0_f64, |m, &x| m.max(x));
    Ok(GateCalibration {
        linear_constant,
        bilinear_constant,
        c_emp: linear_constant.max(bilinear_constant),
    })
}

/// Experiments whose constant is tabulated against `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanExperiment {
    /// Ensemble maximum of the linear estimates.
    LinearConstant { ensemble: EnsembleSpec, p: Exponent, r: Exponent },
    /// Ensemble maximum of the Duhamel smoothing estimate.
    DuhamelConstant { ensemble: EnsembleSpec, params: EstimateParams },
    /// Gate constant from [`calibrate_gate_constant`].
    GateConstant { ensemble: EnsembleSpec, p: Exponent, r: Exponent },
    /// Largest contraction ratio of the Picard iteration for a fixed datum
    /// `amplitude·(random field)`.
    ContractionRatio { config: SolverConfig3D, seed: u64, xi_c: f64, amplitude: f64 },
}

impl ScanExperiment {
    pub fn name(&self) -> &'static str {
        match self {
            ScanExperiment::LinearConstant { .. } => "linear_constant",
            ScanExperiment::DuhamelConstant { .. } => "duhamel_constant",
            ScanExperiment::GateConstant { .. } => "gate_constant",
            ScanExperiment::ContractionRatio { .. } => "contraction_ratio",
        }
    }

    fn constant(&self, omega: f64) -> Result<f64> {
        match self {
            ScanExperiment::LinearConstant { ensemble, p, r } => {
                let time = TimeGrid {
                    horizon: ensemble.horizon,
                    dt: ensemble.dt,
                };
                let rep = verify_linear32(&ensemble_initial_data(ensemble)?, *p, *r, omega, time)?;
                Ok(rep.sup.max.max(rep.integrated.max))
            }
            ScanExperiment::DuhamelConstant { ensemble, params } => {
                let params = EstimateParams { omega, ..*params };
                Ok(verify_lemma21(&params, ensemble)?.max)
            }
            ScanExperiment::GateConstant { ensemble, p, r } => Ok(calibrate_gate_constant(ensemble, *p, *r, omega)?.c_emp),
            ScanExperiment::ContractionRatio {
                config,
                seed,
                xi_c,
                amplitude,
            } => {
                let cfg = SolverConfig3D {
                    omega,
                    ..config.clone()
                };
                let u0 = random_divfree_field(cfg.grid()?, *seed, SpectrumProfile::Gaussian { xi_c: *xi_c })?.scaled(*amplitude);
                let out = picard_solve(&u0, &cfg)?;
                Ok(out.diagnostics.max_ratio().unwrap_or(0.0))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub omega: f64,
    pub constant: f64,
}

/// Empirical constant against `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmegaScanReport {
    pub experiment: String,
    pub rows: Vec<ScanRow>,
    /// `(max − min)/min` over the rows.
    pub variation: f64,
    /// Variation above 50%.
    pub flagged: bool,
}

/// Tabulates the experiment's constant for every `Ω` in order.
pub fn omega_independence_scan(experiment: &ScanExperiment, omegas: &[f64]) -> Result<OmegaScanReport> {
    let rows = omegas
        .iter()
        .map(|&omega| Ok(ScanRow { omega, constant: experiment.constant(omega)? }))
        .collect::<Result<Vec<_>>>()?;
    let lo = rows.iter().fold(f64::INFINITY, |m, r| m.min(r.constant));
    let hi = rows.iter().fold(0.0_f64, |m, r| m.max(r.constant));
    let variation = if rows.is_empty() || hi == 0.0 {
        0.0
    } else if lo > 0.0 {
        (hi - lo) / lo
    } else {
        f64::INFINITY
    };
    Ok(OmegaScanReport {
        experiment: experiment.name().to_string(),
        rows,
        variation,
        flagged: variation > OMEGA_VARIATION_FLAG,
    })
}

/// One CSV line per report.
pub fn reports_csv(reports: &[EstimateReport]) -> String {
    let mut out = String::from("inequality,s,p,q,a,r,omega,ensemble_size,discarded,max,median,half_max,stability,pass\n");
    for r in reports {
        let p = &r.params;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            r.inequality,
            p.s,
            p.p,
            p.q,
            p.a,
            p.r,
            p.omega,
            r.ensemble_size,
            r.discarded,
            r.max,
            r.median,
            r.half_max,
            r.stability,
            r.pass
        )
        .expect("writing to a String");
    }
    out
}
