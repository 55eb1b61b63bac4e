use super::exponent::Exponent;
use super::partition::DyadicPartition;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{Grid, WaveVector};
use num_complex::Complex64;
use crate::trajectory::Trajectory;
use serde::{Deserialize, Serialize};

/// Indices of a Fourier–Besov or Chemin–Lerner norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
    /// Time exponent; only read by the Chemin–Lerner norm.
    #[serde(default = "inf")]
    pub q: Exponent,
}

fn inf() -> Exponent {
    Exponent::INF
}

impl BesovParams {
    pub fn new(s: f64, p: Exponent, r: Exponent) -> Self {
        Self {
            s,
            p,
            r,
            q: Exponent::INF,
        }
    }

    /// Scale-critical regularity `s = 2 − 3/p`.
    pub fn critical(p: Exponent, r: Exponent) -> Self {
        Self::new(2.0 - 3.0 * p.recip(), p, r)
    }

    pub fn with_q(mut self, q: Exponent) -> Self {
        self.q = q;
        self
    }
}

/// Why a shell's value is only a lattice surrogate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellFlag {
    /// Inner edge below the smallest lattice frequency.
    BelowLattice,
    /// Outer edge beyond the dealiased band.
    BeyondBand,
}

/// Per-shell weighted values and their `l^r` aggregate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub params: BesovParams,
    /// `(j, 2^{js}·value_j)` for every shell in range.
    pub shells: Vec<(i32, f64)>,
    pub total: f64,
    pub truncation_flags: Vec<(i32, ShellFlag)>,
    /// Bound on the part of a time integral beyond the sampled horizon,
    /// assuming decay no slower than `e^{−(Δξ)²t}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

/// `l^r` aggregation; `r = ∞` is the max.
pub fn aggregate_lr(values: &[f64], r: Exponent) -> f64 {
    if r.is_infinite() {
        values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else {
        let r = r.value();
        values.iter().map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Unweighted `‖φ_j f̂‖_{L^p}` for every shell in range, with the lattice
/// quadrature weight `(Δξ)^{dim/p}` and the pointwise Euclidean magnitude
/// over components.
pub fn shell_lp_norms(f: &SpectralField, part: &DyadicPartition, p: Exponent) -> Vec<(i32, f64)> {
    let g = part.grid();
    assert_eq!(f.grid(), g, "field and partition grids differ");
    let range = part.range();
    let mut acc = vec![0.0_f64; range.len()];
    for idx in 1..g.len() {
        let m2: f64 = f.components().iter().map(|c| c[idx].norm_sqr()).sum();
        if m2 == 0.0 {
            continue;
        }
        let m = m2.sqrt();
        for (j, w) in part.shells_at(idx) {
            if w == 0.0 || !range.contains(j) {
                continue;
            }
            let slot = &mut acc[(j - range.j_min) as usize];
            let v = w * m;
            if p.is_infinite() {
                *slot = slot.max(v);
            } else if p == Exponent::TWO {
                *slot += v * v;
            } else {
                *slot += v.powf(p.value());
            }
        }
    }
    let weight = g.dxi().powi(g.dim() as i32);
    range
        .iter()
        .zip(acc)
        .map(|(j, a)| {
            let v = if p.is_infinite() {
                a
            } else {
                (a * weight).powf(1.0 / p.value())
            };
            (j, v)
        })
        .collect()
}

fn flags(part: &DyadicPartition) -> Vec<(i32, ShellFlag)> {
    part.range()
        .iter()
        .filter_map(|j| part.shell_flag(j).map(|f| (j, f)))
        .collect()
}

fn weighted(raw: &[(i32, f64)], s: f64) -> Vec<(i32, f64)> {
    raw.iter().map(|&(j, v)| (j, 2f64.powf(j as f64 * s) * v)).collect()
}

/// Homogeneous Fourier–Besov norm `‖{2^{js}‖φ_j f̂‖_{L^p}}_j‖_{l^r}`.
pub fn fb_norm(f: &SpectralField, part: &DyadicPartition, params: BesovParams) -> NormReport {
    let shells = weighted(&shell_lp_norms(f, part, params.p), params.s);
    let values: Vec<f64> = shells.iter().map(|s| s.1).collect();
    NormReport {
        params,
        total: aggregate_lr(&values, params.r),
        shells,
        truncation_flags: flags(part),
        tail_bound: None,
    }
}

/// Lattice samples of the dilated profile `f̂_λ(ξ) = λ^{−2} f̂(ξ/λ)`, the
/// Fourier side of `u ↦ λu(λ·)` in three dimensions.
pub fn dyadic_rescale<F>(grid: Grid, ncomp: usize, lambda: f64, profile: F) -> SpectralField
where
    F: Fn(WaveVector, usize) -> Complex64 + Sync,
{
    let inv = 1.0 / lambda;
    let amp = inv * inv;
    SpectralField::from_profile(grid, ncomp, |xi, c| {
        profile(WaveVector([xi.0[0] * inv, xi.0[1] * inv, xi.0[2] * inv]), c) * amp
    })
}

/// Shell norms `‖φ_j û(t_i)‖_{L^p}` for every sample of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellHistory {
    dt: f64,
    p: Exponent,
    shells: Vec<i32>,
    /// `[sample][shell]`.
    values: Vec<Vec<f64>>,
    dxi: f64,
    flags: Vec<(i32, ShellFlag)>,
}

impl ShellHistory {
    pub fn new(traj: &Trajectory, part: &DyadicPartition, p: Exponent) -> Self {
        use rayon::prelude::*;
        let rows: Vec<Vec<(i32, f64)>> = traj
            .samples()
            .par_iter()
            .map(|s| shell_lp_norms(s, part, p))
            .collect();
        Self {
            dt: traj.dt(),
            p,
            shells: part.range().iter().collect(),
            values: rows
                .into_iter()
                .map(|r| r.into_iter().map(|x| x.1).collect())
                .collect(),
            dxi: part.grid().dxi(),
            flags: flags(part),
        }
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn shells(&self) -> &[i32] {
        &self.shells
    }

    pub fn samples(&self) -> usize {
        self.values.len()
    }

    /// `‖φ_j û‖_{L^q_t L^p_ξ}` per shell: max for `q = ∞`, composite
    /// trapezoid otherwise.
    pub fn time_norms(&self, q: Exponent) -> Result<Vec<f64>> {
        if self.values.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if !q.is_infinite() && self.values.len() < 2 {
            return Err(Error::InsufficientSamples(
                "a finite time exponent needs at least two samples".into(),
            ));
        }
        let out = (0..self.shells.len())
            .map(|k| {
                let col = self.values.iter().map(|row| row[k]);
                if q.is_infinite() {
                    col.fold(0.0_f64, f64::max)
                } else {
                    let q = q.value();
                    let last = self.values.len() - 1;
                    let integral: f64 = col
                        .enumerate()
                        .map(|(i, v)| {
                            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                            w * v.powf(q)
                        })
                        .sum::<f64>()
                        * self.dt;
                    integral.powf(1.0 / q)
                }
            })
            .collect();
        Ok(out)
    }

    /// Chemin–Lerner norm from the stored shell history.
    pub fn chemin_lerner(&self, s: f64, r: Exponent, q: Exponent) -> Result<NormReport> {
        let raw: Vec<(i32, f64)> = self
            .shells
            .iter()
            .copied()
            .zip(self.time_norms(q)?)
            .collect();
        let shells = weighted(&raw, s);
        let values: Vec<f64> = shells.iter().map(|x| x.1).collect();
        let tail_bound = (!q.is_infinite()).then(|| {
            let c = self.dxi * self.dxi;
            let last = self.values.last().expect("nonempty");
            let tails: Vec<f64> = self
                .shells
                .iter()
                .zip(last)
                .map(|(&j, &a)| 2f64.powf(j as f64 * s) * a / (q.value() * c).powf(1.0 / q.value()))
                .collect();
            aggregate_lr(&tails, r)
        });
        Ok(NormReport {
            params: BesovParams { s, p: self.p, r, q },
            total: aggregate_lr(&values, r),
            shells,
            truncation_flags: self.flags.clone(),
            tail_bound,
        })
    }

    /// `‖u‖_{L̃^∞ ḞB^{2−3/p}} + ‖u‖_{L̃^1 ḞB^{4−3/p}}`.
    pub fn x_norm(&self, r: Exponent) -> Result<f64> {
        let s = 2.0 - 3.0 * self.p.recip();
        let a = self.chemin_lerner(s, r, Exponent::INF)?.total;
        let b = self.chemin_lerner(s + 2.0, r, Exponent::ONE)?.total;
        Ok(a + b)
    }
}

/// Chemin–Lerner norm `‖{2^{js}‖φ_j û‖_{L^q_t L^p_ξ}}_j‖_{l^r}` on the
/// sampled horizon.
pub fn chemin_lerner_norm(
    traj: &Trajectory,
    part: &DyadicPartition,
    params: BesovParams,
) -> Result<NormReport> {
    ShellHistory::new(traj, part, params.p).chemin_lerner(params.s, params.r, params.q)
}

/// Norm of the space `L̃^∞(ḞB^{2−3/p}_{p,r}) ∩ L̃^1(ḞB^{4−3/p}_{p,r})`.
pub fn x_norm(traj: &Trajectory, part: &DyadicPartition, p: Exponent, r: Exponent) -> Result<f64> {
    ShellHistory::new(traj, part, p).x_norm(r)
}
