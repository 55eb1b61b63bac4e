use super::vorticity::{biot_savart, VorticityState, VorticityStepper};
use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField};
use crate::grid::Grid;
use crate::ops::gradient;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// `M = −(Ω/2)[[0, −1], [1, 0]]`; `e^{tM}` is the rotation by `−Ωt/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationMatrix2D {
    pub omega: f64,
}

impl RotationMatrix2D {
    pub fn new(omega: f64) -> Self {
        Self { omega }
    }

    pub fn generator(&self) -> [[f64; 2]; 2] {
        let h = 0.5 * self.omega;
        [[0.0, h], [-h, 0.0]]
    }

    pub fn exp(&self, t: f64) -> [[f64; 2]; 2] {
        let (s, c) = (0.5 * self.omega * t).sin_cos();
        [[c, s], [-s, c]]
    }

    pub fn apply(&self, t: f64, x: [f64; 2]) -> [f64; 2] {
        mat_vec(self.exp(t), x)
    }
}

fn mat_vec(a: [[f64; 2]; 2], x: [f64; 2]) -> [f64; 2] {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

fn transpose(a: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Direct evaluation of real 2D trigonometric polynomials at arbitrary
/// points. Several scalar fields share the exponential tables.
pub struct FourierEvaluator {
    k1: usize,
    k2: usize,
    inv_l: f64,
    /// Per field, `(k1max+1)·(2·k2max+1)` coefficients over the half plane
    /// `k₁ ≥ 0`, already doubled where the conjugate partner is dropped.
    coeffs: Vec<Vec<Complex64>>,
}

impl FourierEvaluator {
    /// Uses every non-Nyquist mode with a nonzero coefficient.
    pub fn new(fields: &[&SpectralField]) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidParameter("nothing to evaluate".into()))?;
        let g = *first.grid();
        if g.dim() != 2 {
            return Err(Error::DimensionMismatch {
                required: 2,
                actual: g.dim(),
            });
        }
        let mut k1 = 0usize;
        let mut k2 = 0usize;
        for f in fields {
            if f.grid() != &g {
                return Err(Error::GridMismatch);
            }
            if f.ncomp() != 1 {
                return Err(Error::ComponentMismatch {
                    expected: 1,
                    actual: f.ncomp(),
                });
            }
            for (idx, c) in f.component(0).iter().enumerate() {
                if *c != Complex64::new(0.0, 0.0) && !g.is_nyquist(idx) {
                    let k = g.k_of(idx);
                    k1 = k1.max(k[0].unsigned_abs() as usize);
                    k2 = k2.max(k[1].unsigned_abs() as usize);
                }
            }
        }
        let w2 = 2 * k2 + 1;
        let coeffs = fields
            .iter()
            .map(|f| {
                let src = f.component(0);
                let mut out = vec![Complex64::new(0.0, 0.0); (k1 + 1) * w2];
                for a in 0..=k1 as i64 {
                    for b in -(k2 as i64)..=k2 as i64 {
                        let weight = match (a, b.signum()) {
                            (0, -1) => 0.0,
                            (0, 0) => 1.0,
                            _ => 2.0,
                        };
                        let slot = a as usize * w2 + (b + k2 as i64) as usize;
                        out[slot] = src[g.index_of([a, b, 0])] * weight;
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            k1,
            k2,
            inv_l: 1.0 / g.period_l(),
            coeffs,
        })
    }

    pub fn fields(&self) -> usize {
        self.coeffs.len()
    }

    /// Values of every field at `y`, written to `out`.
    pub fn eval_into(&self, y: [f64; 2], out: &mut [f64]) {
        let w2 = 2 * self.k2 + 1;
        let e1 = powers(y[0] * self.inv_l, self.k1, 0);
        let e2 = powers(y[1] * self.inv_l, self.k2, self.k2);
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            let mut total = 0.0;
            for (a, row) in c.chunks_exact(w2).enumerate() {
                let s: Complex64 = row.iter().zip(&e2).map(|(c, e)| c * e).sum();
                total += (e1[a] * s).re;
            }
            *o = total;
        }
    }

    /// Values at many points, `result[point][field]`.
    pub fn eval_many(&self, points: &[[f64; 2]]) -> Vec<Vec<f64>> {
        points
            .par_iter()
            .map(|&y| {
                let mut out = vec![0.0; self.fields()];
                self.eval_into(y, &mut out);
                out
            })
            .collect()
    }
}

/// `e^{i k θ}` for `k = −neg..=kmax`.
fn powers(theta: f64, kmax: usize, neg: usize) -> Vec<Complex64> {
    let top = kmax.max(neg);
    let (s, c) = theta.sin_cos();
    let step = Complex64::new(c, s);
    let mut pos = Vec::with_capacity(top + 1);
    pos.push(Complex64::new(1.0, 0.0));
    for k in 1..=top {
        // Restart the recurrence now and then to bound round-off growth.
        let v = if k % 16 == 0 {
            Complex64::from_polar(1.0, k as f64 * theta)
        } else {
            pos[k - 1] * step
        };
        pos.push(v);
    }
    (0..neg)
        .rev()
        .map(|k| pos[k + 1].conj())
        .chain(pos[..=kmax].iter().copied())
        .collect()
}

/// Points `c + e^{tM}(x − c)` for grid points `x`, rotation about the box
/// center `c`.
fn rotated(rot: &RotationMatrix2D, t: f64, center: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    let r = rot.apply(t, [x[0] - center[0], x[1] - center[1]]);
    [center[0] + r[0], center[1] + r[1]]
}

fn center_of(g: &Grid) -> [f64; 2] {
    let c = g.center();
    [c[0], c[1]]
}

/// `v(t, x) = e^{−tM}u(t, c + e^{tM}(x − c))` on every grid point, with the
/// box center `c` as origin of the rotation. Scalar fields are evaluated
/// without component rotation; two-component fields are rotated back.
pub fn rotating_frame_transform(u: &SpectralField, t: f64, omega: f64) -> Result<PhysicalField> {
    let g = *u.grid();
    if g.dim() != 2 {
        return Err(Error::DimensionMismatch {
            required: 2,
            actual: g.dim(),
        });
    }
    if !matches!(u.ncomp(), 1 | 2) {
        return Err(Error::ComponentMismatch {
            expected: 2,
            actual: u.ncomp(),
        });
    }
    let parts: Vec<SpectralField> = (0..u.ncomp()).map(|c| u.scalar(c)).collect();
    let refs: Vec<&SpectralField> = parts.iter().collect();
    let ev = FourierEvaluator::new(&refs)?;
    let rot = RotationMatrix2D::new(omega);
    let c = center_of(&g);
    let points: Vec<[f64; 2]> = (0..g.len())
        .map(|i| {
            let x = g.point(i);
            rotated(&rot, t, c, [x[0], x[1]])
        })
        .collect();
    let vals = ev.eval_many(&points);
    let back = transpose(rot.exp(t));
    let comps = if u.ncomp() == 1 {
        vec![vals.iter().map(|v| v[0]).collect()]
    } else {
        let r: Vec<[f64; 2]> = vals.iter().map(|v| mat_vec(back, [v[0], v[1]])).collect();
        vec![r.iter().map(|v| v[0]).collect(), r.iter().map(|v| v[1]).collect()]
    };
    PhysicalField::new(g, comps)
}

/// Grid points inside a disk about the box center, with an outer ring used
/// to detect data that reaches the edge of the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorMask {
    pub center: [f64; 2],
    pub radius: f64,
    pub ring_width: f64,
    pub points: Vec<[f64; 2]>,
    pub on_ring: Vec<bool>,
}

impl InteriorMask {
    /// Disk of radius `fraction·πL`; the ring is the outer two grid spacings.
    pub fn disk(grid: &Grid, fraction: f64) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::DimensionMismatch {
                required: 2,
                actual: grid.dim(),
            });
        }
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mask fraction must lie in (0, 1), got {fraction}"
            )));
        }
        let center = center_of(grid);
        let radius = fraction * std::f64::consts::PI * grid.period_l();
        let ring_width = 2.0 * grid.dx();
        let mut points = Vec::new();
        let mut on_ring = Vec::new();
        for i in 0..grid.len() {
            let x = grid.point(i);
            let r = (x[0] - center[0]).hypot(x[1] - center[1]);
            if r <= radius {
                points.push([x[0], x[1]]);
                on_ring.push(r > radius - ring_width);
            }
        }
        Ok(Self {
            center,
            radius,
            ring_width,
            points,
            on_ring,
        })
    }
}

/// Three consecutive inertial-frame vorticity samples `t−h, t, t+h`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeWindow {
    pub t: f64,
    pub h: f64,
    pub samples: [SpectralField; 3],
}

impl TimeWindow {
    /// Multiplies each sample by `f(time)`; used to build perturbed series.
    pub fn map_in_time(&self, f: impl Fn(f64) -> f64) -> TimeWindow {
        let ts = [self.t - self.h, self.t, self.t + self.h];
        TimeWindow {
            t: self.t,
            h: self.h,
            samples: [0, 1, 2].map(|i| self.samples[i].scaled(f(ts[i]))),
        }
    }
}

/// Runs the vorticity solver with step `dt` and keeps the windows centered
/// on steps `centers` (each at least 1).
pub fn sample_windows(state: &VorticityState, dt: f64, centers: &[usize]) -> Result<Vec<TimeWindow>> {
    if centers.contains(&0) {
        return Err(Error::InvalidParameter("window centers must be positive steps".into()));
    }
    let last = centers.iter().copied().max().unwrap_or(0) + 1;
    let mut out: Vec<(usize, Vec<SpectralField>)> = centers.iter().map(|&c| (c, Vec::new())).collect();
    let stepper = VorticityStepper::new(state.w.grid(), dt)?;
    let mut w = state.w.clone();
    for step in 0..=last {
        for (c, buf) in out.iter_mut() {
            if step + 1 >= *c && step <= *c + 1 {
                buf.push(w.clone());
            }
        }
        if step < last {
            w = stepper.step(&w)?;
        }
    }
    Ok(out
        .into_iter()
        .map(|(c, buf)| {
            let [a, b, d]: [SpectralField; 3] = buf.try_into().expect("three samples per window");
            TimeWindow {
                t: state.t + c as f64 * dt,
                h: dt,
                samples: [a, b, d],
            }
        })
        .collect())
}

/// Pointwise residual of the rotating-frame vorticity equation at one time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    pub max_residual: f64,
    pub max_time_derivative: f64,
    pub ring_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub omega: f64,
    pub samples: Vec<ResidualSample>,
    pub max_residual: f64,
}

/// Largest ratio of `|∇w|` on the mask ring to its maximum over the mask
/// that is accepted before the data counts as touching the boundary.
pub const RING_TOLERANCE: f64 = 1e-6;

/// Residual of `∂_t w − Δw + v·∇w − Mx·∇w = 0` for
/// `w(t, x) = w_u(t, c + e^{tM}(x − c))` and `v = e^{−tM}u(t, ·)` built from
/// inertial-frame windows, on the mask points. The time derivative is a
/// central difference over each window.
pub fn residual_4_5(windows: &[TimeWindow], omega: f64, mask: &InteriorMask) -> Result<ResidualReport> {
    let rot = RotationMatrix2D::new(omega);
    let m = rot.generator();
    let c = mask.center;
    let mut samples = Vec::with_capacity(windows.len());
    for win in windows {
        let wm = &win.samples[1];
        let vel = biot_savart(wm)?;
        let grad = gradient(wm)?;
        let lap = crate::ops::laplacian(wm);
        let fields = [wm.clone(), grad.scalar(0), grad.scalar(1), lap, vel.scalar(0), vel.scalar(1)];
        let refs: Vec<&SpectralField> = fields.iter().collect();
        let mid = FourierEvaluator::new(&refs)?;
        let before = FourierEvaluator::new(&[&win.samples[0]])?;
        let after = FourierEvaluator::new(&[&win.samples[2]])?;
        let back = transpose(rot.exp(win.t));

        let rows: Vec<(f64, f64, f64, bool)> = mask
            .points
            .par_iter()
            .zip(&mask.on_ring)
            .map(|(&x, &ring)| {
                let mut v = [0.0; 6];
                mid.eval_into(rotated(&rot, win.t, c, x), &mut v);
                let mut wa = [0.0];
                let mut wb = [0.0];
                before.eval_into(rotated(&rot, win.t - win.h, c, x), &mut wa);
                after.eval_into(rotated(&rot, win.t + win.h, c, x), &mut wb);
                let dt = (wb[0] - wa[0]) / (2.0 * win.h);
                let gx = mat_vec(back, [v[1], v[2]]);
                let vx = mat_vec(back, [v[4], v[5]]);
                let mx = mat_vec(m, [x[0] - c[0], x[1] - c[1]]);
                let adv = (vx[0] - mx[0]) * gx[0] + (vx[1] - mx[1]) * gx[1];
                let res = dt - v[3] + adv;
                (res.abs(), dt.abs(), gx[0].hypot(gx[1]), ring)
            })
            .collect();
        let max_residual = rows.iter().fold(0.0_f64, |a, r| a.max(r.0));
        let max_dt = rows.iter().fold(0.0_f64, |a, r| a.max(r.1));
        let g_all = rows.iter().fold(0.0_f64, |a, r| a.max(r.2));
        let g_ring = rows.iter().filter(|r| r.3).fold(0.0_f64, |a, r| a.max(r.2));
        let ring_ratio = if g_all == 0.0 { 0.0 } else { g_ring / g_all };
        if ring_ratio > RING_TOLERANCE {
            return Err(Error::SupportAtMaskBoundary(ring_ratio));
        }
        samples.push(ResidualSample {
            t: win.t,
            max_residual,
            max_time_derivative: max_dt,
            ring_ratio,
        });
    }
    let max_residual = samples.iter().fold(0.0_f64, |a, s| a.max(s.max_residual));
    Ok(ResidualReport {
        omega,
        samples,
        max_residual,
    })
}

/// Zero-mean Gaussian vortex `e^{−|x−x_c|²/width}` truncated to the 2/3 band,
/// centered at `offset` from the box center.
pub fn gaussian_vortex(grid: Grid, offset: [f64; 2], width: f64) -> Result<SpectralField> {
    let c = center_of(&grid);
    let xc = [c[0] + offset[0], c[1] + offset[1]];
    let mut w = crate::field::forward_transform(&PhysicalField::from_fn(grid, 1, |x, _| {
        (-((x[0] - xc[0]).powi(2) + (x[1] - xc[1]).powi(2)) / width).exp()
    }));
    w.dealias();
    w.zero_mean();
    Ok(w)
}
