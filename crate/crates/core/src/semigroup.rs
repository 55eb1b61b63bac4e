//! The Stokes–Coriolis semigroup as a per-mode 3×3 multiplier, and Duhamel
//! integrals against it.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{Grid, WaveVector};
use crate::ops::{coriolis_matrix, derivative_xi, divergence};
use crate::trajectory::Trajectory;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

type Mat3 = [[f64; 3]; 3];

const ZERO_MAT: Mat3 = [[0.0; 3]; 3];

/// Relative divergence above which [`apply_semigroup`] refuses its input.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

/// `e^{−|ξ|²t}[cos(Ωξ₃t/|ξ|)·Id + sin(Ωξ₃t/|ξ|)·R(ξ)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupMultiplier {
    pub omega: f64,
}

impl SemigroupMultiplier {
    pub fn new(omega: f64) -> Self {
        Self { omega }
    }

    /// The matrix at wave vector ξ and time t; zero at ξ = 0.
    pub fn matrix(&self, xi: WaveVector, t: f64) -> Mat3 {
        self.matrix_split(xi, xi.norm_sq(), t)
    }

    /// Direction and rotation phase from `dir`, heat decay from `|ξ|² = decay`.
    fn matrix_split(&self, dir: WaveVector, decay: f64, t: f64) -> Mat3 {
        if decay == 0.0 {
            return ZERO_MAT;
        }
        let heat = (-decay * t).exp();
        let Ok(r) = coriolis_matrix(dir) else {
            return [[heat, 0.0, 0.0], [0.0, heat, 0.0], [0.0, 0.0, heat]];
        };
        let theta = self.omega * dir[2] * t / dir.norm();
        let (s, c) = theta.sin_cos();
        let mut m = ZERO_MAT;
        for (a, row) in m.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                let id = if a == b { c } else { 0.0 };
                *v = heat * (id + s * r[a][b]);
            }
        }
        m
    }

    /// Per-mode matrices on a grid. The direction uses the same wave vector
    /// as the discrete divergence (Nyquist entries zeroed), so the multiplier
    /// maps discretely solenoidal fields to discretely solenoidal fields.
    pub fn on_grid(&self, grid: &Grid, t: f64) -> ModeMatrices {
        let mats = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let dir = WaveVector(derivative_xi(grid, idx));
                self.matrix_split(dir, grid.xi_of(idx).norm_sq(), t)
            })
            .collect();
        ModeMatrices { grid: *grid, mats }
    }
}

/// Precomputed multiplier matrices, one per lattice mode.
#[derive(Clone, Debug)]
pub struct ModeMatrices {
    grid: Grid,
    mats: Vec<Mat3>,
}

impl ModeMatrices {
    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        assert_eq!(f.grid(), &self.grid, "field and multiplier grids differ");
        assert_eq!(f.ncomp(), 3, "the semigroup acts on 3-vector fields");
        let out: Vec<[Complex64; 3]> = (0..self.grid.len())
            .into_par_iter()
            .map(|idx| {
                let m = &self.mats[idx];
                let v = [f.component(0)[idx], f.component(1)[idx], f.component(2)[idx]];
                let mut o = [Complex64::new(0.0, 0.0); 3];
                for a in 0..3 {
                    o[a] = v[0] * m[a][0] + v[1] * m[a][1] + v[2] * m[a][2];
                }
                o
            })
            .collect();
        let mut comps = vec![Vec::with_capacity(out.len()); 3];
        for o in out {
            for a in 0..3 {
                comps[a].push(o[a]);
            }
        }
        SpectralField::from_components(self.grid, comps).expect("shape preserved")
    }
}

/// Relative discrete divergence `‖div f‖₂ / ‖|ξ| f̂‖₂` (zero for `f = 0`).
pub fn relative_divergence(f: &SpectralField) -> Result<f64> {
    let g = *f.grid();
    let d = divergence(f)?.l2_norm();
    let scale = f.apply_symbol(|idx| g.xi_of(idx).norm()).l2_norm();
    Ok(if scale == 0.0 { 0.0 } else { d / scale })
}

fn require_3d(f: &SpectralField) -> Result<()> {
    let dim = f.grid().dim();
    if dim != 3 {
        return Err(Error::DimensionMismatch {
            required: 3,
            actual: dim,
        });
    }
    if f.ncomp() != 3 {
        return Err(Error::ComponentMismatch {
            expected: 3,
            actual: f.ncomp(),
        });
    }
    Ok(())
}

/// `T(t)f` for a divergence-free 3D field.
pub fn apply_semigroup(f: &SpectralField, t: f64, omega: f64) -> Result<SpectralField> {
    require_3d(f)?;
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let rel = relative_divergence(f)?;
    if rel > DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree(rel));
    }
    Ok(SemigroupMultiplier::new(omega).on_grid(f.grid(), t).apply(f))
}

/// Quadrature for `∫₀ᵗ T(t−τ)g(τ)dτ` on the forcing's time grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuhamelScheme {
    /// `Δt Σ T(t − τ_{i+½})(g_i + g_{i+1})/2`.
    #[default]
    ExponentialMidpoint,
    /// `Δt Σ [T(t − τ_i)g_i + T(t − τ_{i+1})g_{i+1}]/2`.
    Trapezoid,
}

fn steps_to(forcing: &Trajectory, t: f64) -> Result<usize> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let dt = forcing.dt();
    let m = (t / dt).round() as usize;
    if ((m as f64) * dt - t).abs() > 1e-9 * dt.max(t) {
        return Err(Error::InvalidParameter(format!(
            "time {t} is not on the forcing grid (dt = {dt})"
        )));
    }
    if m + 1 > forcing.len() {
        return Err(Error::InsufficientSamples(format!(
            "integrating to t = {t} needs {} samples, forcing has {}",
            m + 1,
            forcing.len()
        )));
    }
    Ok(m)
}

/// `∫₀ᵗ T(t−τ)g(τ)dτ` with the chosen quadrature; forcing samples `g_i` at
/// `τ_i = iΔt` must cover `[0, t]`.
pub fn duhamel(forcing: &Trajectory, t: f64, omega: f64, scheme: DuhamelScheme) -> Result<SpectralField> {
    require_3d(&forcing.samples()[0])?;
    let m = steps_to(forcing, t)?;
    let g = *forcing.grid();
    let mut acc = SpectralField::zeros(g, 3);
    if m == 0 {
        return Ok(acc);
    }
    let dt = forcing.dt();
    let mult = SemigroupMultiplier::new(omega);
    let samples = forcing.samples();
    match scheme {
        DuhamelScheme::ExponentialMidpoint => {
            for i in 0..m {
                let mid = samples[i].add(&samples[i + 1])?.scaled(0.5);
                let lag = t - (i as f64 + 0.5) * dt;
                acc.axpy(dt, &mult.on_grid(&g, lag).apply(&mid))?;
            }
        }
        DuhamelScheme::Trapezoid => {
            for (i, s) in samples.iter().enumerate().take(m + 1) {
                let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                let lag = t - i as f64 * dt;
                acc.axpy(w * dt, &mult.on_grid(&g, lag).apply(s))?;
            }
        }
    }
    Ok(acc)
}

/// Node-to-node Duhamel integrator with the multiplier matrices for one
/// step and one half step precomputed.
#[derive(Clone, Debug)]
pub struct DuhamelPropagator {
    dt: f64,
    scheme: DuhamelScheme,
    full: ModeMatrices,
    half: ModeMatrices,
}

impl DuhamelPropagator {
    pub fn new(grid: &Grid, dt: f64, omega: f64, scheme: DuhamelScheme) -> Self {
        let mult = SemigroupMultiplier::new(omega);
        Self {
            dt,
            scheme,
            full: mult.on_grid(grid, dt),
            half: mult.on_grid(grid, 0.5 * dt),
        }
    }

    /// `t_m ↦ ∫₀^{t_m} T(t_m−τ)g(τ)dτ` at every node, by the recurrence
    /// `I_{m+1} = T(Δt)I_m + (one-step quadrature)`, which is exact in the
    /// semigroup law for divergence-free forcing.
    pub fn integrate(&self, forcing: &Trajectory) -> Result<Trajectory> {
        require_3d(&forcing.samples()[0])?;
        if forcing.dt() != self.dt {
            return Err(Error::InvalidParameter(format!(
                "forcing step {} differs from propagator step {}",
                forcing.dt(),
                self.dt
            )));
        }
        let g = *forcing.grid();
        let dt = self.dt;
        let samples = forcing.samples();
        let mut out = Vec::with_capacity(samples.len());
        out.push(SpectralField::zeros(g, 3));
        for i in 0..samples.len() - 1 {
            let prev = out.last().expect("nonempty");
            let next = match self.scheme {
                DuhamelScheme::ExponentialMidpoint => {
                    let mid = samples[i].add(&samples[i + 1])?.scaled(0.5);
                    let mut x = self.full.apply(prev);
                    x.axpy(dt, &self.half.apply(&mid))?;
                    x
                }
                DuhamelScheme::Trapezoid => {
                    let mut x = self.full.apply(&prev.add(&samples[i].scaled(0.5 * dt))?);
                    x.axpy(0.5 * dt, &samples[i + 1])?;
                    x
                }
            };
            out.push(next);
        }
        Trajectory::new(dt, out)
    }
}

/// `t_m ↦ ∫₀^{t_m} T(t_m−τ)g(τ)dτ` at every node (see [`DuhamelPropagator`]).
pub fn duhamel_trajectory(forcing: &Trajectory, omega: f64, scheme: DuhamelScheme) -> Result<Trajectory> {
    require_3d(&forcing.samples()[0])?;
    DuhamelPropagator::new(forcing.grid(), forcing.dt(), omega, scheme).integrate(forcing)
}

/// `t ↦ T(t)u₀` sampled on `steps + 1` nodes, each evaluated directly.
pub fn linear_trajectory(u0: &SpectralField, dt: f64, steps: usize, omega: f64) -> Result<Trajectory> {
    require_3d(u0)?;
    let rel = relative_divergence(u0)?;
    if rel > DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree(rel));
    }
    let mult = SemigroupMultiplier::new(omega);
    let samples = (0..=steps)
        .into_par_iter()
        .map(|i| mult.on_grid(u0.grid(), i as f64 * dt).apply(u0))
        .collect();
    Trajectory::new(dt, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{helmholtz_project, laplacian};
    use crate::random::{random_divfree_field, random_vector_field, SpectrumProfile};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn grid() -> Grid {
        Grid::new(3, 16, 4.0).unwrap()
    }

    #[test]
    fn time_zero_is_identity() {
        let f = random_divfree_field(grid(), 1, SpectrumProfile::default()).unwrap();
        assert_eq!(apply_semigroup(&f, 0.0, 7.0).unwrap(), f);
    }

    #[test]
    fn no_rotation_is_heat_flow() {
        let g = grid();
        let f = random_divfree_field(g, 2, SpectrumProfile::default()).unwrap();
        let t = 0.3;
        let heat = f.apply_symbol(|idx| (-g.xi_of(idx).norm_sq() * t).exp());
        let out = apply_semigroup(&f, t, 0.0).unwrap();
        assert!(out.sub(&heat).unwrap().max_abs() <= 1e-15);
    }

    #[test]
    fn single_mode_oracle() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let f = SpectralField::real_mode(g, [0, 0, 1], &[c(1.0), c(0.0), c(0.0)]);
        let out = apply_semigroup(&f, 0.1, 10.0).unwrap();
        let idx = g.index_of([0, 0, 1]);
        let e = (-0.1_f64).exp();
        let want = [e * 1f64.cos(), -e * 1f64.sin(), 0.0];
        for a in 0..3 {
            assert!((out.component(a)[idx] - c(want[a])).norm() < 1e-15);
        }
        assert!((want[0] - 0.4889).abs() < 1e-4 && (want[1] + 0.7614).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        let g = grid();
        let f = random_divfree_field(g, 3, SpectrumProfile::default()).unwrap();
        assert!(matches!(apply_semigroup(&f, -1.0, 0.0), Err(Error::NegativeTime(_))));
        let rough = random_vector_field(g, 3, SpectrumProfile::default());
        assert!(matches!(apply_semigroup(&rough, 0.1, 0.0), Err(Error::NotDivergenceFree(_))));
        let g2 = Grid::new(2, 16, 4.0).unwrap();
        assert!(matches!(
            apply_semigroup(&SpectralField::zeros(g2, 2), 0.1, 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn semigroup_law_divergence_and_decay() {
        let g = grid();
        for seed in 0..5 {
            let f = random_divfree_field(g, seed, SpectrumProfile::Gaussian { xi_c: 2.0 }).unwrap();
            for (t, s) in [(0.1, 0.3), (0.3, 0.1)] {
                let a = apply_semigroup(&f, t + s, 10.0).unwrap();
                let b = apply_semigroup(&apply_semigroup(&f, s, 10.0).unwrap(), t, 10.0).unwrap();
                assert!(a.sub(&b).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
                assert!(divergence(&a).unwrap().max_abs() <= 1e-12);
                let bound = (-(g.xi_min().powi(2)) * (t + s)).exp() * f.l2_norm();
                assert!(a.l2_norm() <= bound * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn commutes_with_projection() {
        let g = grid();
        let f = random_vector_field(g, 9, SpectrumProfile::default());
        let m = SemigroupMultiplier::new(5.0).on_grid(&g, 0.2);
        let a = m.apply(&helmholtz_project(&f).unwrap());
        let b = helmholtz_project(&m.apply(&f)).unwrap();
        assert!(a.sub(&b).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn oscillation_is_isometric_on_single_modes() {
        let g = grid();
        let f = SpectralField::real_mode(g, [1, 2, 3], &[c(2.0), c(-1.0), c(0.0)]);
        let base = apply_semigroup(&f, 0.4, 0.0).unwrap().l2_norm();
        for omega in [1.0, 10.0, 100.0] {
            let n = apply_semigroup(&f, 0.4, omega).unwrap().l2_norm();
            assert!((n - base).abs() <= 1e-12 * base);
        }
    }

    #[test]
    fn matrix_norm_bound() {
        let m = SemigroupMultiplier::new(3.0);
        let xi = WaveVector::new(0.3, -0.7, 1.1);
        let t = 0.5;
        let mat = m.matrix(xi, t);
        let frob: f64 = mat.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        assert!(frob <= 3f64.sqrt() * (-xi.norm_sq() * t).exp() + 1e-15);
        assert_eq!(m.matrix(WaveVector::new(0.0, 0.0, 0.0), t), ZERO_MAT);
    }

    fn constant_forcing(g: Grid, a: [f64; 3], k: [i64; 3], dt: f64, steps: usize) -> Trajectory {
        let f = SpectralField::real_mode(g, k, &a.map(c));
        Trajectory::new(dt, vec![f; steps + 1]).unwrap()
    }

    #[test]
    fn zero_forcing() {
        let g = grid();
        let tr = Trajectory::new(0.1, vec![SpectralField::zeros(g, 3); 4]).unwrap();
        assert_eq!(duhamel(&tr, 0.3, 1.0, DuhamelScheme::default()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn constant_forcing_heat_oracle_converges_at_second_order() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let k = [0, 1, 1];
        let xi2: f64 = 2.0;
        let t = 1.0;
        let exact = (1.0 - (-t * xi2).exp()) / xi2;
        for scheme in [DuhamelScheme::ExponentialMidpoint, DuhamelScheme::Trapezoid] {
            let mut errs = Vec::new();
            for steps in [16, 32] {
                let tr = constant_forcing(g, [1.0, 0.0, 0.0], k, t / steps as f64, steps);
                let out = duhamel(&tr, t, 0.0, scheme).unwrap();
                errs.push((out.component(0)[g.index_of(k)].re - exact).abs());
            }
            let order = (errs[0] / errs[1]).log2();
            assert!(order > 1.9 && order < 2.1, "{scheme:?}: {errs:?}");
        }
    }

    #[test]
    fn constant_forcing_rotating_oracle() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let k = [1, 0, 2];
        let xi = g.xi_of(g.index_of(k));
        let a = [0.0, 1.0, 0.0];
        let omega = 10.0;
        let t = 0.5;
        let w = omega * xi[2] / xi.norm();
        let z = Complex64::new(-xi.norm_sq(), w);
        let cf = ((z * t).exp() - 1.0) / z;
        let r = coriolis_matrix(xi).unwrap();
        let ra: Vec<f64> = (0..3).map(|i| (0..3).map(|j| r[i][j] * a[j]).sum()).collect();
        let steps = 400;
        let tr = constant_forcing(g, a, k, t / steps as f64, steps);
        let out = duhamel(&tr, t, omega, DuhamelScheme::ExponentialMidpoint).unwrap();
        for i in 0..3 {
            let want = cf.re * a[i] + cf.im * ra[i];
            assert!((out.component(i)[g.index_of(k)].re - want).abs() < 1e-5, "{i}");
        }
    }

    #[test]
    fn recurrence_matches_direct_sum() {
        let g = grid();
        let base = random_divfree_field(g, 4, SpectrumProfile::default()).unwrap();
        let other = random_divfree_field(g, 5, SpectrumProfile::default()).unwrap();
        let dt = 0.05;
        let tr = Trajectory::from_fn(dt, 8, |t| {
            let mut f = base.scaled((-t).exp());
            f.axpy(t.sin(), &other).unwrap();
            f
        })
        .unwrap();
        for scheme in [DuhamelScheme::ExponentialMidpoint, DuhamelScheme::Trapezoid] {
            let rec = duhamel_trajectory(&tr, 20.0, scheme).unwrap();
            for m in [0, 3, 8] {
                let direct = duhamel(&tr, m as f64 * dt, 20.0, scheme).unwrap();
                assert!(rec.samples()[m].sub(&direct).unwrap().l2_norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn off_grid_and_short_forcing_are_errors() {
        let g = grid();
        let tr = Trajectory::new(0.1, vec![SpectralField::zeros(g, 3); 3]).unwrap();
        assert!(matches!(duhamel(&tr, 0.5, 0.0, DuhamelScheme::default()), Err(Error::InsufficientSamples(_))));
        assert!(duhamel(&tr, 0.15, 0.0, DuhamelScheme::default()).is_err());
    }

    #[test]
    fn linear_trajectory_solves_the_linear_system() {
        // ∂_t u = Δu − Ωℙ(e₃×u), checked by a central difference.
        let g = grid();
        let u0 = random_divfree_field(g, 6, SpectrumProfile::default()).unwrap();
        let omega = 3.0;
        let h = 1e-4;
        let tr = linear_trajectory(&u0, h, 2, omega).unwrap();
        let s = tr.samples();
        let dudt = s[2].sub(&s[0]).unwrap().scaled(0.5 / h);
        let mut rhs = laplacian(&s[1]);
        let cor = helmholtz_project(&crate::ops::e3_cross(&s[1]).unwrap()).unwrap();
        rhs.axpy(-omega, &cor).unwrap();
        assert!(dudt.sub(&rhs).unwrap().l2_norm() <= 1e-6 * rhs.l2_norm());
    }
}
