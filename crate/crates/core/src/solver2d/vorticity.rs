use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, PhysicalField, SpectralField};
use crate::grid::Grid;
use crate::ops::{derivative_xi, e3_cross, gradient, helmholtz_project};
use crate::picard::nonlinear_term;
use crate::trajectory::Trajectory;
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn require_2d(g: &Grid) -> Result<()> {
    if g.dim() != 2 {
        return Err(Error::DimensionMismatch {
            required: 2,
            actual: g.dim(),
        });
    }
    Ok(())
}

fn require_zero_mean(w: &SpectralField) -> Result<()> {
    let mean = w.mean_mode();
    if mean > 1e-12 * w.l2_norm() {
        return Err(Error::NonzeroMean(mean));
    }
    Ok(())
}

/// Velocity with vorticity `w`: `v̂ = i(ξ₂, −ξ₁)ŵ/|ξ|²`, so that
/// `∂₁v₂ − ∂₂v₁ = w` and `div v = 0`.
pub fn biot_savart(w: &SpectralField) -> Result<SpectralField> {
    let g = *w.grid();
    require_2d(&g)?;
    if w.ncomp() != 1 {
        return Err(Error::ComponentMismatch {
            expected: 1,
            actual: w.ncomp(),
        });
    }
    require_zero_mean(w)?;
    let mut v1 = Vec::with_capacity(g.len());
    let mut v2 = Vec::with_capacity(g.len());
    for (idx, c) in w.component(0).iter().enumerate() {
        let xi = derivative_xi(&g, idx);
        let n2 = xi[0] * xi[0] + xi[1] * xi[1];
        if n2 == 0.0 {
            v1.push(Complex64::new(0.0, 0.0));
            v2.push(Complex64::new(0.0, 0.0));
        } else {
            v1.push(I * xi[1] / n2 * c);
            v2.push(-I * xi[0] / n2 * c);
        }
    }
    SpectralField::from_components(g, vec![v1, v2])
}

/// A 2D vorticity field at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct VorticityState {
    pub w: SpectralField,
    pub t: f64,
}

impl VorticityState {
    /// Wraps a scalar 2D vorticity; a mean mode at rounding level is removed.
    pub fn new(mut w: SpectralField, t: f64) -> Result<Self> {
        require_2d(w.grid())?;
        if w.ncomp() != 1 {
            return Err(Error::ComponentMismatch {
                expected: 1,
                actual: w.ncomp(),
            });
        }
        require_zero_mean(&w)?;
        w.zero_mean();
        Ok(Self { w, t })
    }

    pub fn velocity(&self) -> SpectralField {
        biot_savart(&self.w).expect("state invariants hold")
    }
}

/// Integrating-factor symbols `e^{−|ξ|²h}` and `e^{−|ξ|²h/2}`.
struct Factors {
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Factors {
    fn new(g: &Grid, h: f64) -> Self {
        let decay: Vec<f64> = (0..g.len()).map(|i| g.xi_of(i).norm_sq()).collect();
        Self {
            full: decay.iter().map(|d| (-d * h).exp()).collect(),
            half: decay.iter().map(|d| (-d * h * 0.5).exp()).collect(),
        }
    }
}

fn scaled_by(f: &SpectralField, e: &[f64]) -> SpectralField {
    f.apply_symbol(|i| e[i])
}

/// One integrating-factor RK4 step for `∂_t y = Δy + N(y)`.
fn if_rk4_step<N>(y: &SpectralField, h: f64, e: &Factors, n: &N) -> Result<SpectralField>
where
    N: Fn(&SpectralField) -> Result<SpectralField>,
{
    let k1 = n(y)?;
    let mut a = y.clone();
    a.axpy(0.5 * h, &k1)?;
    let k2 = n(&scaled_by(&a, &e.half))?;
    let ey = scaled_by(y, &e.half);
    let mut b = ey.clone();
    b.axpy(0.5 * h, &k2)?;
    let k3 = n(&b)?;
    let mut c = scaled_by(y, &e.full);
    c.axpy(h, &scaled_by(&k3, &e.half))?;
    let k4 = n(&c)?;

    let mut out = scaled_by(y, &e.full);
    out.axpy(h / 6.0, &scaled_by(&k1, &e.full))?;
    let mid = k2.add(&k3)?;
    out.axpy(h / 3.0, &scaled_by(&mid, &e.half))?;
    out.axpy(h / 6.0, &k4)?;
    Ok(out)
}

/// `−(v·∇w)` truncated to the 2/3 band, with `v` from Biot–Savart.
pub fn advection(w: &SpectralField) -> Result<SpectralField> {
    let g = *w.grid();
    let v = inverse_transform(&biot_savart(w)?);
    let dw = inverse_transform(&gradient(w)?);
    let prod: Vec<f64> = (0..g.len())
        .map(|i| -(v.component(0)[i] * dw.component(0)[i] + v.component(1)[i] * dw.component(1)[i]))
        .collect();
    let mut out = forward_transform(&PhysicalField::new(g, vec![prod])?);
    out.dealias();
    Ok(out)
}

/// Advective Courant number `max|v|·Δt/Δx` of a state.
pub fn courant(state: &VorticityState, dt: f64) -> f64 {
    let mag = inverse_transform(&state.velocity()).magnitude();
    mag.iter().fold(0.0_f64, |m, v| m.max(*v)) * dt / state.w.grid().dx()
}

fn check_step(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// One fixed-step integrating-factor RK4 map for the vorticity equation.
pub struct VorticityStepper {
    dt: f64,
    factors: Factors,
}

impl VorticityStepper {
    pub fn new(grid: &Grid, dt: f64) -> Result<Self> {
        require_2d(grid)?;
        check_step(dt)?;
        Ok(Self {
            dt,
            factors: Factors::new(grid, dt),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, w: &SpectralField) -> Result<SpectralField> {
        if_rk4_step(w, self.dt, &self.factors, &advection)
    }
}

/// Integrates `∂_t w − Δw + v·∇w = 0` by `steps` integrating-factor RK4
/// steps. Warns when the advective Courant number exceeds one.
pub fn advance_vorticity(state: &VorticityState, dt: f64, steps: usize) -> Result<VorticityState> {
    let traj = vorticity_trajectory(state, dt, steps, steps.max(1))?;
    let w = traj.last().clone();
    Ok(VorticityState {
        w,
        t: state.t + dt * steps as f64,
    })
}

/// Like [`advance_vorticity`], keeping every `every`-th state (the initial
/// state included) as a trajectory with step `every·dt`.
pub fn vorticity_trajectory(state: &VorticityState, dt: f64, steps: usize, every: usize) -> Result<Trajectory> {
    check_step(dt)?;
    if every == 0 {
        return Err(Error::InvalidParameter("sampling stride must be positive".into()));
    }
    let cfl = courant(state, dt);
    if cfl > 1.0 {
        log::warn!("advective Courant number {cfl:.3} exceeds 1 at t = {}", state.t);
    }
    let stepper = VorticityStepper::new(state.w.grid(), dt)?;
    let mut w = state.w.clone();
    let mut out = vec![w.clone()];
    for s in 1..=steps {
        w = stepper.step(&w)?;
        if s % every == 0 {
            out.push(w.clone());
        }
    }
    Trajectory::new(dt * every as f64, out)
}

/// Residual `‖ℙ(e₃×u)‖₂ / ‖u‖₂` of the Coriolis force after projection.
pub fn coriolis_projection_identity(u: &SpectralField) -> Result<f64> {
    require_2d(u.grid())?;
    let n = u.l2_norm();
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(helmholtz_project(&e3_cross(u)?)?.l2_norm() / n)
}

/// Velocity form of the 2D rotating equations,
/// `∂_t u − Δu + ℙ div(u⊗u) + Ωℙ(e₃×u) = 0`, by integrating-factor RK4.
/// Returns every `every`-th state.
pub fn velocity_trajectory_rotating(
    u0: &SpectralField,
    omega: f64,
    dt: f64,
    steps: usize,
    every: usize,
) -> Result<Trajectory> {
    require_2d(u0.grid())?;
    check_step(dt)?;
    if every == 0 {
        return Err(Error::InvalidParameter("sampling stride must be positive".into()));
    }
    let rhs = |u: &SpectralField| -> Result<SpectralField> {
        let mut out = nonlinear_term(u, true)?.scaled(-1.0);
        if omega != 0.0 {
            out.axpy(-omega, &helmholtz_project(&e3_cross(u)?)?)?;
        }
        Ok(out)
    };
    let e = Factors::new(u0.grid(), dt);
    let mut u = u0.clone();
    let mut out = vec![u.clone()];
    for s in 1..=steps {
        u = if_rk4_step(&u, dt, &e, &rhs)?;
        if s % every == 0 {
            out.push(u.clone());
        }
    }
    Trajectory::new(dt * every as f64, out)
}

/// Final state of [`velocity_trajectory_rotating`].
pub fn advance_velocity_rotating(u0: &SpectralField, omega: f64, dt: f64, steps: usize) -> Result<SpectralField> {
    Ok(velocity_trajectory_rotating(u0, omega, dt, steps, steps.max(1))?
        .last()
        .clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{curl, divergence};
    use crate::random::{random_divfree_field, random_scalar_field, SpectrumProfile};

    fn tg_vorticity(g: Grid) -> SpectralField {
        let mut w = forward_transform(&PhysicalField::from_fn(g, 1, |x, _| -2.0 * x[0].cos() * x[1].cos()));
        w.zero_mean();
        w
    }

    #[test]
    fn taylor_green_velocity() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let v = biot_savart(&tg_vorticity(g)).unwrap();
        let want = forward_transform(&PhysicalField::from_fn(g, 2, |x, c| {
            if c == 0 {
                x[0].cos() * x[1].sin()
            } else {
                -x[0].sin() * x[1].cos()
            }
        }));
        assert!(v.sub(&want).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn inverse_of_curl() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        assert_eq!(biot_savart(&SpectralField::zeros(g, 1)).unwrap().max_abs(), 0.0);
        let w = random_scalar_field(g, 3, SpectrumProfile::Gaussian { xi_c: 3.0 });
        let v = biot_savart(&w).unwrap();
        assert!(curl(&v).unwrap().sub(&w).unwrap().l2_norm() <= 1e-12 * w.l2_norm());
        assert!(divergence(&v).unwrap().max_abs() <= 1e-12);
        let mut m = w.clone();
        m.component_mut(0)[0] = Complex64::new(1.0, 0.0);
        assert!(matches!(biot_savart(&m), Err(Error::NonzeroMean(_))));
    }

    #[test]
    fn taylor_green_decays_exactly() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let w0 = tg_vorticity(g);
        let s = advance_vorticity(&VorticityState::new(w0.clone(), 0.0).unwrap(), 1e-2, 50).unwrap();
        let want = w0.scaled((-1.0_f64).exp());
        assert!(s.w.sub(&want).unwrap().l2_norm() <= 1e-12 * want.l2_norm());
        assert!((s.t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let s = advance_vorticity(&VorticityState::new(SpectralField::zeros(g, 1), 0.0).unwrap(), 0.01, 5).unwrap();
        assert_eq!(s.w.max_abs(), 0.0);
    }

    #[test]
    fn rk4_is_fourth_order_on_a_nonlinear_flow() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let w0 = random_scalar_field(g, 8, SpectrumProfile::Gaussian { xi_c: 3.0 }).scaled(20.0);
        let st = VorticityState::new(w0, 0.0).unwrap();
        let reference = advance_vorticity(&st, 0.2 / 256.0, 256).unwrap().w;
        let e1 = advance_vorticity(&st, 0.2 / 16.0, 16).unwrap().w.sub(&reference).unwrap().l2_norm();
        let e2 = advance_vorticity(&st, 0.2 / 32.0, 32).unwrap().w.sub(&reference).unwrap().l2_norm();
        let order = (e1 / e2).log2();
        assert!(order > 3.7, "observed order {order} ({e1:e}, {e2:e})");
    }

    #[test]
    fn coriolis_force_is_a_gradient_in_2d() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        for seed in 0..5 {
            let u = random_divfree_field(g, seed, SpectrumProfile::Gaussian { xi_c: 4.0 }).unwrap();
            assert!(coriolis_projection_identity(&u).unwrap() <= 1e-12);
        }
        let gr = gradient(&random_scalar_field(g, 1, SpectrumProfile::Gaussian { xi_c: 4.0 })).unwrap();
        assert!(coriolis_projection_identity(&gr).unwrap() > 0.5);
    }

    #[test]
    fn velocity_and_vorticity_forms_agree() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let w0 = random_scalar_field(g, 2, SpectrumProfile::Gaussian { xi_c: 3.0 }).scaled(5.0);
        let u0 = biot_savart(&w0).unwrap();
        let dt = 1e-3;
        let u = advance_velocity_rotating(&u0, 7.0, dt, 100).unwrap();
        let w = advance_vorticity(&VorticityState::new(w0, 0.0).unwrap(), dt, 100).unwrap().w;
        let cu = curl(&u).unwrap();
        assert!(cu.sub(&w).unwrap().l2_norm() <= 1e-10 * w.l2_norm());
    }
}
