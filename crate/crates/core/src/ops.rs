//! Spectral differential operators, the Leray projection and the Coriolis
//! rotation matrix R(ξ).

use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, PhysicalField, SpectralField};
use crate::grid::{Grid, WaveVector};
use num_complex::Complex64;
use rayon::prelude::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Wave vector used for odd-order derivative symbols: the Nyquist wavenumber
/// has no conjugate partner on the lattice, so its derivative is set to zero.
#[inline]
pub(crate) fn derivative_xi(grid: &Grid, idx: usize) -> [f64; 3] {
    let k = grid.k_of(idx);
    let half = -(grid.n() as i64) / 2;
    let s = grid.dxi();
    let c = |v: i64| if v == half { 0.0 } else { v as f64 * s };
    [c(k[0]), c(k[1]), c(k[2])]
}

fn require_vector(f: &SpectralField) -> Result<()> {
    let dim = f.grid().dim();
    if f.ncomp() != dim {
        return Err(Error::ComponentMismatch {
            expected: dim,
            actual: f.ncomp(),
        });
    }
    Ok(())
}

fn require_scalar(f: &SpectralField) -> Result<()> {
    if f.ncomp() != 1 {
        return Err(Error::ComponentMismatch {
            expected: 1,
            actual: f.ncomp(),
        });
    }
    Ok(())
}

/// ∂/∂x_axis applied to every component (symbol iξ_axis).
pub fn derivative(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    let g = *f.grid();
    if axis >= g.dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} out of range for a {}D grid",
            g.dim()
        )));
    }
    let comps = f
        .components()
        .iter()
        .map(|c| {
            c.par_iter()
                .enumerate()
                .map(|(idx, v)| I * derivative_xi(&g, idx)[axis] * v)
                .collect()
        })
        .collect();
    SpectralField::from_components(g, comps)
}

/// Gradient of a scalar field.
pub fn gradient(f: &SpectralField) -> Result<SpectralField> {
    require_scalar(f)?;
    let g = *f.grid();
    let comps = (0..g.dim())
        .map(|axis| derivative(f, axis).map(|d| d.into_components().remove(0)))
        .collect::<Result<Vec<_>>>()?;
    SpectralField::from_components(g, comps)
}

/// Divergence of a vector field (symbol iξ·).
pub fn divergence(f: &SpectralField) -> Result<SpectralField> {
    require_vector(f)?;
    let g = *f.grid();
    let out: Vec<Complex64> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let xi = derivative_xi(&g, idx);
            (0..g.dim()).map(|a| I * xi[a] * f.component(a)[idx]).sum()
        })
        .collect();
    SpectralField::from_components(g, vec![out])
}

/// Curl: a 3-vector in 3D (iξ×), a scalar `∂₁f₂ − ∂₂f₁` in 2D.
pub fn curl(f: &SpectralField) -> Result<SpectralField> {
    require_vector(f)?;
    let g = *f.grid();
    if g.dim() == 2 {
        let out = (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let xi = derivative_xi(&g, idx);
                I * (xi[0] * f.component(1)[idx] - xi[1] * f.component(0)[idx])
            })
            .collect();
        return SpectralField::from_components(g, vec![out]);
    }
    let comps = (0..3)
        .map(|c| {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            (0..g.len())
                .into_par_iter()
                .map(|idx| {
                    let xi = derivative_xi(&g, idx);
                    I * (xi[a] * f.component(b)[idx] - xi[b] * f.component(a)[idx])
                })
                .collect()
        })
        .collect();
    SpectralField::from_components(g, comps)
}

/// Laplacian (symbol −|ξ|²) on every component.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    f.apply_symbol(|idx| -g.xi_of(idx).norm_sq())
}

/// Leray–Helmholtz projection onto divergence-free fields.
///
/// Symbol `δ_ij − ξ_iξ_j/|ξ|²`; the ξ = 0 mode is set to zero. The wave
/// vector is the one used by [`divergence`], so the Nyquist component is
/// zero and the result is exactly solenoidal for the discrete divergence.
pub fn helmholtz_project(f: &SpectralField) -> Result<SpectralField> {
    require_vector(f)?;
    let g = *f.grid();
    let dim = g.dim();
    let mut comps = vec![Vec::with_capacity(g.len()); dim];
    let projected: Vec<[Complex64; 3]> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let mut out = [Complex64::new(0.0, 0.0); 3];
            if idx == 0 {
                return out;
            }
            let xi = derivative_xi(&g, idx);
            let n2: f64 = xi.iter().map(|v| v * v).sum();
            if n2 == 0.0 {
                for (a, o) in out.iter_mut().enumerate().take(dim) {
                    *o = f.component(a)[idx];
                }
                return out;
            }
            let dot: Complex64 = (0..dim).map(|a| xi[a] * f.component(a)[idx]).sum();
            for (a, o) in out.iter_mut().enumerate().take(dim) {
                *o = f.component(a)[idx] - dot * (xi[a] / n2);
            }
            out
        })
        .collect();
    for v in projected {
        for (a, c) in comps.iter_mut().enumerate() {
            c.push(v[a]);
        }
    }
    SpectralField::from_components(g, comps)
}

/// Riesz transform R_j with symbol −iξ_j/|ξ| (zero at ξ = 0).
pub fn riesz(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    let g = *f.grid();
    if axis >= g.dim() {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    let comps = f
        .components()
        .iter()
        .map(|c| {
            c.par_iter()
                .enumerate()
                .map(|(idx, v)| {
                    let xi = g.xi_of(idx);
                    let n = xi.norm();
                    if n == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        -I * (xi[axis] / n) * v
                    }
                })
                .collect()
        })
        .collect();
    SpectralField::from_components(g, comps)
}

/// The skew matrix R(ξ) of the rotating Stokes semigroup:
/// rows `(0, ξ₃, −ξ₂; −ξ₃, 0, ξ₁; ξ₂, −ξ₁, 0) / |ξ|`.
pub fn coriolis_matrix(xi: WaveVector) -> Result<[[f64; 3]; 3]> {
    let n = xi.norm();
    if n == 0.0 {
        return Err(Error::ZeroWaveVector);
    }
    let [a, b, c] = [xi[0] / n, xi[1] / n, xi[2] / n];
    Ok([[0.0, c, -b], [-c, 0.0, a], [b, -a, 0.0]])
}

/// `e₃ × u`: `(−u₂, u₁, 0)` in 3D and `(−u₂, u₁)` in 2D.
pub fn e3_cross(u: &SpectralField) -> Result<SpectralField> {
    require_vector(u)?;
    let g = *u.grid();
    let mut comps = vec![
        u.component(1).iter().map(|v| -v).collect::<Vec<_>>(),
        u.component(0).to_vec(),
    ];
    if g.dim() == 3 {
        comps.push(vec![Complex64::new(0.0, 0.0); g.len()]);
    }
    SpectralField::from_components(g, comps)
}

/// Pseudo-spectral products: each entry of `pairs` is `(a, b)` indexing
/// components of the two physical fields; products are transformed back and
/// optionally truncated to the 2/3 band.
pub fn products(
    a: &PhysicalField,
    b: &PhysicalField,
    pairs: &[(usize, usize)],
    dealias: bool,
) -> Result<SpectralField> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let g = *a.grid();
    let comps: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(i, j)| {
            a.component(i)
                .iter()
                .zip(b.component(j))
                .map(|(x, y)| x * y)
                .collect()
        })
        .collect();
    let mut out = forward_transform(&PhysicalField::new(g, comps)?);
    if dealias {
        out.dealias();
    }
    Ok(out)
}

/// Dealiased product of two scalar fields.
pub fn scalar_product(u: &SpectralField, v: &SpectralField, dealias: bool) -> Result<SpectralField> {
    require_scalar(u)?;
    require_scalar(v)?;
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    products(&inverse_transform(u), &inverse_transform(v), &[(0, 0)], dealias)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhysicalField;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band_field(grid: Grid, ncomp: usize, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phys = PhysicalField::new(
            grid,
            (0..ncomp)
                .map(|_| (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
        )
        .unwrap();
        let mut f = forward_transform(&phys);
        f.dealias();
        f.zero_mean();
        f
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let g = Grid::new(3, 16, 2.0).unwrap();
        let s = random_band_field(g, 1, 1);
        let lhs = divergence(&gradient(&s).unwrap()).unwrap();
        let rhs = laplacian(&s);
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-13 * rhs.max_abs());
    }

    #[test]
    fn taylor_green_curl_2d() {
        // u = (cos x1 sin x2, −sin x1 cos x2) ⇒ ∂1u2 − ∂2u1 = −2 cos x1 cos x2.
        let g = Grid::new(2, 16, 1.0).unwrap();
        let u = forward_transform(&PhysicalField::from_fn(g, 2, |x, c| {
            if c == 0 {
                x[0].cos() * x[1].sin()
            } else {
                -x[0].sin() * x[1].cos()
            }
        }));
        let w = inverse_transform(&curl(&u).unwrap());
        let expected = PhysicalField::from_fn(g, 1, |x, _| -2.0 * x[0].cos() * x[1].cos());
        assert!(w.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn curl_of_gradient_vanishes_3d() {
        let g = Grid::new(3, 16, 4.0).unwrap();
        let s = random_band_field(g, 1, 2);
        let grad = gradient(&s).unwrap();
        let c = curl(&grad).unwrap();
        assert!(c.max_abs() <= 1e-13 * grad.max_abs().max(1.0));
        let v = random_band_field(g, 3, 3);
        let dc = divergence(&curl(&v).unwrap()).unwrap();
        assert!(dc.max_abs() <= 1e-13);
    }

    #[test]
    fn wrong_component_count() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let s = SpectralField::zeros(g, 1);
        assert!(divergence(&s).is_err());
        assert!(curl(&s).is_err());
        assert!(helmholtz_project(&s).is_err());
    }

    #[test]
    fn projection_kills_gradients() {
        let g = Grid::new(3, 16, 4.0).unwrap();
        let s = random_band_field(g, 1, 4);
        let grad = gradient(&s).unwrap();
        let p = helmholtz_project(&grad).unwrap();
        assert!(p.max_abs() <= 1e-13 * grad.max_abs());
    }

    #[test]
    fn projection_fixes_divergence_free_mode() {
        let g = Grid::new(3, 8, 4.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let f = SpectralField::real_mode(g, [0, 0, 1], &[one, zero, zero]);
        assert_eq!(helmholtz_project(&f).unwrap(), f);
    }

    #[test]
    fn projection_of_diagonal_mode() {
        // ξ ∝ (1,1,0), a = (1,0,0): (δ − ξξᵀ/|ξ|²)a = (1/2, −1/2, 0).
        let g = Grid::new(3, 8, 4.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let f = SpectralField::real_mode(g, [1, 1, 0], &[one, zero, zero]);
        let p = helmholtz_project(&f).unwrap();
        let idx = g.index_of([1, 1, 0]);
        assert!((p.component(0)[idx] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((p.component(1)[idx] - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!(p.component(2)[idx].norm() < 1e-15);
    }

    #[test]
    fn projection_matches_riesz_form() {
        // P = δ_ij + R_i R_j with R_j = −iξ_j/|ξ|.
        let g = Grid::new(3, 8, 4.0).unwrap();
        let f = random_band_field(g, 3, 11);
        let p = helmholtz_project(&f).unwrap();
        for i in 0..3 {
            let mut acc = f.scalar(i);
            for j in 0..3 {
                let rr = riesz(&riesz(&f.scalar(j), j).unwrap(), i).unwrap();
                acc.axpy(1.0, &rr).unwrap();
            }
            assert!(acc.sub(&p.scalar(i)).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn coriolis_matrix_cases() {
        let r = coriolis_matrix(WaveVector::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(r, [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let xi = WaveVector::new(1.0, 2.0, 3.0);
        let r = coriolis_matrix(xi).unwrap();
        for row in r {
            let v: f64 = (0..3).map(|j| row[j] * xi[j]).sum();
            assert!(v.abs() < 1e-15);
        }
        assert!(matches!(
            coriolis_matrix(WaveVector::new(0.0, 0.0, 0.0)),
            Err(Error::ZeroWaveVector)
        ));
    }

    fn unit_in(v: [f64; 3]) -> bool {
        v.iter().map(|x| x * x).sum::<f64>() > 1e-6
    }

    proptest! {
        #[test]
        fn coriolis_matrix_is_skew_and_isometric(
            xi in prop::array::uniform3(-5.0f64..5.0).prop_filter("nonzero", |v| unit_in(*v)),
            a in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let w = WaveVector(xi);
            let r = coriolis_matrix(w).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((r[i][j] + r[j][i]).abs() < 1e-15);
                }
                let rx: f64 = (0..3).map(|j| r[i][j] * xi[j]).sum();
                prop_assert!(rx.abs() < 1e-12);
            }
            // project a onto the plane ⊥ ξ
            let n2 = w.norm_sq();
            let d: f64 = (0..3).map(|j| a[j] * xi[j]).sum();
            let ap: Vec<f64> = (0..3).map(|j| a[j] - d * xi[j] / n2).collect();
            let ra: Vec<f64> = (0..3).map(|i| (0..3).map(|j| r[i][j] * ap[j]).sum()).collect();
            let na: f64 = ap.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nr: f64 = ra.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((na - nr).abs() <= 1e-12);
        }

        #[test]
        fn projection_is_idempotent_and_solenoidal(seed in 0u64..1000) {
            let g = Grid::new(3, 8, 4.0).unwrap();
            let f = random_band_field(g, 3, seed);
            let p = helmholtz_project(&f).unwrap();
            let pp = helmholtz_project(&p).unwrap();
            prop_assert!(pp.sub(&p).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
            prop_assert!(divergence(&p).unwrap().max_abs() <= 1e-12 * f.l2_norm());
        }
    }
}
