use super::exponent::Exponent;
use super::partition::DyadicPartition;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::field::lp_norm_samples;
use crate::grid::Grid;
use num_complex::Complex64;
use serde::Serialize;

const OUTER: f64 = 8.0 / 3.0;
const INNER: f64 = 3.0 / 4.0;

/// Both sides of a Bernstein comparison at one scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub j: i32,
    pub gamma: [u32; 3],
    pub p: Exponent,
    pub q: Exponent,
    /// `‖(iξ)^γ f̂‖_{L^q}`.
    pub lhs: f64,
    /// `‖f̂‖_{L^p}`.
    pub norm_p: f64,
    /// `2^{j|γ| + nj(1/q − 1/p)}`.
    pub scale: f64,
    /// `lhs / (scale · norm_p)`, the empirical constant.
    pub ratio: f64,
}

/// Regression of `log₂(‖(iξ)^γ f̂_j‖_{L^q} / ‖f̂_j‖_{L^p})` against `j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeReport {
    pub gamma: [u32; 3],
    pub p: Exponent,
    pub q: Exponent,
    pub points: Vec<(i32, f64)>,
    pub slope: f64,
    pub expected: f64,
    pub relative_error: f64,
}

fn monomial(xi: [f64; 3], gamma: [u32; 3]) -> f64 {
    xi.iter()
        .zip(gamma)
        .map(|(x, g)| x.powi(g as i32))
        .product::<f64>()
        .abs()
}

/// Frequency-side `L^p` norm of `|m(ξ)|·|f̂(ξ)|` with lattice weight `(Δξ)^{dim/p}`.
fn weighted_norm(f: &SpectralField, p: Exponent, m: impl Fn(usize) -> f64) -> f64 {
    let g = f.grid();
    let values: Vec<f64> = (0..g.len())
        .map(|idx| {
            let a: f64 = f.components().iter().map(|c| c[idx].norm_sqr()).sum();
            a.sqrt() * m(idx)
        })
        .collect();
    let w = if p.is_infinite() {
        1.0
    } else {
        g.dxi().powi(g.dim() as i32)
    };
    lp_norm_samples(&values, p.value(), w)
}

fn support_radii(f: &SpectralField) -> (f64, f64) {
    let g = f.grid();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for idx in 0..g.len() {
        if f.components().iter().any(|c| c[idx] != Complex64::new(0.0, 0.0)) {
            let r = g.xi_of(idx).norm();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

fn check_ball(f: &SpectralField, j: i32) -> Result<()> {
    let (_, hi) = support_radii(f);
    let radius = OUTER * 2f64.powi(j);
    if hi > radius * (1.0 + 1e-12) {
        return Err(Error::UnsupportedSpectrum(format!(
            "|ξ| reaches {hi:.4}, beyond the ball of radius {radius:.4} at scale {j}"
        )));
    }
    Ok(())
}

/// Forward Bernstein comparison for `f̂` supported in `|ξ| ≤ (8/3)·2^j`.
pub fn bernstein_ratio(
    f: &SpectralField,
    j: i32,
    gamma: [u32; 3],
    p: Exponent,
    q: Exponent,
) -> Result<BernsteinReport> {
    check_ball(f, j)?;
    let g = *f.grid();
    let order: u32 = gamma.iter().sum();
    let lhs = weighted_norm(f, q, |idx| monomial(g.xi_of(idx).0, gamma));
    let norm_p = weighted_norm(f, p, |_| 1.0);
    let n = g.dim() as f64;
    let scale = 2f64.powf(j as f64 * order as f64 + n * j as f64 * (q.recip() - p.recip()));
    let ratio = if norm_p == 0.0 { 0.0 } else { lhs / (scale * norm_p) };
    Ok(BernsteinReport {
        j,
        gamma,
        p,
        q,
        lhs,
        norm_p,
        scale,
        ratio,
    })
}

/// Reverse comparison on an annulus `(3/4)·2^j ≤ |ξ| ≤ (8/3)·2^j`:
/// `‖f̂‖_{L^q} / (2^{−jk} max_{|β|=k} ‖(iξ)^β f̂‖_{L^q})`.
pub fn bernstein_reverse_ratio(f: &SpectralField, j: i32, order: u32, q: Exponent) -> Result<f64> {
    let (lo, hi) = support_radii(f);
    let (a, b) = (INNER * 2f64.powi(j), OUTER * 2f64.powi(j));
    if hi == 0.0 || lo < a * (1.0 - 1e-12) || hi > b * (1.0 + 1e-12) {
        return Err(Error::UnsupportedSpectrum(format!(
            "support [{lo:.4}, {hi:.4}] is not inside the annulus [{a:.4}, {b:.4}]"
        )));
    }
    let g = *f.grid();
    let dims = g.dim();
    let mut best = 0.0_f64;
    for b0 in 0..=order {
        for b1 in 0..=(order - b0) {
            let b2 = order - b0 - b1;
            if dims == 2 && b2 > 0 {
                continue;
            }
            let beta = [b0, b1, b2];
            best = best.max(weighted_norm(f, q, |idx| monomial(g.xi_of(idx).0, beta)));
        }
    }
    let lhs = weighted_norm(f, q, |_| 1.0);
    Ok(lhs / (2f64.powi(-(j * order as i32)) * best))
}

/// Fits the scaling exponent of the Bernstein inequality: `f̂_j = φ_j` on
/// `grid` for each `j`, least-squares slope of the log-ratio against `j`.
pub fn bernstein_slope(
    grid: Grid,
    js: &[i32],
    gamma: [u32; 3],
    p: Exponent,
    q: Exponent,
) -> Result<SlopeReport> {
    if js.len() < 2 {
        return Err(Error::InvalidParameter("slope fit needs at least two scales".into()));
    }
    let mut points = Vec::with_capacity(js.len());
    for &j in js {
        let f = SpectralField::from_profile(grid, 1, |xi, _| {
            Complex64::new(DyadicPartition::shell_value(j, xi.norm()), 0.0)
        });
        let rep = bernstein_ratio(&f, j, gamma, p, q)?;
        points.push((j, (rep.lhs / rep.norm_p).log2()));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let order: u32 = gamma.iter().sum();
    let expected = order as f64 + grid.dim() as f64 * (q.recip() - p.recip());
    Ok(SlopeReport {
        gamma,
        p,
        q,
        points,
        slope,
        expected,
        relative_error: ((slope - expected) / expected).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shell(g: Grid, j: i32) -> SpectralField {
        SpectralField::from_profile(g, 1, |xi, _| {
            Complex64::new(DyadicPartition::shell_value(j, xi.norm()), 0.0)
        })
    }

    #[test]
    fn identity_case_is_one() {
        let g = Grid::new(3, 32, 1.0).unwrap();
        let f = shell(g, 2);
        for p in [Exponent::ONE, Exponent::TWO, Exponent::INF] {
            let r = bernstein_ratio(&f, 2, [0, 0, 0], p, p).unwrap();
            assert!((r.ratio - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn first_derivative_bounded_by_outer_radius() {
        let g = Grid::new(3, 32, 1.0).unwrap();
        let f = shell(g, 2);
        for p in [Exponent::ONE, Exponent::TWO, Exponent::INF] {
            let r = bernstein_ratio(&f, 2, [1, 0, 0], p, p).unwrap();
            assert!(r.ratio <= 8.0 / 3.0 && r.ratio > 0.5, "{}", r.ratio);
        }
    }

    #[test]
    fn spectrum_outside_ball_is_rejected() {
        let g = Grid::new(3, 32, 1.0).unwrap();
        let f = shell(g, 3);
        assert!(matches!(
            bernstein_ratio(&f, 1, [0, 0, 0], Exponent::TWO, Exponent::TWO),
            Err(Error::UnsupportedSpectrum(_))
        ));
        assert!(bernstein_reverse_ratio(&f, 1, 1, Exponent::TWO).is_err());
    }

    #[test]
    fn reverse_ratio_is_finite_on_annulus() {
        let g = Grid::new(3, 32, 1.0).unwrap();
        let f = shell(g, 2);
        let r = bernstein_reverse_ratio(&f, 2, 1, Exponent::TWO).unwrap();
        assert!(r.is_finite() && r > 0.0 && r < 4.0 / 3.0 * 3f64.sqrt() + 1e-12, "{r}");
    }

    #[test]
    fn slope_in_two_dimensions() {
        let g = Grid::new(2, 256, 1.0).unwrap();
        let s = bernstein_slope(g, &[2, 3, 4, 5], [1, 0, 0], Exponent::TWO, Exponent::TWO).unwrap();
        assert!(s.relative_error < 0.05, "{s:?}");
    }
}
