//! Fourier-coefficient fields and their physical-space counterparts.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Grid, WaveVector};
use num_complex::Complex64;
use rayon::prelude::*;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Scalar or vector field stored as Fourier coefficients on a periodic lattice.
///
/// Coefficients follow `f(x) = Σ_k c_k e^{i k·x/L}`, one lattice array per
/// component in the grid's row-major FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    comps: Vec<Vec<Complex64>>,
}

/// Real samples on the physical lattice, one array per component.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl SpectralField {
    pub fn zeros(grid: Grid, ncomp: usize) -> Self {
        Self {
            grid,
            comps: vec![vec![ZERO; grid.len()]; ncomp],
        }
    }

    pub fn from_components(grid: Grid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::ComponentMismatch {
                expected: 1,
                actual: 0,
            });
        }
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::SizeMismatch {
                    expected: grid.len(),
                    actual: c.len(),
                });
            }
        }
        Ok(Self { grid, comps })
    }

    /// Builds a field by evaluating a frequency profile at every lattice point.
    pub fn from_profile<F>(grid: Grid, ncomp: usize, profile: F) -> Self
    where
        F: Fn(WaveVector, usize) -> Complex64 + Sync,
    {
        let comps = (0..ncomp)
            .map(|c| {
                (0..grid.len())
                    .into_par_iter()
                    .map(|idx| profile(grid.xi_of(idx), c))
                    .collect()
            })
            .collect();
        Self { grid, comps }
    }

    /// A single Fourier mode `a e^{ik·x/L}` plus its conjugate partner, so
    /// that the field is real-valued.
    pub fn real_mode(grid: Grid, k: [i64; 3], amplitude: &[Complex64]) -> Self {
        let mut f = Self::zeros(grid, amplitude.len());
        let plus = grid.index_of(k);
        let minus = grid.index_of([-k[0], -k[1], -k[2]]);
        for (c, a) in amplitude.iter().enumerate() {
            if plus == minus {
                f.comps[c][plus] += Complex64::new(a.re, 0.0);
            } else {
                f.comps[c][plus] += *a;
                f.comps[c][minus] += a.conj();
            }
        }
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Extracts a single component as a scalar field.
    pub fn scalar(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            comps: vec![self.comps[c].clone()],
        }
    }

    pub fn ensure_same_shape(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.ncomp() != other.ncomp() {
            return Err(Error::ComponentMismatch {
                expected: self.ncomp(),
                actual: other.ncomp(),
            });
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        self.comps
            .iter_mut()
            .for_each(|c| c.par_iter_mut().for_each(|v| *v *= a));
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.ensure_same_shape(other)?;
        for (dst, src) in self.comps.iter_mut().zip(&other.comps) {
            dst.par_iter_mut()
                .zip(src.par_iter())
                .for_each(|(d, s)| *d += s * a);
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Root-mean-square norm, `sqrt(Σ_k |c_k|²)` summed over components.
    pub fn l2_norm(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// Modulus of the ξ = 0 coefficient (Euclidean over components).
    pub fn mean_mode(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c[0].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn zero_mean(&mut self) {
        self.comps.iter_mut().for_each(|c| c[0] = ZERO);
    }

    /// Largest violation of `c(−k) = conj(c(k))`, ignoring Nyquist planes
    /// (which have no lattice partner).
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst = 0.0_f64;
        for c in &self.comps {
            for idx in 0..g.len() {
                if g.is_nyquist(idx) {
                    continue;
                }
                let k = g.k_of(idx);
                let partner = g.index_of([-k[0], -k[1], -k[2]]);
                worst = worst.max((c[idx] - c[partner].conj()).norm());
            }
        }
        worst
    }

    /// Zeroes every coefficient outside the 2/3-rule band.
    pub fn dealias(&mut self) {
        let g = self.grid;
        for c in &mut self.comps {
            c.par_iter_mut().enumerate().for_each(|(idx, v)| {
                if !g.in_band(idx) {
                    *v = ZERO;
                }
            });
        }
    }

    /// Largest coefficient modulus outside the 2/3-rule band.
    pub fn out_of_band(&self) -> f64 {
        let g = self.grid;
        self.comps
            .iter()
            .flat_map(|c| c.iter().enumerate())
            .filter(|(idx, _)| !g.in_band(*idx))
            .fold(0.0_f64, |m, (_, v)| m.max(v.norm()))
    }

    /// Multiplies every component by a real radial/diagonal symbol.
    pub fn apply_symbol<F>(&self, symbol: F) -> SpectralField
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let comps = self
            .comps
            .iter()
            .map(|c| {
                c.par_iter()
                    .enumerate()
                    .map(|(idx, v)| v * symbol(idx))
                    .collect()
            })
            .collect();
        SpectralField {
            grid: self.grid,
            comps,
        }
    }

    /// Pearson-style correlation of the coefficient vectors.
    pub fn correlation(&self, other: &SpectralField) -> Result<f64> {
        self.ensure_same_shape(other)?;
        let mut dot = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            dot += a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum::<f64>();
        }
        let denom = self.l2_norm() * other.l2_norm();
        Ok(if denom == 0.0 { 0.0 } else { dot / denom })
    }
}

impl PhysicalField {
    pub fn new(grid: Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::SizeMismatch {
                    expected: grid.len(),
                    actual: c.len(),
                });
            }
        }
        Ok(Self { grid, comps })
    }

    /// Samples a function of the physical coordinates.
    pub fn from_fn<F>(grid: Grid, ncomp: usize, f: F) -> Self
    where
        F: Fn([f64; 3], usize) -> f64 + Sync,
    {
        let comps = (0..ncomp)
            .map(|c| {
                (0..grid.len())
                    .into_par_iter()
                    .map(|idx| f(grid.point(idx), c))
                    .collect()
            })
            .collect();
        Self { grid, comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect()
    }

    /// Torus L^p norm with trapezoid weight `dx^dim`; `p = ∞` is the sample max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_samples(&self.magnitude(), p, self.grid.dx().powi(self.grid.dim() as i32))
    }

    pub fn max_abs_diff(&self, other: &PhysicalField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// `(Σ |v|^p w)^{1/p}` with a fixed summation order; `p = ∞` is the max.
pub(crate) fn lp_norm_samples(values: &[f64], p: f64, weight: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else {
        let sum: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
        (sum * weight).powf(1.0 / p)
    }
}

/// Samples → Fourier coefficients.
pub fn forward_transform(samples: &PhysicalField) -> SpectralField {
    let g = samples.grid;
    let comps = samples
        .comps
        .iter()
        .map(|c| {
            let mut data: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft::forward(&mut data, g.n(), g.dim());
            data
        })
        .collect();
    SpectralField { grid: g, comps }
}

/// Forward transform of raw per-component sample arrays.
pub fn forward_transform_raw(grid: Grid, samples: Vec<Vec<f64>>) -> Result<SpectralField> {
    Ok(forward_transform(&PhysicalField::new(grid, samples)?))
}

/// Fourier coefficients → complex samples.
pub fn inverse_transform_complex(field: &SpectralField) -> Vec<Vec<Complex64>> {
    let g = field.grid;
    field
        .comps
        .iter()
        .map(|c| {
            let mut data = c.clone();
            fft::inverse(&mut data, g.n(), g.dim());
            data
        })
        .collect()
}

/// Fourier coefficients → real samples (imaginary parts discarded; they
/// vanish to rounding for Hermitian-symmetric fields).
pub fn inverse_transform(field: &SpectralField) -> PhysicalField {
    let comps = inverse_transform_complex(field)
        .into_iter()
        .map(|c| c.into_iter().map(|v| v.re).collect())
        .collect();
    PhysicalField {
        grid: field.grid,
        comps,
    }
}
