//! Periodic lattices and their wave vectors.
//!
//! The torus is `[0, 2πL)^dim`; wavenumbers are `ξ = k / L` with integer `k`
//! in FFT order (`0, 1, .., n/2-1, -n/2, .., -1`). Lattice arrays are stored
//! row-major with the last axis fastest.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A uniform periodic grid in two or three dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    period_l: f64,
}

impl Grid {
    pub const DEFAULT_PERIOD: f64 = 4.0;

    pub fn new(dim: usize, n: usize, period_l: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be an even integer >= 8, got {n}"
            )));
        }
        if !(period_l.is_finite() && period_l > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period L must be positive and finite, got {period_l}"
            )));
        }
        Ok(Self { dim, n, period_l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period_l(&self) -> f64 {
        self.period_l
    }

    /// Number of lattice points.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency spacing Δξ = 1/L.
    pub fn dxi(&self) -> f64 {
        1.0 / self.period_l
    }

    /// Physical grid spacing 2πL/n.
    pub fn dx(&self) -> f64 {
        2.0 * PI * self.period_l / self.n as f64
    }

    /// Largest retained integer wavenumber per axis under the 2/3 rule.
    ///
    /// Products of two fields limited to `|k_i| <= K` alias only onto
    /// wavenumbers with `|k_i| > K` because `3K < n`.
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    /// Signed integer wavenumber of FFT index `i` along one axis.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Integer wave vector of a flat lattice index (third entry 0 in 2D).
    #[inline]
    pub fn k_of(&self, idx: usize) -> [i64; 3] {
        let n = self.n;
        if self.dim == 2 {
            [self.wavenumber(idx / n), self.wavenumber(idx % n), 0]
        } else {
            [
                self.wavenumber(idx / (n * n)),
                self.wavenumber((idx / n) % n),
                self.wavenumber(idx % n),
            ]
        }
    }

    /// Flat index of an integer wave vector (taken modulo n).
    pub fn index_of(&self, k: [i64; 3]) -> usize {
        let n = self.n as i64;
        let wrap = |v: i64| v.rem_euclid(n) as usize;
        if self.dim == 2 {
            wrap(k[0]) * self.n + wrap(k[1])
        } else {
            (wrap(k[0]) * self.n + wrap(k[1])) * self.n + wrap(k[2])
        }
    }

    /// Wave vector ξ = k/L of a flat lattice index.
    #[inline]
    pub fn xi_of(&self, idx: usize) -> WaveVector {
        let k = self.k_of(idx);
        let s = self.dxi();
        WaveVector([k[0] as f64 * s, k[1] as f64 * s, k[2] as f64 * s])
    }

    /// Whether a lattice index lies in the 2/3-rule band (Nyquist excluded).
    #[inline]
    pub fn in_band(&self, idx: usize) -> bool {
        let cut = self.dealias_cutoff();
        self.k_of(idx).iter().all(|k| k.abs() <= cut)
    }

    /// Whether the index carries the Nyquist wavenumber on some axis.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = -(self.n as i64) / 2;
        self.k_of(idx)[..self.dim].contains(&half)
    }

    /// Smallest nonzero |ξ| on the lattice.
    pub fn xi_min(&self) -> f64 {
        self.dxi()
    }

    /// Largest |ξ| on the full lattice.
    pub fn xi_max(&self) -> f64 {
        (self.dim as f64).sqrt() * (self.n / 2) as f64 * self.dxi()
    }

    /// Radius of the largest ball contained in the dealiased band.
    pub fn band_inner_radius(&self) -> f64 {
        self.dealias_cutoff() as f64 * self.dxi()
    }

    /// Physical coordinates of a flat lattice index.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.dx();
        let n = self.n;
        if self.dim == 2 {
            [(idx / n) as f64 * h, (idx % n) as f64 * h, 0.0]
        } else {
            [
                (idx / (n * n)) as f64 * h,
                ((idx / n) % n) as f64 * h,
                (idx % n) as f64 * h,
            ]
        }
    }

    /// Center of the periodic box.
    pub fn center(&self) -> [f64; 3] {
        let c = PI * self.period_l;
        if self.dim == 2 {
            [c, c, 0.0]
        } else {
            [c, c, c]
        }
    }
}

/// A frequency vector ξ (third entry 0 in 2D).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveVector(pub [f64; 3]);

impl WaveVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self([x, y, z])
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl std::ops::Index<usize> for WaveVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
