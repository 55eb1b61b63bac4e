use crate::field::SpectralField;
use crate::grid::Grid;
use serde::Serialize;

const INNER: f64 = 3.0 / 4.0;
const OUTER: f64 = 4.0 / 3.0;

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for t ≤ 0, 1 for t ≥ 1.
fn smooth_step(t: f64) -> f64 {
    let a = psi(t);
    let b = psi(1.0 - t);
    a / (a + b)
}

/// Radial cutoff: 1 on `|ξ| ≤ 3/4`, 0 on `|ξ| ≥ 4/3`, smooth in between.
pub fn chi(r: f64) -> f64 {
    smooth_step((OUTER - r) / (OUTER - INNER))
}

/// Shell profile `φ(ξ) = χ(ξ/2) − χ(ξ)`, supported in `3/4 ≤ |ξ| ≤ 8/3`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Integer shells that meet the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShellRange {
    pub j_min: i32,
    pub j_max: i32,
}

impl ShellRange {
    /// All `j` whose open support `(3/4·2^j, 8/3·2^j)` meets `[xi_lo, xi_hi]`.
    pub fn covering(xi_lo: f64, xi_hi: f64) -> Self {
        let mut j_min = xi_lo.log2().floor() as i32 - 3;
        while 8.0 / 3.0 * 2f64.powi(j_min) <= xi_lo {
            j_min += 1;
        }
        let mut j_max = xi_hi.log2().ceil() as i32 + 3;
        while INNER * 2f64.powi(j_max) >= xi_hi {
            j_max -= 1;
        }
        Self { j_min, j_max }
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.j_max < self.j_min
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }
}

/// The family `φ_j(ξ) = φ(2^{−j}ξ)` evaluated on a grid's lattice.
///
/// Every nonzero wave vector meets at most two consecutive shells; the table
/// stores the lower shell index and both weights.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    range: ShellRange,
    lower: Vec<i32>,
    weights: Vec<[f64; 2]>,
}

/// Builds the partition table for a grid. Shells are included whenever their
/// support meets the lattice, so the weights sum to one at every ξ ≠ 0.
pub fn build_partition(grid: &Grid) -> DyadicPartition {
    let range = ShellRange::covering(grid.xi_min(), grid.xi_max());
    let mut lower = Vec::with_capacity(grid.len());
    let mut weights = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let r = grid.xi_of(idx).norm();
        if r == 0.0 {
            lower.push(i32::MIN);
            weights.push([0.0, 0.0]);
            continue;
        }
        let j0 = r.log2().floor() as i32;
        let mut first = None;
        let mut w = [0.0; 2];
        for j in (j0 - 2)..=(j0 + 2) {
            let v = DyadicPartition::shell_value(j, r);
            if v > 0.0 {
                match first {
                    None => {
                        first = Some(j);
                        w[0] = v;
                    }
                    Some(f) => {
                        debug_assert_eq!(j, f + 1);
                        w[1] = v;
                    }
                }
            }
        }
        let f = first.expect("nonzero radius lies in some shell");
        lower.push(f);
        weights.push(w);
    }
    DyadicPartition {
        grid: *grid,
        range,
        lower,
        weights,
    }
}

impl DyadicPartition {
    /// `φ_j` at radius `r`.
    pub fn shell_value(j: i32, r: f64) -> f64 {
        phi(r / 2f64.powi(j))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn range(&self) -> ShellRange {
        self.range
    }

    /// `φ_j` at a lattice index.
    #[inline]
    pub fn weight(&self, j: i32, idx: usize) -> f64 {
        let lo = self.lower[idx];
        if j == lo {
            self.weights[idx][0]
        } else if lo != i32::MIN && j == lo + 1 {
            self.weights[idx][1]
        } else {
            0.0
        }
    }

    /// Shells (with weights) touching a lattice index.
    #[inline]
    pub fn shells_at(&self, idx: usize) -> [(i32, f64); 2] {
        let lo = self.lower[idx];
        [(lo, self.weights[idx][0]), (lo.saturating_add(1), self.weights[idx][1])]
    }

    /// `Σ_j φ_j` at a lattice index.
    pub fn sum_at(&self, idx: usize) -> f64 {
        self.weights[idx][0] + self.weights[idx][1]
    }

    /// Largest deviation from one of `Σ_j φ_j` over the dealiased band.
    pub fn unity_defect(&self) -> f64 {
        (1..self.grid.len())
            .filter(|&idx| self.grid.in_band(idx))
            .map(|idx| (self.sum_at(idx) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Dyadic block `Δ̇_j f`; zero when `j` lies outside the shell range.
    pub fn block(&self, f: &SpectralField, j: i32) -> SpectralField {
        assert_eq!(f.grid(), &self.grid, "field and partition grids differ");
        if !self.range.contains(j) {
            return SpectralField::zeros(self.grid, f.ncomp());
        }
        f.apply_symbol(|idx| self.weight(j, idx))
    }

    /// Low-pass `Ṡ_j f = Σ_{k ≤ j} Δ̇_k f`.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> SpectralField {
        assert_eq!(f.grid(), &self.grid, "field and partition grids differ");
        f.apply_symbol(|idx| {
            self.shells_at(idx)
                .iter()
                .filter(|(k, _)| *k <= j && self.range.contains(*k))
                .map(|(_, w)| w)
                .sum()
        })
    }

    /// Whether shell `j` is cut by the lattice: either its inner edge lies
    /// below the smallest resolved frequency, or its outer edge leaves the
    /// ball inscribed in the dealiased band.
    pub fn shell_flag(&self, j: i32) -> Option<super::ShellFlag> {
        let lo = INNER * 2f64.powi(j);
        let hi = 8.0 / 3.0 * 2f64.powi(j);
        if lo < self.grid.xi_min() {
            Some(super::ShellFlag::BelowLattice)
        } else if hi > self.grid.band_inner_radius() {
            Some(super::ShellFlag::BeyondBand)
        } else {
            None
        }
    }
}
