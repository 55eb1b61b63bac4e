use super::partition::DyadicPartition;
use crate::error::{Error, Result};
use crate::field::{forward_transform, inverse_transform, PhysicalField, SpectralField};

/// The three pieces of `Δ̇_j(uv)`: low–high paraproduct, high–low
/// paraproduct, and the resonant remainder.
#[derive(Clone, Debug, PartialEq)]
pub struct BonyTerms {
    pub i: SpectralField,
    pub ii: SpectralField,
    pub iii: SpectralField,
}

impl BonyTerms {
    pub fn sum(&self) -> SpectralField {
        self.i.add(&self.ii).and_then(|s| s.add(&self.iii)).expect("same shape")
    }

    /// Squared-L² share of each term.
    pub fn energy_fractions(&self) -> [f64; 3] {
        let e = [self.i.l2_norm(), self.ii.l2_norm(), self.iii.l2_norm()].map(|v| v * v);
        let total: f64 = e.iter().sum();
        if total == 0.0 {
            [0.0; 3]
        } else {
            e.map(|v| v / total)
        }
    }
}

struct Blocks {
    /// Physical-space `Δ̇_k f` for every shell in range.
    block: Vec<Vec<Vec<f64>>>,
    /// Physical-space `Ṡ_k f`, cumulative over the same shells.
    low: Vec<Vec<Vec<f64>>>,
}

fn physical_blocks(f: &SpectralField, part: &DyadicPartition) -> Blocks {
    let block: Vec<Vec<Vec<f64>>> = part
        .range()
        .iter()
        .map(|k| inverse_transform(&part.block(f, k)).components().to_vec())
        .collect();
    let mut low = Vec::with_capacity(block.len());
    let mut acc = vec![vec![0.0; f.grid().len()]; f.ncomp()];
    for b in &block {
        for (a, x) in acc.iter_mut().zip(b) {
            a.iter_mut().zip(x).for_each(|(a, x)| *a += x);
        }
        low.push(acc.clone());
    }
    Blocks { block, low }
}

/// Accumulates `Σ a·b` componentwise into `out`.
fn fma(out: &mut [Vec<f64>], a: &[Vec<f64>], b: &[Vec<f64>]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        o.iter_mut()
            .zip(x.iter().zip(y))
            .for_each(|(o, (x, y))| *o += x * y);
    }
}

/// Bony decomposition of `Δ̇_j(uv)`:
///
/// * `I   = Σ_{|k−j|≤4} Δ̇_j(Ṡ_{k−2}u · Δ̇_k v)`
/// * `II  = Σ_{|k−j|≤4} Δ̇_j(Ṡ_{k−2}v · Δ̇_k u)`
/// * `III = Σ_{k≥j−3}   Δ̇_j(Δ̇_k u · Σ_{|k'−k|≤1} Δ̇_{k'} v)`
///
/// The low-pass cut `k−2` splits the pairs `(a, b)` of blocks into
/// `a ≤ b−2`, `b ≤ a−2` and `|a−b| ≤ 1` without overlap, and the windows in
/// `k` are the widest for which the product spectrum can reach shell `j`,
/// so the three terms add up to `Δ̇_j(uv)` exactly. Vector inputs are
/// multiplied componentwise. Products are formed in physical space and
/// truncated to the 2/3 band, which keeps the identity exact for dealiased
/// zero-mean inputs.
pub fn bony_decompose(
    u: &SpectralField,
    v: &SpectralField,
    part: &DyadicPartition,
    j: i32,
) -> Result<BonyTerms> {
    u.ensure_same_shape(v)?;
    if u.grid() != part.grid() {
        return Err(Error::GridMismatch);
    }
    let g = *u.grid();
    let range = part.range();
    let ub = physical_blocks(u, part);
    let vb = physical_blocks(v, part);
    let slot = |k: i32| (k - range.j_min) as usize;
    let zero = || vec![vec![0.0; g.len()]; u.ncomp()];

    let mut t1 = zero();
    let mut t2 = zero();
    for k in (j - 4)..=(j + 4) {
        if !range.contains(k) || !range.contains(k - 2) {
            continue;
        }
        fma(&mut t1, &ub.low[slot(k - 2)], &vb.block[slot(k)]);
        fma(&mut t2, &vb.low[slot(k - 2)], &ub.block[slot(k)]);
    }

    let mut t3 = zero();
    for k in (j - 3).max(range.j_min)..=range.j_max {
        let mut wide = zero();
        for kp in (k - 1)..=(k + 1) {
            if range.contains(kp) {
                for (w, b) in wide.iter_mut().zip(&vb.block[slot(kp)]) {
                    w.iter_mut().zip(b).for_each(|(w, b)| *w += b);
                }
            }
        }
        fma(&mut t3, &ub.block[slot(k)], &wide);
    }

    let finish = |comps: Vec<Vec<f64>>| -> Result<SpectralField> {
        let mut f = forward_transform(&PhysicalField::new(g, comps)?);
        f.dealias();
        Ok(part.block(&f, j))
    };
    Ok(BonyTerms {
        i: finish(t1)?,
        ii: finish(t2)?,
        iii: finish(t3)?,
    })
}

/// Reference value `Δ̇_j(uv)` with the same dealiased product.
pub fn block_of_product(
    u: &SpectralField,
    v: &SpectralField,
    part: &DyadicPartition,
    j: i32,
) -> Result<SpectralField> {
    u.ensure_same_shape(v)?;
    let a = inverse_transform(u);
    let b = inverse_transform(v);
    let comps = a
        .components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| x.iter().zip(y).map(|(x, y)| x * y).collect())
        .collect();
    let mut f = forward_transform(&PhysicalField::new(*u.grid(), comps)?);
    f.dealias();
    Ok(part.block(&f, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::lp::build_partition;
    use crate::random::{random_scalar_field, SpectrumProfile};
    use num_complex::Complex64;

    #[test]
    fn zero_factor_gives_zero_terms() {
        let g = Grid::new(3, 16, 4.0).unwrap();
        let part = build_partition(&g);
        let v = random_scalar_field(g, 1, SpectrumProfile::Gaussian { xi_c: 1.0 });
        let t = bony_decompose(&SpectralField::zeros(g, 1), &v, &part, 1).unwrap();
        assert_eq!(t.i.max_abs() + t.ii.max_abs() + t.iii.max_abs(), 0.0);
    }

    #[test]
    fn reconstruction_on_random_pairs() {
        let g = Grid::new(3, 16, 4.0).unwrap();
        let part = build_partition(&g);
        let prof = SpectrumProfile::Gaussian { xi_c: 2.0 };
        let u = random_scalar_field(g, 11, prof);
        let v = random_scalar_field(g, 12, prof);
        for j in part.range().iter() {
            let t = bony_decompose(&u, &v, &part, j).unwrap();
            let reference = block_of_product(&u, &v, &part, j).unwrap();
            let err = t.sum().sub(&reference).unwrap().l2_norm();
            assert!(err <= 1e-12 * reference.l2_norm().max(1e-300) || err < 1e-15, "j = {j}: {err}");
        }
    }

    #[test]
    fn doubled_mode_reconstruction() {
        // u = v = cos(k·x/L) with |ξ| in shell 3; the product sits at 2ξ and 0.
        let g = Grid::new(3, 64, 1.0).unwrap();
        let part = build_partition(&g);
        let u = SpectralField::real_mode(g, [10, 0, 0], &[Complex64::new(0.5, 0.0)]);
        let reference = block_of_product(&u, &u, &part, 4).unwrap();
        assert!(reference.l2_norm() > 0.1);
        let t = bony_decompose(&u, &u, &part, 4).unwrap();
        assert!(t.sum().sub(&reference).unwrap().l2_norm() <= 1e-12 * reference.l2_norm());
    }
}
