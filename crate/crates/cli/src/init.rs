//! Initial data shared by the solvers.

use anyhow::{bail, Context, Result};
use fbns::field::{forward_transform, PhysicalField};
use fbns::random::{random_divfree_field, random_scalar_field, SpectrumProfile};
use fbns::solver2d::gaussian_vortex;
use fbns::{checkpoint, Grid, SpectralField};
use serde::{Deserialize, Serialize};

use crate::output::Workdir;

fn one() -> f64 {
    1.0
}

/// Velocity (3D) or vorticity (2D) at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Unit-RMS random field times `amplitude`: divergence-free velocity in
    /// 3D, scalar vorticity in 2D.
    Random {
        seed: u64,
        #[serde(default = "one")]
        xi_c: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Lowest-mode Taylor–Green flow.
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Gaussian vortex (2D only), offset from the box center.
    GaussianVortex { offset: [f64; 2], width: f64 },
    /// FBNS checkpoint, relative to the workdir.
    File { path: String },
}

impl InitialData {
    pub fn build(&self, grid: Grid, wd: &Workdir) -> Result<SpectralField> {
        let dim = grid.dim();
        let l = grid.period_l();
        let f = match self {
            InitialData::Random { seed, xi_c, amplitude } => {
                let prof = SpectrumProfile::Gaussian { xi_c: *xi_c };
                let f = if dim == 3 {
                    random_divfree_field(grid, *seed, prof)?
                } else {
                    random_scalar_field(grid, *seed, prof)
                };
                f.scaled(*amplitude)
            }
            InitialData::TaylorGreen { amplitude } => {
                let a = *amplitude;
                let phys = if dim == 3 {
                    PhysicalField::from_fn(grid, 3, |x, c| {
                        let (u, v, w) = (x[0] / l, x[1] / l, x[2] / l);
                        match c {
                            0 => a * u.sin() * v.cos() * w.cos(),
                            1 => -a * u.cos() * v.sin() * w.cos(),
                            _ => 0.0,
                        }
                    })
                } else {
                    PhysicalField::from_fn(grid, 1, |x, _| -2.0 * a / l * (x[0] / l).cos() * (x[1] / l).cos())
                };
                forward_transform(&phys)
            }
            InitialData::GaussianVortex { offset, width } => {
                if dim != 2 {
                    bail!("gaussian_vortex initial data is two-dimensional");
                }
                gaussian_vortex(grid, *offset, *width)?
            }
            InitialData::File { path } => {
                let p = wd.resolve(path);
                let f = checkpoint::read(&p).with_context(|| format!("reading {}", p.display()))?;
                if *f.grid() != grid {
                    bail!(
                        "{} holds a {}D field with n = {}, L = {}; the configuration asks for {}D, n = {}, L = {}",
                        p.display(),
                        f.grid().dim(),
                        f.grid().n(),
                        f.grid().period_l(),
                        dim,
                        grid.n(),
                        l
                    );
                }
                f
            }
        };
        let want = if dim == 3 { 3 } else { 1 };
        if f.ncomp() != want {
            bail!("initial data has {} component(s), expected {want}", f.ncomp());
        }
        Ok(f)
    }
}
