//! Pseudo-spectral laboratory for the rotating Navier–Stokes equations on a
//! periodic box: Fourier-coefficient fields, Littlewood–Paley norms, the
//! Stokes–Coriolis semigroup, a Picard solver for mild solutions in 3D and a
//! vorticity solver with rotating-frame diagnostics in 2D.

pub mod checkpoint;
pub mod error;
mod fft;
pub mod field;
pub mod grid;
pub mod lab;
pub mod lp;
pub mod ops;
pub mod picard;
pub mod random;
pub mod semigroup;
pub mod solver2d;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::{PhysicalField, SpectralField};
pub use grid::{Grid, WaveVector};
pub use trajectory::Trajectory;
