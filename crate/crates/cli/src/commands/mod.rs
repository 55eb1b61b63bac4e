pub mod checkpoint;
pub mod fbnorm;
pub mod lab;
pub mod semigroup;
pub mod solve2d;
pub mod solve3d;

use std::fmt;

/// A run that reached computation and broke down numerically. Diagnostics
/// have already been written when this is returned.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "numerical failure: {}", self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn output_dir() -> String {
    "out".into()
}

/// Every coefficient is finite.
fn finite_field(f: &fbns::SpectralField) -> bool {
    f.components().iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
}
