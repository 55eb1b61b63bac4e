//! Littlewood–Paley machinery on the lattice: the dyadic partition, blocks
//! and low-pass filters, Fourier–Besov and Chemin–Lerner norms, the Bony
//! decomposition and Bernstein-inequality checks.

mod bernstein;
mod bony;
mod exponent;
mod norms;
mod partition;

pub use bernstein::{
    bernstein_ratio, bernstein_reverse_ratio, bernstein_slope, BernsteinReport, SlopeReport,
};
pub use bony::{block_of_product, bony_decompose, BonyTerms};
pub use exponent::Exponent;
pub use norms::{
    aggregate_lr, chemin_lerner_norm, dyadic_rescale, fb_norm, shell_lp_norms, x_norm, BesovParams, NormReport,
    ShellFlag, ShellHistory,
};
pub use partition::{build_partition, chi, phi, DyadicPartition, ShellRange};
