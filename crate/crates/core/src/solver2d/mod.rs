//! Two-dimensional vorticity solver, rotating-frame residual and `L^p`
//! diagnostics.

pub mod gronwall;
pub mod rotation;
pub mod vorticity;

pub use gronwall::{cz_constant, gronwall_csv, gronwall_diagnostic, state_norms, GronwallReport, GronwallRow, StateNorms};
pub use rotation::{
    gaussian_vortex, residual_4_5, rotating_frame_transform, sample_windows, FourierEvaluator, InteriorMask,
    ResidualReport, ResidualSample, RotationMatrix2D, TimeWindow,
};
pub use vorticity::{
    advance_velocity_rotating, advance_vorticity, advection, biot_savart, coriolis_projection_identity, courant,
    velocity_trajectory_rotating, vorticity_trajectory, VorticityState, VorticityStepper,
};
