//! Bundled physical models.

pub mod maxwell;
pub mod mhd;

pub use maxwell::{maxwell_double_roots, maxwell_system, maxwell_system_in_frame, BiaxialCrystal};
pub use mhd::{euler_state, mhd_eigenvalues, mhd_system, mhd_system_in_frame, rh_residual, MhdState, PressureLaw};
pub mod shock;

pub use shock::{construct_lax_shock, majda_lopatinski, shock_boundary_problem, ShockBoundary, ShockFamily, ShockProblem};
