//! Vessel realizations of integrable PDEs (KdV, evolutionary NLS, canonical systems).

// Negated comparisons are used deliberately so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod hierarchy;
pub mod linalg;
pub mod lyapunov;
pub mod ode;
pub mod params;
pub mod realization;
pub mod report;
pub mod scattering;
pub mod serial;
pub mod verify;

pub use error::{Result, VesselError};
pub use linalg::{CMat, CVec, C64};
pub use lyapunov::{lyapunov_residual, solve_lyapunov, FreeEntries, LyapunovResidual};
pub use params::{preset_params, validate_params, Preset, VesselParams};
pub use realization::{random_realization, random_soliton_realization, realization_from_discrete_spectrum, Realization, RealizationDocument};
pub use report::{CheckEntry, CheckReport};
