//! Finite-difference stencils, PDE residuals, convergence studies and the
//! consolidated verification suite.

pub mod convergence;
pub mod residuals;
pub mod stencil;
pub mod suite;

pub use convergence::{convergence_study, ConvergenceStatus, ConvergenceStudy, RESIDUAL_FLOOR};
pub use residuals::{
    cansys_residual, fit_k, fit_k_frame, gamma_star_evolution_residual, kdv_residual, nls_residual, CanSysResidual,
    ResidualField, TimeOrientation,
};
pub use stencil::{differentiate, Stencil};
pub use suite::{run_suite, SuiteCheck, SuiteConfig, SuiteConvergence, SuiteReport, SKIPPED_PRECONDITION};
