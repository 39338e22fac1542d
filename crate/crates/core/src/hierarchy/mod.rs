//! Differential-polynomial algebra for the KdV hierarchy and the generalized flows.

pub mod diffpoly;
pub mod flow;
pub mod gauss;

pub use diffpoly::{b0, dp_add, dp_dx, dp_eval, dp_mul, eval_with, hierarchy, next_b, DiffPoly, Monomial};
pub use flow::{build_y, hierarchy_flow_x_rhs, hierarchy_residual, FlowTerm, HierarchyConvention, HierarchyResidual};
pub use gauss::GaussRat;

/// Largest `n` accepted for rendering `b_0..b_n`.
pub const MAX_RENDER_N: usize = 8;

/// `b0 = ...` through `bn = ...`, one line each.
pub fn render_hierarchy(n: usize) -> crate::Result<Vec<String>> {
    if n > MAX_RENDER_N {
        return Err(crate::VesselError::Range(format!(
            "hierarchy index {n} exceeds the term-count guard {MAX_RENDER_N}"
        )));
    }
    Ok(hierarchy(n)
        .iter()
        .enumerate()
        .map(|(k, b)| format!("b{k} = {b}"))
        .collect())
}
