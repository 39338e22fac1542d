//! Generalized flow terms `Y_k` and the numeric hierarchy residual.

use ndarray::Array2;

use super::diffpoly::{eval_with, hierarchy, DiffPoly};
use crate::error::{Result, VesselError};
use crate::evolution::{sample_frame, GridSpec, Vessel};
use crate::linalg::{self, CMat, C64};
use crate::params::{Preset, VesselParams};
use crate::realization::Realization;
use crate::report::CheckReport;
use crate::verify::residuals::ResidualField;
use crate::verify::stencil::{differentiate, Stencil};

#[derive(Debug, Clone)]
pub struct FlowTerm {
    /// `m_0, ..., m_n`
    pub m: Vec<CMat>,
    /// `Y_k = Σ_{i≤k} (−1)^i A^{k−i} B m_k B* A*^i`
    pub y: Vec<CMat>,
}

pub fn build_y(a: &CMat, b: &CMat, m: &[CMat], n: usize) -> Result<FlowTerm> {
    if m.len() != n + 1 {
        return Err(VesselError::Dimension(format!("need m_0..m_{n}, got {} matrices", m.len())));
    }
    let n_state = a.nrows();
    if b.nrows() != n_state || m.iter().any(|mi| mi.nrows() != b.ncols() || mi.ncols() != b.ncols()) {
        return Err(VesselError::Dimension("build_y: B and m_i do not conform".into()));
    }
    let a_adj = a.adjoint();
    let y = (0..=n)
        .map(|k| {
            let core = b * &m[k] * b.adjoint();
            let mut acc = CMat::zeros(n_state, n_state);
            for i in 0..=k {
                let term = linalg::powi(a, k - i) * &core * linalg::powi(&a_adj, i);
                if i % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        })
        .collect();
    Ok(FlowTerm { m: m.to_vec(), y })
}

/// `X_t = −Σ_k Y_k`
pub fn hierarchy_flow_x_rhs(flow: &FlowTerm) -> CMat {
    let n = flow.y[0].nrows();
    flow.y.iter().fold(CMat::zeros(n, n), |acc, y| acc - y)
}

/// Coefficients reproducing the order-`m` t-flow of X: `m_m = −i^m σ2`,
/// `m_{m−1} = −i^m γ`, all others zero.
pub fn flow_coefficients(params: &VesselParams, order: usize) -> Vec<CMat> {
    let p = params.p;
    let im = linalg::I.powu(order as u32);
    let mut m = vec![CMat::zeros(p, p); order + 1];
    m[order] = &params.sigma2 * -im;
    m[order - 1] = &params.gamma * -im;
    m
}

/// Hermitian and anti-Hermitian defects `(‖Y − Y*‖, ‖Y + Y*‖)` relative to `‖Y‖`.
pub fn symmetry_defects(y: &CMat) -> (f64, f64) {
    let s = linalg::fro(y).max(f64::MIN_POSITIVE);
    (
        linalg::fro(&(y - y.adjoint())) / s,
        linalg::fro(&(y + y.adjoint())) / s,
    )
}

/// Which reading of the bar in `m̄_n = (−1)^n m_n` a coefficient is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarReading {
    Adjoint,
    Conjugate,
}

/// A `p × p` coefficient satisfying `bar(m) = (−1)^n m` under `reading`, from a seed matrix.
pub fn coefficient_for_reading(seed: &CMat, n: usize, reading: BarReading) -> CMat {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let bar = match reading {
        BarReading::Adjoint => seed.adjoint(),
        BarReading::Conjugate => seed.map(|z| z.conj()),
    };
    (seed + bar * C64::new(sign, 0.0)) * C64::new(0.5, 0.0)
}

/// Sign convention relating hierarchy index `n` to a computable field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierarchyConvention {
    /// The t-flow order used for `b_n` is `n + flow_offset`.
    pub flow_offset: usize,
    /// Entry of `γ*` taken as `β` (zero-based).
    pub entry: (usize, usize),
    /// Read the flow in `−t`.
    pub reversed_time: bool,
}

impl Default for HierarchyConvention {
    /// The convention that reproduces `β_t = b_0` for the KdV flow.
    fn default() -> Self {
        Self {
            flow_offset: 1,
            entry: (1, 0),
            reversed_time: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HierarchyResidual {
    pub field: ResidualField,
    pub report: CheckReport,
    pub flow_order: usize,
}

/// `|±β_t − b_n[β]|` on `grid` under the t-flow of order `n + flow_offset`, in potential form.
pub fn hierarchy_residual(
    params: &VesselParams,
    real: &Realization,
    n: usize,
    grid: &GridSpec,
    convention: HierarchyConvention,
    tolerance: f64,
) -> Result<HierarchyResidual> {
    if params.preset() != Some(Preset::SL) {
        return Err(VesselError::Range("hierarchy_residual is defined for the SL preset".into()));
    }
    let order = n + convention.flow_offset;
    let v = Vessel::new(params.clone(), real.clone(), order)?;
    let frame = sample_frame(&v, grid)?;
    let (er, ec) = convention.entry;
    let beta = frame.field(&format!("gs{}{}", er + 1, ec + 1))?.clone();
    let bn = hierarchy(n).pop().expect("nonempty hierarchy");
    let field = potential_residual(&beta, &frame.mask, &bn, grid.hx(), grid.ht(), convention.reversed_time)?;
    let mut report = CheckReport::new();
    report.record(format!("hierarchy_n{n}"), field.max, tolerance);
    Ok(HierarchyResidual {
        field,
        report,
        flow_order: order,
    })
}

/// `|s β_t − b[β]|` with `s = −1` for reversed time, derivatives by 4th-order stencils.
pub fn potential_residual(beta: &Array2<C64>, mask: &Array2<bool>, b: &DiffPoly, hx: f64, ht: f64, reversed: bool) -> Result<ResidualField> {
    let max_d = b.max_order() as usize;
    let (nt, nx) = beta.dim();
    let mut derivs = vec![beta.clone()];
    for d in 1..=max_d {
        derivs.push(differentiate(beta, 1, d, hx, 4)?.0);
    }
    let (bt, _) = differentiate(beta, 0, 1, ht, 4)?;
    let rx = if max_d > 0 { Stencil::central(max_d, 4)?.half_width() } else { 0 };
    let rt = Stencil::central(1, 4)?.half_width();
    let sign = if reversed { -1.0 } else { 1.0 };
    let mut values = Array2::zeros((nt, nx));
    let mut valid = Array2::from_elem((nt, nx), false);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for j in rt..nt.saturating_sub(rt) {
        for i in rx..nx.saturating_sub(rx) {
            let clear = (j - rt..=j + rt).all(|jj| !mask[(jj, i)]) && (i - rx..=i + rx).all(|ii| !mask[(j, ii)]);
            if !clear {
                continue;
            }
            let at: Vec<C64> = derivs.iter().map(|a| a[(j, i)]).collect();
            let r = (bt[(j, i)] * sign - eval_with(b, &at)).norm();
            values[(j, i)] = r;
            valid[(j, i)] = true;
            worst = worst.max(r);
            count += 1;
        }
    }
    if count == 0 {
        return Err(VesselError::Range("grid too coarse for the hierarchy stencils".into()));
    }
    Ok(ResidualField {
        values,
        valid,
        max: worst,
        evaluated: count,
    })
}
