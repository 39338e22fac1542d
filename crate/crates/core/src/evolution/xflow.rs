//! Integration of `X` along the x- and t-flows with closed-form `B` at every node.

use std::collections::HashMap;

use super::generators::{evolve_b, Axis, FlowGenerators};
use super::quadrature::{self, QuadOptions};
use crate::error::{Result, VesselError};
use crate::linalg::{self, fro, CMat, C64};
use crate::lyapunov;
use crate::params::VesselParams;
use crate::realization::Realization;

/// Longest segment handed to the adaptive quadrature in one piece.
pub const MAX_SEGMENT: f64 = 0.25;
/// Quantization of cached propagator offsets (`2^-44 ≈ 5.7e-14`).
const OFFSET_SCALE: f64 = 17_592_186_044_416.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XMethod {
    Integrate,
    /// Integrate, then replace nonresonant eigenbasis entries by the algebraic Lyapunov solution.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XPath {
    /// `(0,0) → (x,0) → (x,t)`
    XThenT,
    /// `(0,0) → (0,t) → (x,t)`
    TThenX,
}

#[derive(Debug, Clone)]
pub struct XEvolution {
    pub x: CMat,
    /// Relative size of the hybrid overwrite, `‖X_alg − X_int‖ / ‖X_int‖`.
    pub correction: Option<f64>,
    pub panels: usize,
}

/// Marches `X` along one axis, reusing propagators `exp(u G)` for repeated offsets.
pub struct LineIntegrator<'a> {
    g: &'a FlowGenerators,
    axis: Axis,
    cache: HashMap<i64, CMat>,
    pub opts: QuadOptions,
    pub panels: usize,
}

impl<'a> LineIntegrator<'a> {
    pub fn new(g: &'a FlowGenerators, axis: Axis) -> Self {
        Self {
            g,
            axis,
            cache: HashMap::new(),
            opts: QuadOptions::default(),
            panels: 0,
        }
    }

    fn propagate(&mut self, u: f64, b: &CMat) -> Result<CMat> {
        let g = self.g;
        let key = (u * OFFSET_SCALE).round() as i64;
        if !self.cache.contains_key(&key) {
            let e = linalg::expm(&(self.g.generator(self.axis) * C64::new(key as f64 / OFFSET_SCALE, 0.0)))?;
            self.cache.insert(key, e);
        }
        let e = &self.cache[&key];
        Ok(linalg::unvec(&(e * linalg::vec_cols(b)), g.n, g.p))
    }

    /// `∫_0^len rhs(B(s0 + u)) du` given `B(s0)`, where `s0` is the axis coordinate of `b_start`.
    pub fn segment(&mut self, b_start: &CMat, x_scale: f64, len: f64, at: f64) -> Result<CMat> {
        if len == 0.0 {
            return Ok(CMat::zeros(self.g.n, self.g.n));
        }
        let opts = QuadOptions {
            abs_tol: (1e-16 * x_scale).max(self.opts.abs_tol),
            ..self.opts
        };
        let g = self.g;
        let axis = self.axis;
        let mut f = |u: f64| -> Result<CMat> {
            let b = self.propagate(u, b_start)?;
            Ok(g.x_rhs(axis, &b))
        };
        match quadrature::integrate(&mut f, 0.0, len, opts)? {
            Ok(r) => {
                self.panels += r.panels;
                Ok(r.value)
            }
            Err(u) => Err(VesselError::Integration {
                axis: axis.name(),
                at: at + u,
            }),
        }
    }

    /// `X` at each of `offsets` (relative to the start, any order), starting from
    /// `(b_start, x_start)` at offset 0. Returns values in the order given.
    pub fn march(&mut self, b_start: &CMat, x_start: &CMat, origin: f64, offsets: &[f64]) -> Result<Vec<CMat>> {
        let mut out = vec![CMat::zeros(0, 0); offsets.len()];
        let mut pos: Vec<usize> = (0..offsets.len()).filter(|&i| offsets[i] >= 0.0).collect();
        pos.sort_by(|&i, &j| offsets[i].total_cmp(&offsets[j]));
        let mut neg: Vec<usize> = (0..offsets.len()).filter(|&i| offsets[i] < 0.0).collect();
        neg.sort_by(|&i, &j| offsets[j].total_cmp(&offsets[i]));
        for branch in [pos, neg] {
            let mut s = 0.0;
            let mut x = x_start.clone();
            for i in branch {
                let target = offsets[i];
                let gap = target - s;
                let pieces = (gap.abs() / MAX_SEGMENT).ceil().max(1.0) as usize;
                for k in 0..pieces {
                    let a = s + gap * k as f64 / pieces as f64;
                    let b = if k + 1 == pieces { target } else { s + gap * (k + 1) as f64 / pieces as f64 };
                    let b_a = self.exact_b(b_start, a)?;
                    let inc = self.segment(&b_a, fro(&x), b - a, origin + a)?;
                    x += inc;
                }
                s = target;
                out[i] = x.clone();
            }
        }
        Ok(out)
    }

    fn exact_b(&self, b_start: &CMat, u: f64) -> Result<CMat> {
        if u == 0.0 {
            return Ok(b_start.clone());
        }
        let e = linalg::expm(&(self.g.generator(self.axis) * C64::new(u, 0.0)))?;
        Ok(linalg::unvec(&(e * linalg::vec_cols(b_start)), self.g.n, self.g.p))
    }
}

/// `X(x, t)` by integrating the X flows along `path` from `X0`.
pub fn evolve_x(
    params: &VesselParams,
    g: &FlowGenerators,
    real: &Realization,
    x: f64,
    t: f64,
    method: XMethod,
    path: XPath,
) -> Result<XEvolution> {
    let (first, second, c1, c2) = match path {
        XPath::XThenT => (Axis::X, Axis::T, x, t),
        XPath::TThenX => (Axis::T, Axis::X, t, x),
    };
    let mut l1 = LineIntegrator::new(g, first);
    let mid = l1.march(&real.b0, &real.x0, 0.0, &[c1])?.remove(0);
    let b_mid = match path {
        XPath::XThenT => evolve_b(g, &real.b0, x, 0.0)?,
        XPath::TThenX => evolve_b(g, &real.b0, 0.0, t)?,
    };
    let mut l2 = LineIntegrator::new(g, second);
    let xm = linalg::hermitian_part(&l2.march(&b_mid, &mid, 0.0, &[c2])?.remove(0));
    let panels = l1.panels + l2.panels;
    match method {
        XMethod::Integrate => Ok(XEvolution {
            x: xm,
            correction: None,
            panels,
        }),
        XMethod::Hybrid => {
            let b = evolve_b(g, &real.b0, x, t)?;
            let (xh, corr) = hybrid_overwrite(params, g.a(), &b, &xm)?;
            Ok(XEvolution {
                x: xh,
                correction: Some(corr),
                panels,
            })
        }
    }
}

/// Replaces nonresonant eigenbasis entries of `x` by the algebraic Lyapunov solution at `b`.
pub fn hybrid_overwrite(params: &VesselParams, a: &CMat, b: &CMat, x: &CMat) -> Result<(CMat, f64)> {
    let eig = linalg::eigen(a)?;
    let rhs = -(b * &params.sigma1 * b.adjoint());
    let rhs_eig = &eig.inverse * rhs * eig.inverse.adjoint();
    let mut y = &eig.inverse * x * eig.inverse.adjoint();
    let eps = lyapunov::resonance_threshold(a);
    let n = a.nrows();
    for j in 0..n {
        for k in 0..n {
            let denom = eig.values[j] + eig.values[k].conj();
            if denom.norm() > eps {
                y[(j, k)] = rhs_eig[(j, k)] / denom;
            }
        }
    }
    let xh = linalg::hermitian_part(&(&eig.vectors * y * eig.vectors.adjoint()));
    let scale = fro(x);
    let corr = if scale > 0.0 { fro(&(&xh - x)) / scale } else { fro(&xh) };
    Ok((xh, corr))
}
