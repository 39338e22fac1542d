use super::generators::{build_generators, evolve_b, FlowGenerators};
use super::jet::Jet;
use super::xflow::{evolve_x, XMethod, XPath};
use crate::error::{Result, VesselError};
use crate::linalg::{self, fro, CMat, C64, I};
use crate::lyapunov::lyapunov_residual;
use crate::params::VesselParams;
use crate::realization::Realization;
use crate::report::CheckReport;

/// Relative τ-zero guard: nodes with `|τ| ≤ TAU_GUARD·|τ(0,0)|` are singular.
pub const TAU_GUARD: f64 = 1e-8;
/// Tolerance on the canonical-system structure of `γ*`.
pub const CANSYS_STRUCTURE_TOL: f64 = 1e-9;

/// Parameters, realization and generators bundled for evaluation.
#[derive(Debug, Clone)]
pub struct Vessel {
    pub params: VesselParams,
    pub real: Realization,
    pub gens: FlowGenerators,
    x0_inv: CMat,
}

impl Vessel {
    pub fn new(params: VesselParams, real: Realization, order: usize) -> Result<Self> {
        if real.p() != params.p {
            return Err(VesselError::Dimension(format!("B0 has {} columns, p = {}", real.p(), params.p)));
        }
        let gens = build_generators(&params, &real.a, order)?;
        let x0_inv = linalg::inverse(&real.x0, "X0")?;
        Ok(Self {
            params,
            real,
            gens,
            x0_inv,
        })
    }

    pub fn n(&self) -> usize {
        self.real.n
    }

    pub fn b_at(&self, x: f64, t: f64) -> Result<CMat> {
        evolve_b(&self.gens, &self.real.b0, x, t)
    }

    pub fn x_at(&self, x: f64, t: f64) -> Result<CMat> {
        Ok(evolve_x(&self.params, &self.gens, &self.real, x, t, XMethod::Integrate, XPath::XThenT)?.x)
    }

    /// Assembles a state from an already evolved `(B, X)`.
    pub fn state_from(&self, x: f64, t: f64, b: CMat, xm: CMat) -> Result<VesselState> {
        let tau = linalg::determinant(&(&self.x0_inv * &xm));
        if !(tau.norm() > TAU_GUARD) {
            return Err(VesselError::SingularPoint {
                x,
                t,
                tau_abs: tau.norm(),
            });
        }
        let x_inv = linalg::inverse_equilibrated(&xm, "X(x,t)")?;
        let h0 = b.adjoint() * &x_inv * &b;
        let gamma_star = linkage(&self.params, &h0);
        let cond_x = fro(&xm) * fro(&x_inv) / xm.nrows() as f64;
        let lyap_res = lyapunov_residual(&self.real.a, &xm, &b, &self.params.sigma1).relative;
        Ok(VesselState {
            x,
            t,
            b,
            xm,
            x_inv,
            tau,
            h0,
            gamma_star,
            cond_x,
            lyap_res,
        })
    }

    /// Derivative jets of `B`, `X`, `X⁻¹`, `H0` and `γ*` up to `∂x^ax ∂t^bt`.
    pub fn jet(&self, state: &VesselState, ax: usize, bt: usize) -> Result<StateJet> {
        let g = &self.gens;
        let mut bj = Jet::zeros(ax + 1, bt, g.n, g.p);
        let mut col = state.b.clone();
        for a in 0..=ax + 1 {
            let mut cur = col.clone();
            for b in 0..=bt {
                bj.set(a, b, cur.clone());
                cur = g.dt(&cur);
            }
            col = g.dx(&col);
        }
        let s2 = &self.params.sigma2;
        let gm = &self.params.gamma;
        let badj = bj.adjoint();
        let kj = bj.map(|m| m * s2).mul(&badj);
        let gj = bj.map(|m| m * gm).mul(&badj);
        let mut xj = Jet::zeros(ax, bt, g.n, g.n);
        for a in 0..=ax {
            for b in 0..=bt {
                let v = match (a, b) {
                    (0, 0) => state.xm.clone(),
                    (0, b) => g.xt_from_kg(kj.get(0, b - 1), gj.get(0, b - 1)),
                    (a, b) => kj.get(a - 1, b).clone(),
                };
                xj.set(a, b, v);
            }
        }
        let bj = Jet::from_fn(ax, bt, |a, b| bj.get(a, b).clone());
        let xinv = xj.inverse()?;
        let h0 = bj.adjoint().mul(&xinv).mul(&bj);
        let p = &self.params;
        let gs = h0.map(|h| &p.sigma2 * h * &p.sigma1 - &p.sigma1 * h * &p.sigma2);
        let mut gamma_star = gs;
        gamma_star.set(0, 0, gamma_star.value() + &p.gamma);
        Ok(StateJet {
            b: bj,
            x: xj,
            x_inv: xinv,
            h0,
            gamma_star,
        })
    }
}

/// `γ* = γ + σ2 H0 σ1 − σ1 H0 σ2`
pub fn linkage(params: &VesselParams, h0: &CMat) -> CMat {
    &params.gamma + &params.sigma2 * h0 * &params.sigma1 - &params.sigma1 * h0 * &params.sigma2
}

#[derive(Debug, Clone)]
pub struct VesselState {
    pub x: f64,
    pub t: f64,
    pub b: CMat,
    /// `X(x, t)`, Hermitian as stored.
    pub xm: CMat,
    pub x_inv: CMat,
    /// `det(X0⁻¹ X)`
    pub tau: C64,
    /// `B* X⁻¹ B`
    pub h0: CMat,
    pub gamma_star: CMat,
    pub cond_x: f64,
    /// Relative Lyapunov residual at `(B, X)`.
    pub lyap_res: f64,
}

#[derive(Debug, Clone)]
pub struct StateJet {
    pub b: Jet,
    pub x: Jet,
    pub x_inv: Jet,
    pub h0: Jet,
    pub gamma_star: Jet,
}

pub fn state_at(v: &Vessel, x: f64, t: f64) -> Result<VesselState> {
    let b = v.b_at(x, t)?;
    let xm = v.x_at(x, t)?;
    v.state_from(x, t, b, xm)
}

/// `H_k = B* X⁻¹ A^k B` for `k = 0..=kmax`.
pub fn moments(state: &VesselState, a: &CMat, kmax: usize) -> Vec<CMat> {
    let left = state.b.adjoint() * &state.x_inv;
    let mut akb = state.b.clone();
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        if k > 0 {
            akb = a * akb;
        }
        out.push(&left * &akb);
    }
    out
}

/// `q = −2 ∂x² ln τ = −2 tr(∂x H0 σ2)`, evaluated exactly from the jets.
pub fn q_from_jet(params: &VesselParams, jet: &StateJet) -> C64 {
    (jet.h0.get(1, 0) * &params.sigma2).trace() * -2.0
}

pub fn q_sl(v: &Vessel, x: f64, t: f64) -> Result<C64> {
    let s = state_at(v, x, t)?;
    let j = v.jet(&s, 1, 0)?;
    Ok(q_from_jet(&v.params, &j))
}

/// `(γ*)_{2,1}`
pub fn beta_nls(state: &VesselState) -> C64 {
    state.gamma_star[(1, 0)]
}

#[derive(Debug, Clone)]
pub struct CanSysFields {
    pub beta: f64,
    pub h: f64,
    pub structure: CheckReport,
}

/// `β = i (γ*)_{11} / 2`, `h = −i (γ*)_{12}` with the structure of `γ*` checked.
pub fn cansys_fields(state: &VesselState) -> Result<CanSysFields> {
    let gs = &state.gamma_star;
    let beta = I * gs[(0, 0)] / 2.0;
    let h = -I * gs[(0, 1)];
    let tol = CANSYS_STRUCTURE_TOL * (1.0 + fro(gs));
    let mut structure = CheckReport::new();
    structure.record("beta_real", beta.im, tol);
    structure.record("h_real", h.im, tol);
    structure.record("trace_free", (gs[(0, 0)] + gs[(1, 1)]).norm(), tol);
    structure.record("offdiag_symmetric", (gs[(0, 1)] - gs[(1, 0)]).norm(), tol);
    if let Some(name) = structure.failures().first() {
        return Err(VesselError::Shape(format!(
            "canonical-system gamma* at ({}, {}): {name} residual {:.3e}",
            state.x,
            state.t,
            structure.residual(name)
        )));
    }
    Ok(CanSysFields {
        beta: beta.re,
        h: h.re,
        structure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::params::{preset_params, Preset};
    use crate::realization::{random_realization, realization_from_discrete_spectrum};

    fn zero_input(kind: Preset) -> Vessel {
        let p = kind.params();
        let mut r = random_realization(2, &p, 1).unwrap();
        r.b0 = CMat::zeros(2, 2);
        Vessel::new(p, r, 1).unwrap()
    }

    #[test]
    fn zero_input_state() {
        for kind in Preset::ALL {
            let v = zero_input(kind);
            let s = state_at(&v, 0.8, -0.2).unwrap();
            assert_eq!(s.gamma_star, v.params.gamma);
            assert!((s.tau - re(1.0)).norm() < 1e-14);
            assert_eq!(fro(&s.h0), 0.0);
            assert!(moments(&s, &v.real.a, 3).iter().all(|h| fro(h) == 0.0));
        }
        assert_eq!(q_sl(&zero_input(Preset::SL), 1.0, 0.5).unwrap(), re(0.0));
        let cs = zero_input(Preset::CanSys);
        let f = cansys_fields(&state_at(&cs, 0.3, 0.1).unwrap()).unwrap();
        assert_eq!((f.beta, f.h), (0.0, 0.0));
    }

    #[test]
    fn tau_is_one_at_origin_and_gamma_star_skew() {
        for seed in 0..5 {
            let p = preset_params(Preset::SL);
            let v = Vessel::new(p.clone(), random_realization(3, &p, seed).unwrap(), 1).unwrap();
            let s0 = state_at(&v, 0.0, 0.0).unwrap();
            assert!((s0.tau - re(1.0)).norm() < 1e-13);
            let s = state_at(&v, 0.7, 0.2).unwrap();
            let gs = &s.gamma_star;
            assert!(fro(&(gs + gs.adjoint())) <= 1e-10 * (1.0 + fro(gs)));
        }
    }

    #[test]
    fn scalar_moments_factor() {
        let p = preset_params(Preset::NLS);
        let v = Vessel::new(p.clone(), random_realization(1, &p, 2).unwrap(), 1).unwrap();
        let s = state_at(&v, 0.4, 0.1).unwrap();
        let a = v.real.a[(0, 0)];
        let h = moments(&s, &v.real.a, 3);
        assert_eq!(h[0], s.h0);
        for (k, hk) in h.iter().enumerate() {
            assert!(fro(&(hk - &s.h0 * a.powu(k as u32))) <= 1e-14 * (1.0 + fro(hk)));
        }
    }

    #[test]
    fn q_matches_finite_difference_of_log_tau() {
        let p = preset_params(Preset::SL);
        let r = realization_from_discrete_spectrum(&p, &[1.0], &[vec![re(1.0), C64::new(0.0, 1.0)]], &[1.0]).unwrap();
        let v = Vessel::new(p, r, 1).unwrap();
        let lt = |x: f64| state_at(&v, x, 0.0).unwrap().tau.ln();
        let x = 0.3;
        let q = q_sl(&v, x, 0.0).unwrap();
        let h = 1e-3;
        let d2 = (-lt(x - 2.0 * h) + 16.0 * lt(x - h) - 30.0 * lt(x) + 16.0 * lt(x + h) - lt(x + 2.0 * h)) / (12.0 * h * h);
        assert!((q - d2 * -2.0).norm() < 1e-7, "{q} vs {}", d2 * -2.0);
        assert!(q.im.abs() < 1e-12);
    }

    #[test]
    fn jet_x_derivative_matches_difference() {
        let p = preset_params(Preset::NLS);
        let v = Vessel::new(p.clone(), random_realization(2, &p, 9).unwrap(), 1).unwrap();
        let s = state_at(&v, 0.2, 0.1).unwrap();
        let j = v.jet(&s, 2, 1).unwrap();
        let h = 1e-4;
        let ht = |x: f64, t: f64| state_at(&v, x, t).unwrap().h0;
        let fd_x = (ht(0.2 + h, 0.1) - ht(0.2 - h, 0.1)) * C64::new(0.5 / h, 0.0);
        let fd_t = (ht(0.2, 0.1 + h) - ht(0.2, 0.1 - h)) * C64::new(0.5 / h, 0.0);
        assert!(fro(&(j.h0.get(1, 0) - fd_x)) < 1e-6);
        assert!(fro(&(j.h0.get(0, 1) - fd_t)) < 1e-6);
    }
}
