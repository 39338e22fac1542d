//! The transfer function `S(λ, x, t) = I − B* X⁻¹ (λI − A)⁻¹ B σ1` and the
//! identities it satisfies: Bäcklund, x- and t-evolution, J-unitarity and the
//! separated overdetermined system.

use crate::error::{Result, VesselError};
use crate::evolution::{state_at, Jet, StateJet, Vessel, VesselState};
use crate::linalg::{self, fro, CMat, CVec, C64, I};
use crate::params::VesselParams;
use crate::report::CheckReport;

/// Relative distance to `spec(A)` below which `S` is not evaluated.
pub const POLE_GUARD: f64 = 1e-8;
pub const BACKLUND_TOL: f64 = 1e-9;
pub const DS_DX_TOL: f64 = 1e-10;
pub const DS_DT_TOL: f64 = 1e-9;
pub const JUNITARITY_TOL: f64 = 1e-10;
pub const SYSTEM_TOL_I: f64 = 1e-12;
pub const SYSTEM_TOL_II: f64 = 1e-10;
pub const SYSTEM_TOL_III: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SEval {
    pub lambda: C64,
    pub x: f64,
    pub t: f64,
    pub s: CMat,
}

/// Eigenvalues of `A` (diagonal of a complex Schur form).
pub fn spectrum(a: &CMat) -> Vec<C64> {
    let (_, t) = nalgebra::linalg::Schur::new(a.clone()).unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

fn resolvent(v: &Vessel, lambda: C64) -> Result<CMat> {
    let a = &v.real.a;
    let guard = POLE_GUARD * (1.0 + fro(a));
    let distance = spectrum(a)
        .into_iter()
        .map(|z| (z - lambda).norm())
        .fold(f64::INFINITY, f64::min);
    if distance <= guard {
        return Err(VesselError::NearPole {
            lambda: format!("{lambda}"),
            distance,
        });
    }
    let n = a.nrows();
    linalg::inverse(&(linalg::eye(n) * lambda - a), "lambda - A")
}

/// Jet of `S` built from the state jets; `S = I − B* · X⁻¹ · (R B σ1)`.
fn s_jet(v: &Vessel, jet: &StateJet, lambda: C64) -> Result<Jet> {
    let r = resolvent(v, lambda)?;
    let s1 = &v.params.sigma1;
    let right = jet.b.map(|b| &r * b * s1);
    let prod = jet.b.adjoint().mul(&jet.x_inv).mul(&right);
    let mut s = prod.map(|m| -m);
    s.set(0, 0, s.value() + linalg::eye(v.params.p));
    Ok(s)
}

pub fn s_from_state(v: &Vessel, state: &VesselState, lambda: C64) -> Result<CMat> {
    let r = resolvent(v, lambda)?;
    let p = v.params.p;
    Ok(linalg::eye(p) - state.b.adjoint() * &state.x_inv * r * &state.b * &v.params.sigma1)
}

pub fn s_eval(v: &Vessel, lambda: C64, x: f64, t: f64) -> Result<SEval> {
    let state = state_at(v, x, t)?;
    Ok(SEval {
        lambda,
        x,
        t,
        s: s_from_state(v, &state, lambda)?,
    })
}

fn input_generator(params: &VesselParams, lambda: C64) -> Result<CMat> {
    Ok(params.sigma1_inv()? * (&params.sigma2 * lambda + &params.gamma))
}

/// `u(λ, x) = exp(x σ1⁻¹ (σ2 λ + γ)) u0`, the input LDE solution.
pub fn input_solution(params: &VesselParams, lambda: C64, u0: &CVec, x: f64) -> Result<CVec> {
    if x == 0.0 {
        return Ok(u0.clone());
    }
    let g = input_generator(params, lambda)?;
    Ok(linalg::expm(&(g * C64::new(x, 0.0)))? * u0)
}

/// Max of `‖−σ1 ∂x y + (σ2 λ + γ*) y‖ / ‖y‖` over `x_grid` for `y = S u`.
pub fn backlund_check(v: &Vessel, lambda: C64, u0: &CVec, x_grid: &[f64], t: f64) -> Result<CheckReport> {
    let p = &v.params;
    let gen = input_generator(p, lambda)?;
    let mut worst: f64 = 0.0;
    for &x in x_grid {
        let state = state_at(v, x, t)?;
        let jet = v.jet(&state, 1, 0)?;
        let s = s_jet(v, &jet, lambda)?;
        let u = input_solution(p, lambda, u0, x)?;
        let ux = &gen * &u;
        let y = s.value() * &u;
        let yx = s.get(1, 0) * &u + s.value() * ux;
        let out = -(&p.sigma1 * yx) + (&p.sigma2 * lambda + &state.gamma_star) * &y;
        let scale = y.norm();
        let r = if scale > 0.0 { out.norm() / scale } else { out.norm() };
        worst = worst.max(r);
    }
    let mut rep = CheckReport::new();
    rep.record("output_lde", worst, BACKLUND_TOL);
    Ok(rep)
}

/// `∂x S = σ1⁻¹(σ2λ + γ*) S − S σ1⁻¹(σ2λ + γ)`, relative to `‖S‖`.
pub fn ds_dx_check(v: &Vessel, lambda: C64, x: f64, t: f64) -> Result<CheckReport> {
    let p = &v.params;
    let s1inv = p.sigma1_inv()?;
    let state = state_at(v, x, t)?;
    let jet = v.jet(&state, 1, 0)?;
    let s = s_jet(v, &jet, lambda)?;
    let rhs = &s1inv * (&p.sigma2 * lambda + &state.gamma_star) * s.value()
        - s.value() * &s1inv * (&p.sigma2 * lambda + &p.gamma);
    let r = fro(&(s.get(1, 0) - rhs)) / fro(s.value()).max(f64::MIN_POSITIVE);
    let mut rep = CheckReport::new();
    rep.record("ds_dx", r, DS_DX_TOL);
    Ok(rep)
}

/// `∂t S = iλ ∂x S + i ∂x H0 σ1 S` for the order-1 t-flow, relative to `‖S‖`.
pub fn ds_dt_check(v: &Vessel, lambda: C64, x: f64, t: f64) -> Result<CheckReport> {
    if v.gens.order != 1 {
        return Err(VesselError::Range("the S t-evolution identity is stated for the order-1 flow".into()));
    }
    let state = state_at(v, x, t)?;
    let jet = v.jet(&state, 1, 1)?;
    let s = s_jet(v, &jet, lambda)?;
    let rhs = s.get(1, 0) * (I * lambda) + jet.h0.get(1, 0) * &v.params.sigma1 * s.value() * I;
    let r = fro(&(s.get(0, 1) - rhs)) / fro(s.value()).max(f64::MIN_POSITIVE);
    let mut rep = CheckReport::new();
    rep.record("ds_dt", r, DS_DT_TOL);
    Ok(rep)
}

/// `‖S(−conj λ)* σ1 S(λ) − σ1‖ / ‖σ1‖`.
pub fn junitarity_check(v: &Vessel, lambda: C64, x: f64, t: f64) -> Result<CheckReport> {
    let state = state_at(v, x, t)?;
    let s = s_from_state(v, &state, lambda)?;
    let s_ref = s_from_state(v, &state, -lambda.conj())?;
    let s1 = &v.params.sigma1;
    let r = fro(&(s_ref.adjoint() * s1 * s - s1)) / fro(s1);
    let mut rep = CheckReport::new();
    rep.record("junitarity", r, JUNITARITY_TOL);
    Ok(rep)
}

/// `‖S(λ) − I‖·|λ|` at each magnitude along the ray `direction`.
pub fn identity_at_infinity(v: &Vessel, direction: C64, magnitudes: &[f64], x: f64, t: f64) -> Result<Vec<f64>> {
    let state = state_at(v, x, t)?;
    let dir = direction / direction.norm();
    magnitudes
        .iter()
        .map(|&m| {
            let s = s_from_state(v, &state, dir * m)?;
            Ok(fro(&(s - linalg::eye(v.params.p))) * m)
        })
        .collect()
}

/// Separated system with `𝓍 = (λ − A)⁻¹ B σ1 u`:
/// (i) `λ𝓍 = A𝓍 + Bσ1u`, (ii) `∂x 𝓍 = B σ2 u`, (iii) `u − B* X⁻¹ 𝓍 = S u`.
pub fn system_check(v: &Vessel, lambda: C64, u0: &CVec, x: f64, t: f64) -> Result<CheckReport> {
    let p = &v.params;
    let a = &v.real.a;
    let r = resolvent(v, lambda)?;
    let state = state_at(v, x, t)?;
    let jet = v.jet(&state, 1, 0)?;
    let u = input_solution(p, lambda, u0, x)?;
    let ux = input_generator(p, lambda)? * &u;
    let b = &state.b;
    let bsu = b * &p.sigma1 * &u;
    let xs = &r * &bsu;

    let lhs1 = &xs * lambda;
    let rhs1 = a * &xs + &bsu;
    let scale1 = lhs1.norm() + rhs1.norm();
    let res1 = (&lhs1 - &rhs1).norm() / scale1.max(f64::MIN_POSITIVE);

    let xs_x = &r * (jet.b.get(1, 0) * &p.sigma1 * &u + b * &p.sigma1 * ux);
    let target = b * &p.sigma2 * &u;
    let scale2 = xs_x.norm() + target.norm();
    let res2 = (xs_x - &target).norm() / scale2.max(f64::MIN_POSITIVE);

    let out = &u - b.adjoint() * &state.x_inv * &xs;
    let su = s_from_state(v, &state, lambda)? * &u;
    let scale3 = out.norm() + su.norm();
    let res3 = (out - su).norm() / scale3.max(f64::MIN_POSITIVE);

    let mut rep = CheckReport::new();
    let zero_input = bsu.norm() == 0.0;
    rep.record("i_resolvent", if zero_input { 0.0 } else { res1 }, SYSTEM_TOL_I);
    rep.record("ii_derivative", if zero_input { 0.0 } else { res2 }, SYSTEM_TOL_II);
    rep.record("iii_output", res3, SYSTEM_TOL_III);
    Ok(rep)
}
