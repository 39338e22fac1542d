use crate::error::{Result, VesselError};
use crate::linalg::{self, fro, CMat, C64, I};
use crate::params::VesselParams;

/// Vectorized x- and t-generators acting on column-stacked `B`.
///
/// `M` encodes `B ↦ −(A B σ2 + B γ) σ1⁻¹` and `N = (I_p ⊗ (iA)^order) M`.
#[derive(Debug, Clone)]
pub struct FlowGenerators {
    pub n: usize,
    pub p: usize,
    pub order: usize,
    pub m: CMat,
    pub nt: CMat,
    a: CMat,
    /// `(iA)^order`
    ia_pow: CMat,
    /// `A^j` and `(A*)^j` for `j = 0..=order`
    a_pows: Vec<CMat>,
    a_adj_pows: Vec<CMat>,
    sigma2_right: CMat,
    gamma_right: CMat,
    sigma2: CMat,
    gamma: CMat,
}

pub fn build_generators(params: &VesselParams, a: &CMat, order: usize) -> Result<FlowGenerators> {
    if order == 0 {
        return Err(VesselError::Range("flow order must be at least 1".into()));
    }
    let n = a.nrows();
    if a.ncols() != n {
        return Err(VesselError::Dimension("A must be square".into()));
    }
    let p = params.p;
    let s1inv = params.sigma1_inv()?;
    let sigma2_right = &params.sigma2 * &s1inv;
    let gamma_right = &params.gamma * &s1inv;
    let m = -(linalg::kron(&sigma2_right.transpose(), a) + linalg::kron(&gamma_right.transpose(), &linalg::eye(n)));
    let ia_pow = linalg::powi(&a.map(|z| z * I), order);
    let nt = linalg::kron(&linalg::eye(p), &ia_pow) * &m;
    let mut a_pows = vec![linalg::eye(n)];
    let mut a_adj_pows = vec![linalg::eye(n)];
    let a_adj = a.adjoint();
    for j in 1..=order {
        a_pows.push(&a_pows[j - 1] * a);
        a_adj_pows.push(&a_adj_pows[j - 1] * &a_adj);
    }
    Ok(FlowGenerators {
        n,
        p,
        order,
        m,
        nt,
        a: a.clone(),
        ia_pow,
        a_pows,
        a_adj_pows,
        sigma2_right,
        gamma_right,
        sigma2: params.sigma2.clone(),
        gamma: params.gamma.clone(),
    })
}

impl FlowGenerators {
    pub fn a(&self) -> &CMat {
        &self.a
    }

    /// `∂x B = −(A B σ2 + B γ) σ1⁻¹`
    pub fn dx(&self, b: &CMat) -> CMat {
        -(&self.a * b * &self.sigma2_right + b * &self.gamma_right)
    }

    /// `∂t B = (iA)^order ∂x B`
    pub fn dt(&self, b: &CMat) -> CMat {
        &self.ia_pow * self.dx(b)
    }

    /// `‖MN − NM‖ / (‖M‖‖N‖)`, zero when either generator vanishes.
    pub fn commutator_defect(&self) -> f64 {
        let scale = fro(&self.m) * fro(&self.nt);
        if scale == 0.0 {
            return 0.0;
        }
        fro(&(&self.m * &self.nt - &self.nt * &self.m)) / scale
    }

    /// `∂t X` from `K = B σ2 B*` and `G = B γ B*` (or their derivatives, the map is linear).
    ///
    /// `X_t = i^m [Σ_{j≤m} (−1)^j A^{m−j} K A*^j + Σ_{j<m} (−1)^j A^{m−1−j} G A*^j]`;
    /// for `m = 1` this is `i(A K − K A* + G)`.
    pub fn xt_from_kg(&self, k: &CMat, g: &CMat) -> CMat {
        let m = self.order;
        let mut acc = CMat::zeros(self.n, self.n);
        for j in 0..=m {
            let term = &self.a_pows[m - j] * k * &self.a_adj_pows[j];
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        for j in 0..m {
            let term = &self.a_pows[m - 1 - j] * g * &self.a_adj_pows[j];
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc * I.powu(m as u32)
    }

    pub fn kx(&self, b: &CMat) -> CMat {
        b * &self.sigma2 * b.adjoint()
    }

    pub fn gx(&self, b: &CMat) -> CMat {
        b * &self.gamma * b.adjoint()
    }

    /// Right side of the X t-flow at a given `B`.
    pub fn xt(&self, b: &CMat) -> CMat {
        self.xt_from_kg(&self.kx(b), &self.gx(b))
    }

    pub fn generator(&self, axis: Axis) -> &CMat {
        match axis {
            Axis::X => &self.m,
            Axis::T => &self.nt,
        }
    }

    /// Right side of the X flow along `axis`.
    pub fn x_rhs(&self, axis: Axis, b: &CMat) -> CMat {
        match axis {
            Axis::X => self.kx(b),
            Axis::T => self.xt(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    T,
}

impl Axis {
    pub fn name(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::T => 't',
        }
    }
}

/// `B(x, t) = unvec(exp(x M + t N) vec B0)`.
pub fn evolve_b(g: &FlowGenerators, b0: &CMat, x: f64, t: f64) -> Result<CMat> {
    if b0.nrows() != g.n || b0.ncols() != g.p {
        return Err(VesselError::Dimension(format!(
            "B0 is {}x{}, generators expect {}x{}",
            b0.nrows(),
            b0.ncols(),
            g.n,
            g.p
        )));
    }
    if x == 0.0 && t == 0.0 {
        return Ok(b0.clone());
    }
    let gen = &g.m * C64::new(x, 0.0) + &g.nt * C64::new(t, 0.0);
    let e = linalg::expm(&gen)?;
    Ok(linalg::unvec(&(e * linalg::vec_cols(b0)), g.n, g.p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};
    use crate::params::{preset_params, Preset};

    #[test]
    fn zero_parameters_give_zero_generators() {
        let mut p = preset_params(Preset::NLS);
        p.sigma2 = CMat::zeros(2, 2);
        let a = CMat::from_element(2, 2, c(0.3, -0.2));
        let g = build_generators(&p, &a, 1).unwrap();
        assert_eq!(fro(&g.m), 0.0);
        assert_eq!(fro(&g.nt), 0.0);
        assert_eq!(g.commutator_defect(), 0.0);
    }

    #[test]
    fn scalar_row_ode_by_hand() {
        // SL, n = 1: b1' = −i b2, b2' = −a b1
        let sl = preset_params(Preset::SL);
        let a = CMat::from_element(1, 1, re(-1.5));
        let g = build_generators(&sl, &a, 1).unwrap();
        let b = linalg::from_rows(&[vec![c(0.4, 0.1), c(-0.2, 0.9)]]);
        let d = g.dx(&b);
        assert!((d[(0, 0)] - (-I * b[(0, 1)])).norm() < 1e-15);
        assert!((d[(0, 1)] - (re(1.5) * b[(0, 0)])).norm() < 1e-15);
        let v = &g.m * linalg::vec_cols(&b);
        assert!(fro(&(linalg::unvec(&v, 1, 2) - d)) < 1e-15);
    }

    #[test]
    fn generators_commute() {
        for kind in Preset::ALL {
            let p = kind.params();
            let a = CMat::from_fn(3, 3, |i, j| c(0.3 * i as f64 - 0.5 * j as f64, 0.2 + 0.1 * (i * j) as f64));
            for order in 1..=3 {
                let g = build_generators(&p, &a, order).unwrap();
                assert!(g.commutator_defect() <= 1e-12, "{kind} order {order}");
            }
        }
    }

    #[test]
    fn evolve_b_identity_at_origin() {
        let sl = preset_params(Preset::SL);
        let a = CMat::from_element(1, 1, re(-1.0));
        let g = build_generators(&sl, &a, 1).unwrap();
        let b0 = linalg::from_rows(&[vec![re(1.0), re(1.0)]]);
        assert_eq!(evolve_b(&g, &b0, 0.0, 0.0).unwrap(), b0);
        let z = CMat::zeros(1, 2);
        assert_eq!(fro(&evolve_b(&g, &z, 0.7, -0.3).unwrap()), 0.0);
    }

    #[test]
    fn order_one_xt_matches_printed_form() {
        let sl = preset_params(Preset::SL);
        let a = CMat::from_fn(2, 2, |i, j| c(i as f64 - 1.2, 0.3 * j as f64));
        let g = build_generators(&sl, &a, 1).unwrap();
        let b = CMat::from_fn(2, 2, |i, j| c(0.5 - i as f64, 0.2 + j as f64));
        let k = &b * &sl.sigma2 * b.adjoint();
        let gg = &b * &sl.gamma * b.adjoint();
        let printed = (&a * &k - &k * a.adjoint() + gg) * I;
        assert!(fro(&(g.xt(&b) - printed)) < 1e-14);
    }
}
