//! The Lyapunov constraint `A X + X A* + B σ1 B* = 0` and its solver.
//!
//! The solver works in an eigenbasis of `A`, where the equation decouples into
//! scalar equations `(a_j + conj(a_k)) y_jk = c_jk`. Pairs with
//! `a_j + conj(a_k) ≈ 0` are resonant: their entry is a free parameter, and the
//! right-hand side must vanish there for a solution to exist.

use std::collections::BTreeMap;

use crate::error::{Result, VesselError};
use crate::linalg::{self, fro, CMat, C64};

/// Relative factor of the resonance threshold `ε_res = 1e-12 (‖A‖ + 1)`.
pub const RESONANCE_FACTOR: f64 = 1e-12;
/// Relative tolerance on the right-hand side at resonant pairs.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

/// Free values for resonant eigenbasis entries, keyed by `(j, k)`.
pub type FreeEntries = BTreeMap<(usize, usize), C64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovResidual {
    /// Frobenius norm of `A X + X A* + B σ1 B*`.
    pub absolute: f64,
    /// `absolute / (‖A‖‖X‖ + ‖B‖²‖σ1‖)`, or `absolute` when that scale is zero.
    pub relative: f64,
}

pub fn lyapunov_residual(a: &CMat, x: &CMat, b: &CMat, sigma1: &CMat) -> LyapunovResidual {
    let r = a * x + x * a.adjoint() + b * sigma1 * b.adjoint();
    let absolute = fro(&r);
    let fb = fro(b);
    let scale = fro(a) * fro(x) + fb * fb * fro(sigma1);
    let relative = if scale > 0.0 { absolute / scale } else { absolute };
    LyapunovResidual { absolute, relative }
}

#[derive(Debug, Clone)]
pub struct LyapunovSolution {
    /// Hermitian solution (exactly Hermitian as stored).
    pub x: CMat,
    /// Eigenbasis index pairs treated as free parameters.
    pub resonant: Vec<(usize, usize)>,
    /// Largest eigenbasis right-hand side modulus found at a resonant pair.
    pub compatibility: f64,
    pub eigenvalues: Vec<C64>,
}

pub fn resonance_threshold(a: &CMat) -> f64 {
    RESONANCE_FACTOR * (fro(a) + 1.0)
}

/// Solves `A X + X A* = −B σ1 B*` for Hermitian `X`.
///
/// `free` supplies eigenbasis entries for resonant pairs; `(k, j)` is accepted
/// for `(j, k)` with the conjugate value.
pub fn solve_lyapunov(
    a: &CMat,
    b: &CMat,
    sigma1: &CMat,
    free: Option<&FreeEntries>,
) -> Result<LyapunovSolution> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != sigma1.nrows() {
        return Err(VesselError::Dimension(format!(
            "lyapunov: A {}x{}, B {}x{}, sigma1 {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            sigma1.nrows(),
            sigma1.ncols()
        )));
    }
    let rhs = -(b * sigma1 * b.adjoint());
    let eig = linalg::eigen(a)?;
    let rhs_eig = &eig.inverse * &rhs * eig.inverse.adjoint();
    let eps = resonance_threshold(a);
    let compat_tol = COMPATIBILITY_TOL * (1.0 + linalg::max_abs(&rhs_eig));

    let mut y = CMat::zeros(n, n);
    let mut resonant = Vec::new();
    let mut compatibility: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let denom = eig.values[j] + eig.values[k].conj();
            let c_jk = rhs_eig[(j, k)];
            if denom.norm() > eps {
                y[(j, k)] = c_jk / denom;
                continue;
            }
            resonant.push((j, k));
            compatibility = compatibility.max(c_jk.norm());
            if c_jk.norm() > compat_tol {
                return Err(VesselError::Resonance {
                    j,
                    k,
                    reason: format!("nonzero right-hand side {:.3e} at a resonant pair", c_jk.norm()),
                });
            }
            let value = free.and_then(|f| {
                f.get(&(j, k))
                    .copied()
                    .or_else(|| f.get(&(k, j)).map(|v| v.conj()))
            });
            y[(j, k)] = value.ok_or_else(|| VesselError::Resonance {
                j,
                k,
                reason: "free parameter not supplied".into(),
            })?;
        }
    }
    let x = &eig.vectors * y * eig.vectors.adjoint();
    Ok(LyapunovSolution {
        x: linalg::hermitian_part(&x),
        resonant,
        compatibility,
        eigenvalues: eig.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re, CVec};
    use crate::params::{preset_params, Preset};

    /// Dense Kronecker-product solve used as an independent oracle.
    fn kron_solve(a: &CMat, rhs: &CMat) -> CMat {
        let n = a.nrows();
        let id = linalg::eye(n);
        let op = linalg::kron(&id, a) + linalg::kron(&a.map(|z| z.conj()), &id);
        let v = op.lu().solve(&linalg::vec_cols(rhs)).unwrap();
        linalg::unvec(&v, n, n)
    }

    #[test]
    fn scalar_by_hand() {
        let sl = preset_params(Preset::SL);
        let a = CMat::from_element(1, 1, re(-1.0));
        let b = linalg::from_rows(&[vec![re(1.0), re(1.0)]]);
        let x = CMat::from_element(1, 1, re(1.0));
        // (-1)(1) + (1)(-1) + 2 = 0
        assert_eq!(lyapunov_residual(&a, &x, &b, &sl.sigma1).absolute, 0.0);
        let sol = solve_lyapunov(&a, &b, &sl.sigma1, None).unwrap();
        assert!((sol.x[(0, 0)] - re(1.0)).norm() < 1e-15);
        assert!(sol.resonant.is_empty());
    }

    #[test]
    fn zero_input_gives_zero() {
        let sl = preset_params(Preset::SL);
        let a = CMat::from_diagonal(&CVec::from_vec(vec![re(-1.0), c(-2.0, 0.5)]));
        let b = CMat::zeros(2, 2);
        assert_eq!(lyapunov_residual(&a, &b, &b, &sl.sigma1).absolute, 0.0);
        let sol = solve_lyapunov(&a, &b, &sl.sigma1, None).unwrap();
        assert_eq!(fro(&sol.x), 0.0);
    }

    #[test]
    fn nonsolution_has_positive_residual() {
        let sl = preset_params(Preset::SL);
        let a = CMat::from_element(1, 1, re(-1.0));
        let b = linalg::from_rows(&[vec![re(1.0), re(1.0)]]);
        let x = CMat::from_element(1, 1, re(3.0));
        assert!(lyapunov_residual(&a, &x, &b, &sl.sigma1).absolute > 0.1);
    }

    #[test]
    fn resonant_diagonal_passes_free_values_through() {
        let sl = preset_params(Preset::SL);
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0, 1.0), c(0.0, 4.0)]));
        // b1 conj(b2) purely imaginary on each row
        let b = linalg::from_rows(&[vec![re(1.0), c(0.0, 0.7)], vec![re(2.0), c(0.0, -0.3)]]);
        let mut free = FreeEntries::new();
        free.insert((0, 0), re(1.5));
        free.insert((1, 1), re(2.5));
        let sol = solve_lyapunov(&a, &b, &sl.sigma1, Some(&free)).unwrap();
        assert_eq!(sol.x[(0, 0)], re(1.5));
        assert_eq!(sol.x[(1, 1)], re(2.5));
        assert_eq!(sol.resonant, vec![(0, 0), (1, 1)]);
        let r = lyapunov_residual(&a, &sol.x, &b, &sl.sigma1);
        assert!(r.relative <= 1e-14, "{r:?}");
    }

    #[test]
    fn resonance_without_free_value_names_the_pair() {
        let sl = preset_params(Preset::SL);
        let a = CMat::from_element(1, 1, c(0.0, 1.0));
        let b = linalg::from_rows(&[vec![re(1.0), c(0.0, 1.0)]]);
        match solve_lyapunov(&a, &b, &sl.sigma1, None) {
            Err(VesselError::Resonance { j: 0, k: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        // Incompatible row: b1 conj(b2) real.
        let b = linalg::from_rows(&[vec![re(1.0), re(1.0)]]);
        let mut free = FreeEntries::new();
        free.insert((0, 0), re(1.0));
        assert!(matches!(
            solve_lyapunov(&a, &b, &sl.sigma1, Some(&free)),
            Err(VesselError::Resonance { .. })
        ));
    }

    #[test]
    fn agrees_with_kronecker_oracle() {
        let nls = preset_params(Preset::NLS);
        let a = CMat::from_fn(3, 3, |i, j| {
            if i == j {
                c(-1.0 - i as f64 / 3.0, 0.2 * i as f64)
            } else if j > i {
                c(0.3, -0.1 * (i + j) as f64)
            } else {
                re(0.0)
            }
        });
        let b = CMat::from_fn(3, 2, |i, j| c((i + j) as f64 * 0.4 - 0.5, (i as f64) - 0.7 * j as f64));
        let sol = solve_lyapunov(&a, &b, &nls.sigma1, None).unwrap();
        let oracle = kron_solve(&a, &-(&b * &nls.sigma1 * b.adjoint()));
        assert!(fro(&(&sol.x - &oracle)) <= 1e-12 * fro(&oracle));
        assert_eq!(linalg::hermitian_defect(&sol.x), 0.0);
    }
}
