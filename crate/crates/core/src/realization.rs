//! Finite-dimensional realizations `(A, B0, X0)` tied together by the Lyapunov equation.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VesselError};
use crate::linalg::{self, c, fro, re, CMat, CVec, C64};
use crate::lyapunov::{self, FreeEntries};
use crate::params::VesselParams;
use crate::report::CheckReport;
use crate::serial;

/// Relative Lyapunov tolerance every constructed realization must meet.
pub const REALIZATION_LYAPUNOV_TOL: f64 = 1e-10;
/// Relative Hermiticity tolerance on `X0`.
pub const HERMITIAN_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub n: usize,
    pub a: CMat,
    pub b0: CMat,
    pub x0: CMat,
    /// Eigenbasis index pairs at which the Lyapunov operator is singular.
    pub resonance_flags: BTreeSet<(usize, usize)>,
}

impl Realization {
    /// Checks shapes only; use [`Realization::validate`] for the invariants.
    pub fn new(a: CMat, b0: CMat, x0: CMat) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(VesselError::Dimension("state dimension must be at least 1".into()));
        }
        if a.ncols() != n || b0.nrows() != n || x0.nrows() != n || x0.ncols() != n {
            return Err(VesselError::Dimension(format!(
                "A {}x{}, B0 {}x{}, X0 {}x{}",
                a.nrows(),
                a.ncols(),
                b0.nrows(),
                b0.ncols(),
                x0.nrows(),
                x0.ncols()
            )));
        }
        let eps = lyapunov::resonance_threshold(&a);
        let resonance_flags = match linalg::eigen(&a) {
            Ok(e) => {
                let v = &e.values;
                (0..n)
                    .flat_map(|j| (0..n).map(move |k| (j, k)))
                    .filter(|&(j, k)| (v[j] + v[k].conj()).norm() <= eps)
                    .collect()
            }
            Err(_) => BTreeSet::new(),
        };
        Ok(Self {
            n,
            a,
            b0,
            x0,
            resonance_flags,
        })
    }

    pub fn p(&self) -> usize {
        self.b0.ncols()
    }

    /// Reports X0 Hermiticity and the relative Lyapunov residual.
    pub fn validate(&self, params: &VesselParams) -> Result<CheckReport> {
        if self.b0.ncols() != params.p {
            return Err(VesselError::Dimension(format!(
                "B0 has {} columns but p = {}",
                self.b0.ncols(),
                params.p
            )));
        }
        let mut report = CheckReport::new();
        report.record(
            "x0_hermitian",
            linalg::hermitian_defect(&self.x0),
            HERMITIAN_TOL * (1.0 + fro(&self.x0)),
        );
        let r = lyapunov::lyapunov_residual(&self.a, &self.x0, &self.b0, &params.sigma1);
        report.record("lyapunov", r.relative, REALIZATION_LYAPUNOV_TOL);
        let inv = linalg::inverse(&self.x0, "X0").is_ok();
        report.record_flag("x0_invertible", inv);
        Ok(report)
    }

    pub fn checked(self, params: &VesselParams) -> Result<Self> {
        let report = self.validate(params)?;
        if let Some(name) = report.failures().first() {
            return Err(VesselError::Invariant(format!(
                "{name} (residual {:.3e})",
                report.residual(name)
            )));
        }
        Ok(self)
    }

    pub fn is_zero_input(&self) -> bool {
        self.b0.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

/// Soliton-type realization with `A = diag(−i k_j²)` and resonant (free) diagonal.
///
/// Each row must satisfy `(B σ1 B*)_jj = 0`; the diagonal of `X0` is taken from
/// `diag` and the off-diagonal entries are solved from the Lyapunov equation.
/// With SL parameters and rows `[1, i k_j]` this produces the classical
/// sech² solitons.
pub fn realization_from_discrete_spectrum(
    params: &VesselParams,
    k: &[f64],
    rows: &[Vec<C64>],
    diag: &[f64],
) -> Result<Realization> {
    let n = k.len();
    if n == 0 {
        return Err(VesselError::Dimension("discrete spectrum needs at least one point".into()));
    }
    if rows.len() != n || diag.len() != n {
        return Err(VesselError::Dimension(format!(
            "{n} spectral points but {} rows and {} diagonal values",
            rows.len(),
            diag.len()
        )));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != params.p) {
        return Err(VesselError::Dimension(format!(
            "row {i} has length {}, expected p = {}",
            r.len(),
            params.p
        )));
    }
    for (j, &kj) in k.iter().enumerate() {
        if kj == 0.0 || !kj.is_finite() {
            return Err(VesselError::Range(format!("k[{j}] = {kj} must be a nonzero real")));
        }
        for (l, &kl) in k.iter().enumerate().take(j) {
            if (kj * kj - kl * kl).abs() <= 1e-12 * (kj * kj + kl * kl) {
                return Err(VesselError::Resonance {
                    j: l,
                    k: j,
                    reason: format!("repeated spectral point k^2 = {}", kj * kj),
                });
            }
        }
    }
    let a = CMat::from_diagonal(&CVec::from_vec(k.iter().map(|&kj| c(0.0, -kj * kj)).collect()));
    let b0 = CMat::from_fn(n, params.p, |i, j| rows[i][j]);
    let gram = &b0 * &params.sigma1 * b0.adjoint();
    let tol = lyapunov::COMPATIBILITY_TOL * (1.0 + linalg::max_abs(&gram));
    for j in 0..n {
        if gram[(j, j)].norm() > tol {
            return Err(VesselError::Compatibility {
                index: j,
                value: gram[(j, j)].norm(),
            });
        }
    }
    let free: FreeEntries = diag.iter().enumerate().map(|(j, &d)| ((j, j), re(d))).collect();
    let sol = lyapunov::solve_lyapunov(&a, &b0, &params.sigma1, Some(&free))?;
    Realization::new(a, b0, sol.x)?.checked(params)
}

/// Seeded random `n`-soliton realization for the SL parameters.
///
/// `k_j = (j + 1)/2 + U(−0.05, 0.05)` and centres `s_j ~ U(1, 4)` at `t = 0`; rows are
/// `[1, i k_j]` and `X0_jj = (1 + e^{2 k_j s_j}) / (2 k_j)`, so `X` stays positive
/// definite and `τ` has no real zeros.
pub fn random_soliton_realization(n: usize, params: &VesselParams, seed: u64) -> Result<Realization> {
    if n == 0 {
        return Err(VesselError::Dimension("state dimension must be at least 1".into()));
    }
    if params.p != 2 {
        return Err(VesselError::Dimension(format!("soliton rows need p = 2, got {}", params.p)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k: Vec<f64> = (0..n).map(|j| 0.5 + 0.5 * j as f64 + rng.random_range(-0.05..0.05)).collect();
    let centres: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..4.0)).collect();
    let rows: Vec<Vec<C64>> = k.iter().map(|&kj| vec![re(1.0), c(0.0, kj)]).collect();
    let diag: Vec<f64> = k.iter().zip(&centres).map(|(&kj, &sj)| (1.0 + (2.0 * kj * sj).exp()) / (2.0 * kj)).collect();
    realization_from_discrete_spectrum(params, &k, &rows, &diag)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Seeded random nonresonant realization.
///
/// `A = U T U*` with `U` Haar-like unitary and `T` upper triangular with
/// diagonal `−(1 + j/n) + 0.1 i ξ_j`, so every `a_j + conj(a_k)` has real part
/// at most `−2` and the Lyapunov solution is unique.
pub fn random_realization(n: usize, params: &VesselParams, seed: u64) -> Result<Realization> {
    if n == 0 {
        return Err(VesselError::Dimension("state dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMat::from_fn(n, n, |_, _| gaussian(&mut rng));
    let u = g.qr().q();
    let mut t = CMat::zeros(n, n);
    for j in 0..n {
        let xi: f64 = rng.sample(StandardNormal);
        t[(j, j)] = c(-(1.0 + j as f64 / n as f64), 0.1 * xi);
        for l in j + 1..n {
            t[(j, l)] = gaussian(&mut rng) * 0.3;
        }
    }
    let a = &u * t * u.adjoint();
    let b0 = CMat::from_fn(n, params.p, |_, _| gaussian(&mut rng));
    let sol = lyapunov::solve_lyapunov(&a, &b0, &params.sigma1, None)?;
    Realization::new(a, b0, sol.x)?.checked(params)
}

/// Flat JSON document holding parameters and a realization.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RealizationDocument {
    pub p: usize,
    pub sigma1: serial::JsonMatrix,
    pub sigma2: serial::JsonMatrix,
    pub gamma: serial::JsonMatrix,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: serial::JsonMatrix,
    #[serde(rename = "B0")]
    pub b0: serial::JsonMatrix,
    #[serde(rename = "X0")]
    pub x0: serial::JsonMatrix,
}

impl RealizationDocument {
    pub fn from_parts(params: &VesselParams, real: &Realization) -> Self {
        Self {
            p: params.p,
            sigma1: serial::matrix_to_json(&params.sigma1),
            sigma2: serial::matrix_to_json(&params.sigma2),
            gamma: serial::matrix_to_json(&params.gamma),
            n: real.n,
            a: serial::matrix_to_json(&real.a),
            b0: serial::matrix_to_json(&real.b0),
            x0: serial::matrix_to_json(&real.x0),
        }
    }

    /// Decodes and shape-checks; invariants are left to `validate` so that
    /// corrupted documents can still be loaded and diagnosed.
    pub fn into_parts(&self) -> Result<(VesselParams, Realization)> {
        let m = |v: &serial::JsonMatrix, name: &str| {
            serial::matrix_from_json(v).map_err(|e| VesselError::Io(format!("{name}: {e}")))
        };
        let params = VesselParams::new(m(&self.sigma1, "sigma1")?, m(&self.sigma2, "sigma2")?, m(&self.gamma, "gamma")?)?;
        if params.p != self.p {
            return Err(VesselError::Dimension(format!("p = {} but sigma1 is {}x{}", self.p, params.p, params.p)));
        }
        let real = Realization::new(m(&self.a, "A")?, m(&self.b0, "B0")?, m(&self.x0, "X0")?)?;
        if real.n != self.n {
            return Err(VesselError::Dimension(format!("n = {} but A is {}x{}", self.n, real.n, real.n)));
        }
        if real.p() != params.p {
            return Err(VesselError::Dimension(format!("B0 has {} columns, p = {}", real.p(), params.p)));
        }
        Ok((params, real))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::lyapunov_residual;
    use crate::params::{preset_params, Preset};

    #[test]
    fn single_point_soliton_row() {
        let sl = preset_params(Preset::SL);
        let r = realization_from_discrete_spectrum(&sl, &[0.8], &[vec![re(1.0), c(0.0, 0.8)]], &[1.3]).unwrap();
        assert_eq!(r.x0[(0, 0)], re(1.3));
        assert!((r.a[(0, 0)] - c(0.0, -0.64)).norm() < 1e-15);
        assert!(r.resonance_flags.contains(&(0, 0)));
    }

    #[test]
    fn two_points_off_diagonal_solved() {
        let sl = preset_params(Preset::SL);
        let rows = vec![vec![re(1.0), c(0.0, 1.0)], vec![re(1.0), c(0.0, 2.0)]];
        let r = realization_from_discrete_spectrum(&sl, &[1.0, 2.0], &rows, &[1.0, 0.5]).unwrap();
        let res = lyapunov_residual(&r.a, &r.x0, &r.b0, &sl.sigma1);
        assert!(res.absolute <= 1e-12);
        // rows [1, i k] give the Cauchy entry 1/(k_j + k_l)
        assert!((r.x0[(0, 1)] - re(1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn discrete_spectrum_errors() {
        let sl = preset_params(Preset::SL);
        assert!(matches!(
            realization_from_discrete_spectrum(&sl, &[], &[], &[]),
            Err(VesselError::Dimension(_))
        ));
        let rows = vec![vec![re(1.0), c(0.0, 1.0)], vec![re(1.0), c(0.0, 2.0)]];
        assert!(matches!(
            realization_from_discrete_spectrum(&sl, &[1.0, -1.0], &rows, &[1.0, 1.0]),
            Err(VesselError::Resonance { .. })
        ));
        let bad = vec![vec![re(1.0), c(0.0, 1.0)], vec![re(1.0), re(1.0)]];
        assert!(matches!(
            realization_from_discrete_spectrum(&sl, &[1.0, 2.0], &bad, &[1.0, 1.0]),
            Err(VesselError::Compatibility { index: 1, .. })
        ));
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        for kind in Preset::ALL {
            let p = kind.params();
            let a = random_realization(3, &p, 7).unwrap();
            let b = random_realization(3, &p, 7).unwrap();
            assert_eq!(a, b);
            let res = lyapunov_residual(&a.a, &a.x0, &a.b0, &p.sigma1);
            assert!(res.relative <= 1e-11, "{kind}: {res:?}");
            assert!(linalg::hermitian_defect(&a.x0) <= 1e-13);
            assert!(a.resonance_flags.is_empty());
        }
        let p = preset_params(Preset::SL);
        assert_ne!(random_realization(3, &p, 7).unwrap(), random_realization(3, &p, 8).unwrap());
    }

    #[test]
    fn document_roundtrip() {
        let p = preset_params(Preset::NLS);
        let r = random_realization(2, &p, 1).unwrap();
        let doc = RealizationDocument::from_parts(&p, &r);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains("\"B0\"") && text.contains("\"sigma1\""));
        let back: RealizationDocument = serde_json::from_str(&text).unwrap();
        let (p2, r2) = back.into_parts().unwrap();
        assert_eq!(p2, p);
        assert_eq!(r2, r);
    }
}
