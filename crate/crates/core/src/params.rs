//! Vessel parameters `(σ1, σ2, γ)` and the standard `p = 2` presets.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, VesselError};
use crate::linalg::{self, c, fro, re, CMat, C64};
use crate::report::CheckReport;

/// Values above this are treated as a singular `σ1`.
pub const SIGMA1_COND_LIMIT: f64 = 1e12;
/// Absolute tolerance on the structural (skew-)Hermiticity checks, relative to the matrix scale.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// The triple of `p × p` matrices selecting a PDE family.
///
/// Invariants (checked by [`VesselParams::validate`]): `σ1 = σ1*` invertible,
/// `σ2 = σ2*`, `γ = −γ*`.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselParams {
    pub p: usize,
    pub sigma1: CMat,
    pub sigma2: CMat,
    pub gamma: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Sturm–Liouville (KdV under the t-flow).
    SL,
    /// Evolutionary nonlinear Schrödinger.
    NLS,
    /// Canonical systems.
    CanSys,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::SL, Preset::NLS, Preset::CanSys];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SL => "SL",
            Preset::NLS => "NLS",
            Preset::CanSys => "CanSys",
        }
    }

    /// Row label as used in the parameter table.
    pub fn label(self) -> &'static str {
        match self {
            Preset::SL => "SL",
            Preset::NLS => "NLS",
            Preset::CanSys => "Can. Sys.",
        }
    }

    pub fn params(self) -> VesselParams {
        preset_params(self)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = VesselError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sl" | "kdv" | "sturm-liouville" => Ok(Preset::SL),
            "nls" => Ok(Preset::NLS),
            "cansys" | "can. sys." | "canonical" => Ok(Preset::CanSys),
            _ => Err(VesselError::UnknownPreset(s.to_string())),
        }
    }
}

fn m2(a: [[C64; 2]; 2]) -> CMat {
    CMat::from_fn(2, 2, |i, j| a[i][j])
}

/// The exact matrices of the three standard parameter rows.
pub fn preset_params(kind: Preset) -> VesselParams {
    let z = re(0.0);
    let one = re(1.0);
    let (sigma1, sigma2, gamma) = match kind {
        Preset::SL => (
            m2([[z, one], [one, z]]),
            m2([[one, z], [z, z]]),
            m2([[z, z], [z, c(0.0, 1.0)]]),
        ),
        Preset::NLS => (
            m2([[one, z], [z, one]]),
            m2([[re(0.5), z], [z, re(-0.5)]]),
            m2([[z, z], [z, z]]),
        ),
        Preset::CanSys => (
            m2([[z, c(0.0, 1.0)], [c(0.0, -1.0), z]]),
            m2([[one, z], [z, one]]),
            m2([[z, z], [z, z]]),
        ),
    };
    VesselParams {
        p: 2,
        sigma1,
        sigma2,
        gamma,
    }
}

impl VesselParams {
    /// Builds parameters after checking that all three matrices are `p × p`.
    pub fn new(sigma1: CMat, sigma2: CMat, gamma: CMat) -> Result<Self> {
        let p = sigma1.nrows();
        for (name, m) in [("sigma1", &sigma1), ("sigma2", &sigma2), ("gamma", &gamma)] {
            if m.nrows() != p || m.ncols() != p {
                return Err(VesselError::Dimension(format!(
                    "{name} is {}x{}, expected {p}x{p}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if p == 0 {
            return Err(VesselError::Dimension("p must be positive".into()));
        }
        Ok(Self {
            p,
            sigma1,
            sigma2,
            gamma,
        })
    }

    /// Structural report: Hermiticity of σ1, σ2, skew-Hermiticity of γ, invertibility of σ1.
    pub fn validate(&self) -> Result<CheckReport> {
        validate_params(self)
    }

    /// Like [`validate`](Self::validate) but fails on the first violated invariant.
    pub fn checked(self) -> Result<Self> {
        let report = self.validate()?;
        if let Some(name) = report.failures().first() {
            if *name == "sigma1_invertible" {
                return Err(VesselError::SingularSigma1 {
                    cond: self.sigma1_condition(),
                });
            }
            return Err(VesselError::Invariant(format!("vessel parameters: {name}")));
        }
        Ok(self)
    }

    pub fn sigma1_condition(&self) -> f64 {
        linalg::condition(&self.sigma1)
    }

    pub fn sigma1_inv(&self) -> Result<CMat> {
        let cond = self.sigma1_condition();
        if !cond.is_finite() || cond > SIGMA1_COND_LIMIT {
            return Err(VesselError::SingularSigma1 { cond });
        }
        linalg::inverse(&self.sigma1, "sigma1")
    }

    /// Identifies which preset these parameters are, if any (exact comparison).
    pub fn preset(&self) -> Option<Preset> {
        Preset::ALL.into_iter().find(|k| &k.params() == self)
    }

    pub fn scale(&self) -> f64 {
        fro(&self.sigma1) + fro(&self.sigma2) + fro(&self.gamma)
    }
}

pub fn validate_params(params: &VesselParams) -> Result<CheckReport> {
    let p = params.p;
    for (name, m) in [
        ("sigma1", &params.sigma1),
        ("sigma2", &params.sigma2),
        ("gamma", &params.gamma),
    ] {
        if m.nrows() != p || m.ncols() != p {
            return Err(VesselError::Dimension(format!(
                "{name} is {}x{}, expected {p}x{p}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let tol = |m: &CMat| STRUCTURE_TOL * (1.0 + fro(m));
    let mut report = CheckReport::new();
    let s1 = &params.sigma1;
    report.record("sigma1_hermitian", linalg::hermitian_defect(s1), tol(s1));
    let s2 = &params.sigma2;
    report.record("sigma2_hermitian", linalg::hermitian_defect(s2), tol(s2));
    let g = &params.gamma;
    report.record("gamma_skew_hermitian", fro(&(g + g.adjoint())), tol(g));
    let cond = params.sigma1_condition();
    // Residual is the reciprocal condition so that the check reads "small is bad".
    let rcond = if cond.is_finite() { 1.0 / cond } else { 0.0 };
    report.record(
        "sigma1_invertible",
        if rcond >= 1.0 / SIGMA1_COND_LIMIT { 0.0 } else { 1.0 },
        0.5,
    );
    report.annotate("sigma1_invertible", format!("condition number {cond:.3e}"));
    Ok(report)
}
