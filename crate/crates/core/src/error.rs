use thiserror::Error;

/// Errors raised by vessel construction, evolution and verification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VesselError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown preset `{0}` (supported: SL, NLS, CanSys)")]
    UnknownPreset(String),

    #[error("sigma1 is numerically singular (condition number {cond:.3e})")]
    SingularSigma1 { cond: f64 },

    #[error("resonant Lyapunov pair ({j}, {k}): {reason}")]
    Resonance { j: usize, k: usize, reason: String },

    #[error("incompatible input row {index}: diagonal of B sigma1 B* is {value:.3e}, expected 0")]
    Compatibility { index: usize, value: f64 },

    #[error("ill-conditioned eigenbasis (condition number {cond:.3e})")]
    Conditioning { cond: f64 },

    #[error("realization invariant violated: {0}")]
    Invariant(String),

    #[error("matrix exponential out of range (norm {norm:.3e}); rescale x, t or the realization")]
    ExpRange { norm: f64 },

    #[error("integration step collapsed at s = {at} on the {axis}-path")]
    Integration { axis: char, at: f64 },

    #[error("singular point at (x, t) = ({x}, {t}): |tau| = {tau_abs:.3e} below guard")]
    SingularPoint { x: f64, t: f64, tau_abs: f64 },

    #[error("lambda = {lambda} lies within {distance:.3e} of spec(A)")]
    NearPole { lambda: String, distance: f64 },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("all grid nodes were excluded")]
    EmptyFrame,

    #[error("structure check failed: {0}")]
    Shape(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, VesselError>;

impl From<std::io::Error> for VesselError {
    fn from(e: std::io::Error) -> Self {
        VesselError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for VesselError {
    fn from(e: serde_json::Error) -> Self {
        VesselError::Io(e.to_string())
    }
}

impl From<csv::Error> for VesselError {
    fn from(e: csv::Error) -> Self {
        VesselError::Io(e.to_string())
    }
}
