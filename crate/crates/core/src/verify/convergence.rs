use serde::{Deserialize, Serialize};

use crate::error::{Result, VesselError};

/// Residuals at or below this are floating-point noise.
pub const RESIDUAL_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    /// Order estimated from at least two residuals above the floor.
    Estimated,
    /// Fewer than two residuals above the floor.
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub name: String,
    pub h_values: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log r` against `log h`; 0 for floor studies.
    pub observed_order: f64,
    pub status: ConvergenceStatus,
}

impl ConvergenceStudy {
    pub fn from_residuals(name: impl Into<String>, h_values: Vec<f64>, residuals: Vec<f64>) -> Result<Self> {
        if h_values.len() < 3 || h_values.len() != residuals.len() {
            return Err(VesselError::Range("a convergence study needs at least 3 (h, residual) pairs".into()));
        }
        if h_values.windows(2).any(|w| w[1] >= w[0]) || h_values.iter().any(|h| !(*h > 0.0)) {
            return Err(VesselError::Range("h values must be positive and strictly decreasing".into()));
        }
        if residuals.iter().any(|r| !r.is_finite()) {
            return Err(VesselError::Range("non-finite residual in convergence study".into()));
        }
        let pts: Vec<(f64, f64)> = h_values
            .iter()
            .zip(&residuals)
            .filter(|(_, r)| **r > RESIDUAL_FLOOR)
            .map(|(h, r)| (h.ln(), r.ln()))
            .collect();
        let (observed_order, status) = if pts.len() < 2 {
            (0.0, ConvergenceStatus::Floor)
        } else {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            (sxy / sxx, ConvergenceStatus::Estimated)
        };
        Ok(Self {
            name: name.into(),
            h_values,
            residuals,
            observed_order,
            status,
        })
    }

    /// Order inside `[lo, hi]`, or a floor pass.
    pub fn passes(&self, lo: f64, hi: f64) -> bool {
        match self.status {
            ConvergenceStatus::Floor => true,
            ConvergenceStatus::Estimated => self.observed_order >= lo && self.observed_order <= hi,
        }
    }

    /// Residual at each refinement below the previous one, ignoring floor values.
    pub fn monotone(&self) -> bool {
        self.residuals
            .windows(2)
            .all(|w| w[1] < w[0] || w[1] <= RESIDUAL_FLOOR)
    }
}

pub fn convergence_study<F>(name: &str, mut residual_fn: F, h_values: &[f64]) -> Result<ConvergenceStudy>
where
    F: FnMut(f64) -> Result<f64>,
{
    let residuals = h_values.iter().map(|&h| residual_fn(h)).collect::<Result<Vec<_>>>()?;
    ConvergenceStudy::from_residuals(name, h_values.to_vec(), residuals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_fourth_order() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let s = convergence_study("h4", |h| Ok(3.0 * h.powi(4)), &hs).unwrap();
        assert!((s.observed_order - 4.0).abs() < 1e-12);
        assert!(s.passes(3.0, 5.0) && s.monotone());
    }

    #[test]
    fn floor_pass() {
        let s = convergence_study("floor", |_| Ok(1e-13), &[0.1, 0.05, 0.025]).unwrap();
        assert_eq!(s.status, ConvergenceStatus::Floor);
        assert!(s.passes(3.0, 5.0));
        assert!(s.observed_order.is_finite());
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(ConvergenceStudy::from_residuals("x", vec![0.1, 0.2, 0.05], vec![1.0; 3]).is_err());
        assert!(ConvergenceStudy::from_residuals("x", vec![0.1, 0.05], vec![1.0; 2]).is_err());
    }
}
