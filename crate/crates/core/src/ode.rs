//! Dormand–Prince 5(4) integrator for linear and nonlinear vector ODEs, used as
//! an independent oracle for the closed-form flows.

use crate::error::{Result, VesselError};
use crate::linalg::{CVec, C64};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub h_min: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_steps: 1_000_000,
            h_min: 1e-14,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub y: CVec,
    pub steps: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(s, y)` from `s0` to `s1` (either direction).
pub fn dopri5<F>(mut f: F, s0: f64, y0: &CVec, s1: f64, opts: OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &CVec) -> CVec,
{
    let mut y = y0.clone();
    if s1 == s0 {
        return Ok(OdeSolution {
            y,
            steps: 0,
            rejected: 0,
        });
    }
    let dir = (s1 - s0).signum();
    let span = (s1 - s0).abs();
    let mut s = s0;
    let mut h = (span / 100.0).min(0.01);
    let mut k: Vec<CVec> = Vec::with_capacity(7);
    let mut f0 = f(s, &y);
    let (mut steps, mut rejected) = (0, 0);
    while (s1 - s) * dir > 0.0 {
        if steps + rejected > opts.max_steps {
            return Err(VesselError::Integration { axis: 's', at: s });
        }
        let remaining = (s1 - s).abs();
        let last = h >= remaining;
        let hh = if last { remaining } else { h };
        k.clear();
        k.push(f0.clone());
        for stage in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[stage][j] != 0.0 {
                    ys.axpy(C64::new(dir * hh * A[stage][j], 0.0), kj, C64::new(1.0, 0.0));
                }
            }
            k.push(f(s + dir * hh * C[stage], &ys));
        }
        let mut y5 = y.clone();
        let mut err = CVec::zeros(y.len());
        for j in 0..7 {
            if B5[j] != 0.0 {
                y5.axpy(C64::new(dir * hh * B5[j], 0.0), &k[j], C64::new(1.0, 0.0));
            }
            let e = B5[j] - B4[j];
            if e != 0.0 {
                err.axpy(C64::new(dir * hh * e, 0.0), &k[j], C64::new(1.0, 0.0));
            }
        }
        let mut ratio: f64 = 0.0;
        for i in 0..y.len() {
            let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(y5[i].norm());
            ratio = ratio.max(err[i].norm() / sc);
        }
        if ratio <= 1.0 {
            s = if last { s1 } else { s + dir * hh };
            y = y5;
            f0 = k[6].clone();
            steps += 1;
        } else {
            rejected += 1;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = hh * factor;
        if h < opts.h_min && !last {
            return Err(VesselError::Integration { axis: 's', at: s });
        }
    }
    Ok(OdeSolution { y, steps, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    #[test]
    fn complex_exponential() {
        let lam = c(-0.3, 2.0);
        let y0 = CVec::from_vec(vec![re(1.0), c(0.0, 1.0)]);
        let sol = dopri5(|_, y| y * lam, 0.0, &y0, 1.5, OdeOptions::default()).unwrap();
        let e = (lam * 1.5).exp();
        assert!((sol.y[0] - e).norm() < 1e-12);
        assert!((sol.y[1] - e * c(0.0, 1.0)).norm() < 1e-12);
        let back = dopri5(|_, y| y * lam, 1.5, &sol.y, 0.0, OdeOptions::default()).unwrap();
        assert!((back.y[0] - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = 2 s y, y = exp(s²)
        let y0 = CVec::from_vec(vec![re(1.0)]);
        let sol = dopri5(|s, y| y * re(2.0 * s), 0.0, &y0, 1.0, OdeOptions::default()).unwrap();
        assert!((sol.y[0].re - 1.0f64.exp()).abs() < 1e-12);
    }
}
