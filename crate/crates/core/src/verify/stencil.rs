//! Finite-difference stencils with exact rational weights.

use ndarray::{Array2, Axis as NdAxis};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Result, VesselError};
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub derivative: usize,
    /// Formal accuracy order.
    pub order: usize,
    pub offsets: Vec<i64>,
    pub weights: Vec<BigRational>,
    weights_f64: Vec<f64>,
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Solves `Σ_j w_j o_j^k = d! δ_{kd}` for `k = 0..offsets.len()` by exact elimination.
fn solve_weights(offsets: &[i64], d: usize) -> Vec<BigRational> {
    let m = offsets.len();
    let mut rows: Vec<Vec<BigRational>> = (0..m)
        .map(|k| {
            let mut row: Vec<BigRational> = offsets
                .iter()
                .map(|&o| BigRational::from_integer(BigInt::from(o).pow(k as u32)))
                .collect();
            row.push(if k == d {
                BigRational::from_integer(factorial(d))
            } else {
                BigRational::zero()
            });
            row
        })
        .collect();
    for col in 0..m {
        let piv = (col..m).find(|&r| !rows[r][col].is_zero()).expect("Vandermonde system is nonsingular");
        rows.swap(col, piv);
        let p = rows[col][col].clone();
        for v in rows[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..m {
            if r != col && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                let pivot_row = rows[col].clone();
                for (dst, src) in rows[r].iter_mut().zip(&pivot_row).skip(col) {
                    *dst = &*dst - &f * src;
                }
            }
        }
    }
    rows.into_iter().map(|r| r[m].clone()).collect()
}

impl Stencil {
    pub fn from_offsets(derivative: usize, order: usize, offsets: Vec<i64>) -> Self {
        let weights = solve_weights(&offsets, derivative);
        let weights_f64 = weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect();
        Self {
            derivative,
            order,
            offsets,
            weights,
            weights_f64,
        }
    }

    /// Symmetric stencil of even accuracy `order`; half-width `⌊(d−1)/2⌋ + order/2`.
    pub fn central(derivative: usize, order: usize) -> Result<Self> {
        if derivative == 0 || order == 0 || order % 2 == 1 {
            return Err(VesselError::Range(format!(
                "central stencil needs d ≥ 1 and even order, got d = {derivative}, order = {order}"
            )));
        }
        let r = ((derivative - 1) / 2 + order / 2) as i64;
        Ok(Self::from_offsets(derivative, order, (-r..=r).collect()))
    }

    /// One-sided stencil on `0, 1, ..` (`forward`) or `0, −1, ..`.
    pub fn one_sided(derivative: usize, order: usize, forward: bool) -> Result<Self> {
        if derivative == 0 || order == 0 {
            return Err(VesselError::Range("one-sided stencil needs d ≥ 1 and order ≥ 1".into()));
        }
        let m = (derivative + order) as i64;
        let offsets = (0..m).map(|k| if forward { k } else { -k }).collect();
        Ok(Self::from_offsets(derivative, order, offsets))
    }

    pub fn half_width(&self) -> usize {
        self.offsets.iter().map(|o| o.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn weights_f64(&self) -> &[f64] {
        &self.weights_f64
    }

    /// `h^{-d} Σ_j w_j f(o_j)`.
    pub fn apply(&self, f: impl Fn(i64) -> C64, h: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (o, w) in self.offsets.iter().zip(&self.weights_f64) {
            acc += f(*o) * *w;
        }
        acc / h.powi(self.derivative as i32)
    }

    /// Polynomial degree reproduced exactly.
    pub fn exact_degree(&self) -> usize {
        self.order + self.derivative - 1
    }
}

/// Derivative of a sampled 2-D field along `axis` (0 = t rows, 1 = x columns).
///
/// Central stencils of accuracy `order` in the interior, second-order one-sided
/// stencils at the edges. The returned flags mark interior indices.
pub fn differentiate(field: &Array2<C64>, axis: usize, d: usize, h: f64, order: usize) -> Result<(Array2<C64>, Vec<bool>)> {
    let len = field.len_of(NdAxis(axis));
    let central = Stencil::central(d, order)?;
    let r = central.half_width();
    let fwd = Stencil::one_sided(d, 2, true)?;
    let bwd = Stencil::one_sided(d, 2, false)?;
    if len < fwd.offsets.len().max(2 * r + 1) {
        return Err(VesselError::Range(format!(
            "axis {axis} has {len} nodes; derivative of order {d} needs at least {}",
            fwd.offsets.len().max(2 * r + 1)
        )));
    }
    let mut out = Array2::zeros(field.raw_dim());
    for (lane_in, mut lane_out) in field.lanes(NdAxis(axis)).into_iter().zip(out.lanes_mut(NdAxis(axis))) {
        for i in 0..len {
            let (st, base) = if i >= r && i + r < len {
                (&central, i as i64)
            } else if i < r {
                (&fwd, i as i64)
            } else {
                (&bwd, i as i64)
            };
            lane_out[i] = st.apply(|o| lane_in[(base + o) as usize], h);
        }
    }
    let interior = (0..len).map(|i| i >= r && i + r < len).collect();
    Ok((out, interior))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn classic_weights() {
        let s = Stencil::central(1, 4).unwrap();
        assert_eq!(s.weights, vec![q(1, 12), q(-2, 3), q(0, 1), q(2, 3), q(-1, 12)]);
        let s = Stencil::central(2, 4).unwrap();
        assert_eq!(s.weights, vec![q(-1, 12), q(4, 3), q(-5, 2), q(4, 3), q(-1, 12)]);
        let s = Stencil::central(3, 4).unwrap();
        assert_eq!(s.weights, vec![q(1, 8), q(-1, 1), q(13, 8), q(0, 1), q(-13, 8), q(1, 1), q(-1, 8)]);
        let s = Stencil::one_sided(1, 2, true).unwrap();
        assert_eq!(s.weights, vec![q(-3, 2), q(2, 1), q(-1, 2)]);
    }

    #[test]
    fn polynomial_exactness() {
        for d in 1..=5 {
            for order in [2, 4] {
                let stencils = [
                    Stencil::central(d, order).unwrap(),
                    Stencil::one_sided(d, order, true).unwrap(),
                    Stencil::one_sided(d, order, false).unwrap(),
                ];
                for s in stencils {
                    for deg in 0..=s.exact_degree() {
                        // Σ w_j o_j^deg = d! δ
                        let sum = s
                            .offsets
                            .iter()
                            .zip(&s.weights)
                            .fold(BigRational::zero(), |acc, (o, w)| {
                                acc + w * BigRational::from_integer(BigInt::from(*o).pow(deg as u32))
                            });
                        let expect = if deg == d {
                            BigRational::from_integer(factorial(d))
                        } else {
                            BigRational::zero()
                        };
                        assert_eq!(sum, expect, "d = {d} order = {order} deg = {deg}");
                    }
                }
            }
        }
    }

    #[test]
    fn linear_samples_give_unit_slope() {
        let f = Array2::from_shape_fn((1, 9), |(_, i)| re(0.1 * i as f64 - 0.3));
        let (df, interior) = differentiate(&f, 1, 1, 0.1, 4).unwrap();
        assert!(df.iter().all(|v| (v - re(1.0)).norm() < 1e-12));
        assert_eq!(interior.iter().filter(|&&b| b).count(), 5);
        assert!(differentiate(&f, 1, 7, 0.1, 4).is_err());
    }
}
