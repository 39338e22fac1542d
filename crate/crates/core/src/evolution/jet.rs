//! Truncated bivariate Taylor jets of matrix functions of `(x, t)`.
//!
//! Entry `(a, b)` holds `∂x^a ∂t^b f` (not divided by factorials), so products
//! follow the Leibniz rule with binomial weights.

use crate::error::Result;
use crate::linalg::{self, CMat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub ax: usize,
    pub bt: usize,
    data: Vec<CMat>,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Jet {
    pub fn zeros(ax: usize, bt: usize, rows: usize, cols: usize) -> Self {
        Self {
            ax,
            bt,
            data: vec![CMat::zeros(rows, cols); (ax + 1) * (bt + 1)],
        }
    }

    /// A constant: value at `(0, 0)`, zero derivatives.
    pub fn constant(ax: usize, bt: usize, m: &CMat) -> Self {
        let mut j = Self::zeros(ax, bt, m.nrows(), m.ncols());
        j.set(0, 0, m.clone());
        j
    }

    pub fn from_fn(ax: usize, bt: usize, mut f: impl FnMut(usize, usize) -> CMat) -> Self {
        let mut data = Vec::with_capacity((ax + 1) * (bt + 1));
        for a in 0..=ax {
            for b in 0..=bt {
                data.push(f(a, b));
            }
        }
        Self { ax, bt, data }
    }

    fn idx(&self, a: usize, b: usize) -> usize {
        assert!(a <= self.ax && b <= self.bt, "jet index ({a}, {b}) out of range");
        a * (self.bt + 1) + b
    }

    pub fn get(&self, a: usize, b: usize) -> &CMat {
        &self.data[self.idx(a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, m: CMat) {
        let i = self.idx(a, b);
        self.data[i] = m;
    }

    pub fn value(&self) -> &CMat {
        self.get(0, 0)
    }

    pub fn map(&self, mut f: impl FnMut(&CMat) -> CMat) -> Self {
        Self {
            ax: self.ax,
            bt: self.bt,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.map(|m| m.adjoint())
    }

    pub fn add(&self, other: &Jet) -> Self {
        let mut out = self.clone();
        for (o, m) in out.data.iter_mut().zip(&other.data) {
            *o += m;
        }
        out
    }

    /// Leibniz product, truncated to the smaller of the two orders.
    pub fn mul(&self, other: &Jet) -> Self {
        let ax = self.ax.min(other.ax);
        let bt = self.bt.min(other.bt);
        let rows = self.value().nrows();
        let cols = other.value().ncols();
        Self::from_fn(ax, bt, |a, b| {
            let mut acc = CMat::zeros(rows, cols);
            for i in 0..=a {
                for j in 0..=b {
                    let w = binom(a, i) * binom(b, j);
                    acc += self.get(i, j) * other.get(a - i, b - j) * C64::new(w, 0.0);
                }
            }
            acc
        })
    }

    /// Jet of the matrix inverse, from `Σ_β C(α, β) X_{α−β} Y_β = 0` for `α ≠ 0`.
    pub fn inverse(&self) -> Result<Self> {
        let x0inv = linalg::inverse_equilibrated(self.value(), "jet value")?;
        let n = x0inv.nrows();
        let mut out = Self::zeros(self.ax, self.bt, n, n);
        out.set(0, 0, x0inv.clone());
        for a in 0..=self.ax {
            for b in 0..=self.bt {
                if a == 0 && b == 0 {
                    continue;
                }
                let mut acc = CMat::zeros(n, n);
                for i in 0..=a {
                    for j in 0..=b {
                        if i == a && j == b {
                            continue;
                        }
                        let w = binom(a, i) * binom(b, j);
                        acc += self.get(a - i, b - j) * out.get(i, j) * C64::new(w, 0.0);
                    }
                }
                out.set(a, b, -(&x0inv * acc));
            }
        }
        Ok(out)
    }

    pub fn trace_jet(&self) -> Vec<Vec<C64>> {
        (0..=self.ax)
            .map(|a| (0..=self.bt).map(|b| self.get(a, b).trace()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, fro, re};

    /// Jet of `f(x, t) = exp(x p + t q)` at the origin for commuting scalars.
    fn exp_jet(p: C64, q: C64, ax: usize, bt: usize) -> Jet {
        Jet::from_fn(ax, bt, |a, b| CMat::from_element(1, 1, p.powu(a as u32) * q.powu(b as u32)))
    }

    #[test]
    fn product_of_exponentials() {
        let f = exp_jet(c(0.3, 0.1), re(-0.7), 3, 2);
        let g = exp_jet(re(1.1), c(0.0, 0.4), 3, 2);
        let fg = f.mul(&g);
        let expect = exp_jet(c(1.4, 0.1), c(-0.7, 0.4), 3, 2);
        for a in 0..=3 {
            for b in 0..=2 {
                assert!(fro(&(fg.get(a, b) - expect.get(a, b))) < 1e-13);
            }
        }
    }

    #[test]
    fn inverse_of_matrix_polynomial() {
        // X(x, t) = X0 + x X1 + t X2 + x t X3, independent check: X·X⁻¹ = I jet-wise
        let x0 = CMat::from_fn(2, 2, |i, j| if i == j { re(2.0 + i as f64) } else { c(0.3, -0.1) });
        let x1 = CMat::from_fn(2, 2, |i, j| c(0.1 * (i + j) as f64, 0.2));
        let x2 = CMat::from_fn(2, 2, |i, j| c(-0.2, 0.05 * i as f64 - 0.1 * j as f64));
        let x3 = CMat::from_fn(2, 2, |i, _| re(0.4 - i as f64));
        let mut jx = Jet::zeros(2, 2, 2, 2);
        jx.set(0, 0, x0);
        jx.set(1, 0, x1);
        jx.set(0, 1, x2);
        jx.set(1, 1, x3);
        let prod = jx.mul(&jx.inverse().unwrap());
        for a in 0..=2 {
            for b in 0..=2 {
                let target = if a == 0 && b == 0 { linalg::eye(2) } else { CMat::zeros(2, 2) };
                assert!(fro(&(prod.get(a, b) - target)) < 1e-13, "({a}, {b})");
            }
        }
    }
}
