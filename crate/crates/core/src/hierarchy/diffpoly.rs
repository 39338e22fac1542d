//! Differential polynomials in `β` and its x-derivatives.

use std::collections::BTreeMap;
use std::fmt;

use super::gauss::GaussRat;
use crate::error::{Result, VesselError};
use crate::linalg::C64;
use crate::verify::stencil::Stencil;

/// Derivative orders of the factors, sorted non-increasing; `[]` is the constant 1.
pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, GaussRat>,
}

fn canonical(mut m: Monomial) -> Monomial {
    m.sort_unstable_by(|a, b| b.cmp(a));
    m
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussRat) -> Self {
        Self::term(c, vec![])
    }

    pub fn term(c: GaussRat, monomial: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(canonical(monomial), c);
        p
    }

    /// `∂x^d β`
    pub fn beta(d: u32) -> Self {
        Self::term(GaussRat::one(), vec![d])
    }

    fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&m) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, GaussRat> {
        &self.terms
    }

    pub fn coefficient(&self, monomial: &[u32]) -> GaussRat {
        self.terms
            .get(&canonical(monomial.to_vec()))
            .cloned()
            .unwrap_or_else(GaussRat::zero)
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().flat_map(|m| m.iter().copied()).max().unwrap_or(0)
    }
}

pub fn dp_add(a: &DiffPoly, b: &DiffPoly) -> DiffPoly {
    let mut out = a.clone();
    for (m, c) in &b.terms {
        out.add_term(m.clone(), c.clone());
    }
    out
}

pub fn dp_sub(a: &DiffPoly, b: &DiffPoly) -> DiffPoly {
    dp_add(a, &b.scale(&GaussRat::real(-1, 1)))
}

pub fn dp_mul(a: &DiffPoly, b: &DiffPoly) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            let mut m = ma.clone();
            m.extend_from_slice(mb);
            out.add_term(canonical(m), ca * cb);
        }
    }
    out
}

/// Leibniz rule: each factor in turn gets one more derivative.
pub fn dp_dx(a: &DiffPoly) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for (m, c) in &a.terms {
        for i in 0..m.len() {
            let mut d = m.clone();
            d[i] += 1;
            out.add_term(canonical(d), c.clone());
        }
    }
    out
}

pub fn dp_dx_n(a: &DiffPoly, n: usize) -> DiffPoly {
    (0..n).fold(a.clone(), |acc, _| dp_dx(&acc))
}

/// `b0 = −¼ β_xxx + 3/2 β_x²`
pub fn b0() -> DiffPoly {
    dp_add(
        &DiffPoly::term(GaussRat::real(-1, 4), vec![3]),
        &DiffPoly::term(GaussRat::real(3, 2), vec![1, 1]),
    )
}

/// `b_{n+1} = ¼ (−i ∂x² b_n + 4i β_x b_n)`, the antiderivative of
/// `4 (b_{n+1})_x = −i (b_n)_xxx + 4i (β_x b_n)_x` with zero constant.
pub fn next_b(b: &DiffPoly) -> DiffPoly {
    let i = GaussRat::i();
    let t1 = dp_dx_n(b, 2).scale(&(&i * &GaussRat::real(-1, 4)));
    let t2 = dp_mul(&DiffPoly::beta(1), b).scale(&i);
    dp_add(&t1, &t2)
}

/// `b_0, ..., b_n`
pub fn hierarchy(n: usize) -> Vec<DiffPoly> {
    let mut out = vec![b0()];
    for k in 0..n {
        let next = next_b(&out[k]);
        out.push(next);
    }
    out
}

fn factor_name(d: u32) -> String {
    format!("β{}", "x".repeat(d as usize))
}

fn superscript(k: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    k.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap() as usize]).collect()
}

pub fn render_monomial(m: &[u32]) -> String {
    if m.is_empty() {
        return "1".into();
    }
    // ascending order of derivatives, equal factors grouped as powers
    let mut asc = m.to_vec();
    asc.sort_unstable();
    let mut parts = Vec::new();
    let mut i = 0;
    while i < asc.len() {
        let j = (i..asc.len()).take_while(|&k| asc[k] == asc[i]).count() + i;
        let count = j - i;
        let mut s = factor_name(asc[i]);
        if count > 1 {
            s.push_str(&superscript(count));
        }
        parts.push(s);
        i = j;
    }
    parts.join("·")
}

impl DiffPoly {
    /// Terms by descending total derivative order, ties by descending monomial.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &GaussRat)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let ta: u32 = a.iter().sum();
            let tb: u32 = b.iter().sum();
            tb.cmp(&ta).then_with(|| b.cmp(a))
        });
        v
    }
}

/// `(+3/2)·βx² + (−1/4)·βxxx` style; the zero polynomial renders as `0`.
impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .sorted_terms()
            .into_iter()
            .map(|(m, c)| {
                if m.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})·{}", render_monomial(m))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Evaluates `poly` at `samples[x_index]` using 4th-order central differences.
pub fn dp_eval(poly: &DiffPoly, beta_samples: &[C64], h: f64, x_index: usize) -> Result<C64> {
    let max_d = poly.max_order();
    let mut derivs = vec![beta_samples
        .get(x_index)
        .copied()
        .ok_or_else(|| VesselError::Range(format!("index {x_index} outside {} samples", beta_samples.len())))?];
    for d in 1..=max_d {
        let st = Stencil::central(d as usize, 4)?;
        let r = st.half_width();
        if x_index < r || x_index + r >= beta_samples.len() {
            return Err(VesselError::Range(format!(
                "derivative order {d} needs {r} samples on each side of index {x_index}"
            )));
        }
        derivs.push(st.apply(|o| beta_samples[(x_index as i64 + o) as usize], h));
    }
    Ok(eval_with(poly, &derivs))
}

/// Evaluates `poly` from precomputed values `derivs[d] = ∂x^d β`.
pub fn eval_with(poly: &DiffPoly, derivs: &[C64]) -> C64 {
    poly.terms
        .iter()
        .map(|(m, c)| m.iter().fold(c.to_c64(), |acc, &d| acc * derivs[d as usize]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn derivative_examples() {
        assert_eq!(dp_dx(&DiffPoly::beta(0)), DiffPoly::beta(1));
        let bx2 = dp_mul(&DiffPoly::beta(1), &DiffPoly::beta(1));
        assert_eq!(dp_dx(&bx2), DiffPoly::term(GaussRat::real(2, 1), vec![2, 1]));
        assert_eq!(dp_mul(&DiffPoly::beta(0), &DiffPoly::beta(1)), DiffPoly::term(GaussRat::one(), vec![0, 1]));
    }

    #[test]
    fn b0_terms() {
        let b = b0();
        assert_eq!(b.coefficient(&[3]), GaussRat::real(-1, 4));
        assert_eq!(b.coefficient(&[1, 1]), GaussRat::real(3, 2));
        assert_eq!(b.terms().len(), 2);
        assert_eq!(b.to_string(), "(\u{2212}1/4)·βxxx + (+3/2)·βx²");
    }

    #[test]
    fn b1_terms() {
        let b1 = next_b(&b0());
        assert_eq!(b1.terms().len(), 4);
        assert_eq!(b1.coefficient(&[5]), GaussRat::imag(1, 16));
        assert_eq!(b1.coefficient(&[2, 2]), GaussRat::imag(-3, 4));
        assert_eq!(b1.coefficient(&[1, 3]), GaussRat::imag(-1, 1));
        assert_eq!(b1.coefficient(&[1, 1, 1]), GaussRat::imag(3, 2));
        assert!(next_b(&DiffPoly::zero()).is_zero());
    }

    #[test]
    fn recursion_exactness() {
        let i = GaussRat::i();
        for b in hierarchy(2) {
            let lhs = dp_dx(&next_b(&b)).scale(&GaussRat::real(4, 1));
            let rhs = dp_add(
                &dp_dx_n(&b, 3).scale(&(&i * &GaussRat::real(-1, 1))),
                &dp_dx(&dp_mul(&DiffPoly::beta(1), &b)).scale(&(&i * &GaussRat::real(4, 1))),
            );
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn eval_on_polynomials() {
        let xs: Vec<C64> = (0..11).map(|k| re(0.1 * k as f64)).collect();
        assert_eq!(dp_eval(&DiffPoly::beta(0), &xs, 0.1, 4).unwrap(), xs[4]);
        assert!((dp_eval(&DiffPoly::beta(1), &xs, 0.1, 5).unwrap() - re(1.0)).norm() < 1e-13);
        assert!(dp_eval(&DiffPoly::beta(3), &xs, 0.1, 1).is_err());
        // b0 from the same estimates as the direct formula
        let b: Vec<C64> = (0..11).map(|k| re((0.3 * k as f64).sin())).collect();
        let h = 0.3;
        let d1 = Stencil::central(1, 4).unwrap().apply(|o| b[(5 + o) as usize], h);
        let d3 = Stencil::central(3, 4).unwrap().apply(|o| b[(5 + o) as usize], h);
        assert_eq!(dp_eval(&b0(), &b, h, 5).unwrap(), re(1.5) * d1 * d1 + re(-0.25) * d3);
    }
}
