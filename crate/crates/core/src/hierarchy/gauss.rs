//! Exact Gaussian rationals `a + b i` with `a, b ∈ ℚ`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// `n/d`
    pub fn real(n: i64, d: i64) -> Self {
        Self::new(Self::ratio(n, d), BigRational::zero())
    }

    /// `i n/d`
    pub fn imag(n: i64, d: i64) -> Self {
        Self::new(BigRational::zero(), Self::ratio(n, d))
    }

    pub fn i() -> Self {
        Self::imag(1, 1)
    }

    pub fn zero() -> Self {
        Self::real(0, 1)
    }

    pub fn one() -> Self {
        Self::real(1, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-&self.re, -&self.im)
    }
}

const MINUS: char = '\u{2212}';

fn sign(r: &BigRational) -> char {
    if r.is_negative() {
        MINUS
    } else {
        '+'
    }
}

/// `|r|` as `p/q`, with the `i` placed after the numerator when `imag`.
fn magnitude(r: &BigRational, imag: bool) -> String {
    let a = r.abs();
    let numer = a.numer();
    let denom = a.denom();
    let num = match (imag, numer.is_one()) {
        (true, true) => "i".to_string(),
        (true, false) => format!("{numer}i"),
        (false, _) => numer.to_string(),
    };
    if denom.is_one() {
        num
    } else {
        format!("{num}/{denom}")
    }
}

/// Signed rendering without parentheses: `+3/2`, `−i/16`, `+1/2−3i/4`.
impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "+0"),
            (false, true) => write!(f, "{}{}", sign(&self.re), magnitude(&self.re, false)),
            (true, false) => write!(f, "{}{}", sign(&self.im), magnitude(&self.im, true)),
            (false, false) => write!(
                f,
                "{}{}{}{}",
                sign(&self.re),
                magnitude(&self.re, false),
                sign(&self.im),
                magnitude(&self.im, true)
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_rendering() {
        let i = GaussRat::i();
        assert_eq!(&i * &i, GaussRat::real(-1, 1));
        assert_eq!(GaussRat::real(3, 2).to_string(), "+3/2");
        assert_eq!(GaussRat::real(-1, 4).to_string(), "\u{2212}1/4");
        assert_eq!(GaussRat::imag(1, 16).to_string(), "+i/16");
        assert_eq!(GaussRat::imag(-3, 4).to_string(), "\u{2212}3i/4");
        assert_eq!(GaussRat::imag(-1, 1).to_string(), "\u{2212}i");
        let z = &GaussRat::real(1, 2) + &GaussRat::imag(-3, 4);
        assert_eq!(z.to_string(), "+1/2\u{2212}3i/4");
        assert_eq!(z.to_c64(), C64::new(0.5, -0.75));
    }
}
