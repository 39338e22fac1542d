//! Adaptive Gauss–Kronrod (7, 15) quadrature for matrix-valued integrands.
#![allow(clippy::excessive_precision)]

use crate::error::Result;
use crate::linalg::{fro, CMat, C64};

/// Kronrod abscissae on `[0, 1]` (mirrored about 0), outermost first.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the odd-indexed Kronrod abscissae `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Node offsets of a 15-point panel in units of its half-width.
pub fn panel_nodes() -> [f64; 15] {
    let mut out = [0.0; 15];
    for k in 0..7 {
        out[k] = -XGK[k];
        out[14 - k] = XGK[k];
    }
    out[7] = 0.0;
    out
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-300,
            max_depth: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: CMat,
    pub error: f64,
    pub panels: usize,
}

/// One panel: Kronrod estimate and `‖K15 − G7‖`.
fn panel<F>(f: &mut F, lo: f64, hi: f64) -> Result<(CMat, f64)>
where
    F: FnMut(f64) -> Result<CMat>,
{
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let fc = f(mid)?;
    let mut k = &fc * C64::new(WGK[7], 0.0);
    let mut g = &fc * C64::new(WG[3], 0.0);
    for j in 0..7 {
        let d = half * XGK[j];
        let s = f(mid - d)? + f(mid + d)?;
        k += &s * C64::new(WGK[j], 0.0);
        if j % 2 == 1 {
            g += &s * C64::new(WG[j / 2], 0.0);
        }
    }
    let k = k * C64::new(half, 0.0);
    let g = g * C64::new(half, 0.0);
    let err = fro(&(&k - g));
    Ok((k, err))
}

/// Integrates `f` over `[a, b]` by recursive bisection until every panel's
/// Gauss–Kronrod discrepancy is within its share of the tolerance.
///
/// On depth exhaustion the returned error is `Err(at)` with the panel midpoint.
pub fn integrate<F>(f: &mut F, a: f64, b: f64, opts: QuadOptions) -> Result<std::result::Result<QuadResult, f64>>
where
    F: FnMut(f64) -> Result<CMat>,
{
    let (whole, err) = panel(f, a, b)?;
    let target = (opts.rel_tol * fro(&whole)).max(opts.abs_tol);
    if err <= target {
        return Ok(Ok(QuadResult {
            value: whole,
            error: err,
            panels: 1,
        }));
    }
    let len = (b - a).abs();
    let mut stack = vec![(a, b, whole, err, 0u32)];
    let mut value: Option<CMat> = None;
    let mut total_err = 0.0;
    let mut panels = 0;
    while let Some((lo, hi, val, e, depth)) = stack.pop() {
        let share = target * ((hi - lo).abs() / len);
        if e <= share || (depth > 0 && e <= opts.abs_tol) {
            total_err += e;
            panels += 1;
            value = Some(match value {
                Some(v) => v + val,
                None => val,
            });
            continue;
        }
        if depth >= opts.max_depth {
            return Ok(Err(0.5 * (lo + hi)));
        }
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = panel(f, lo, mid)?;
        let (v2, e2) = panel(f, mid, hi)?;
        stack.push((mid, hi, v2, e2, depth + 1));
        stack.push((lo, mid, v1, e1, depth + 1));
    }
    Ok(Ok(QuadResult {
        value: value.expect("at least one panel"),
        error: total_err,
        panels,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    fn scalar(v: f64) -> CMat {
        CMat::from_element(1, 1, re(v))
    }

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let g: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials() {
        // Kronrod 15 integrates degree 22 exactly, Gauss 7 degree 13.
        for deg in [0, 5, 13, 22] {
            let mut f = |s: f64| Ok(scalar(s.powi(deg)));
            let (k, _) = panel(&mut f, -1.0, 1.0).unwrap();
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((k[(0, 0)].re - exact).abs() < 1e-14, "degree {deg}");
        }
        let mut f = |s: f64| Ok(scalar(s.powi(13)));
        let (_, e) = panel(&mut f, 0.0, 1.0).unwrap();
        assert!(e < 1e-15);
    }

    #[test]
    fn adaptive_exponential() {
        let mut f = |s: f64| Ok(scalar((3.0 * s).exp()));
        let r = integrate(&mut f, -2.0, 4.0, QuadOptions::default()).unwrap().unwrap();
        let exact = ((12.0f64).exp() - (-6.0f64).exp()) / 3.0;
        assert!((r.value[(0, 0)].re - exact).abs() <= 1e-13 * exact);
        let mut g = |s: f64| Ok(scalar(s.sin()));
        let r = integrate(&mut g, 1.0, 0.0, QuadOptions::default()).unwrap().unwrap();
        assert!((r.value[(0, 0)].re - (1.0f64.cos() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn singular_integrand_reports_location() {
        let mut f = |s: f64| Ok(scalar(1.0 / s.abs().sqrt().max(1e-300)));
        let opts = QuadOptions {
            max_depth: 6,
            ..QuadOptions::default()
        };
        assert!(integrate(&mut f, 0.0, 1.0, opts).unwrap().is_err());
    }
}
