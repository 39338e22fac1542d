//! The consolidated verification run over one realization.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::convergence::{convergence_study, ConvergenceStatus, ConvergenceStudy};
use super::residuals::{cansys_residual, fit_k_frame, gamma_star_evolution_residual, kdv_residual, nls_residual, TimeOrientation};
use crate::error::{Result, VesselError};
use crate::evolution::{
    build_generators, evolve_b, evolve_x, sample_frame, state_at, FieldFrame, GridSpec, Vessel, XMethod, XPath,
};
use crate::hierarchy::{hierarchy_residual, HierarchyConvention};
use crate::linalg::{self, c, fro, CMat, CVec, C64};
use crate::ode::{dopri5, OdeOptions};
use crate::params::{Preset, VesselParams};
use crate::realization::Realization;
use crate::report::CheckReport;
use crate::scattering::{
    backlund_check, ds_dt_check, ds_dx_check, identity_at_infinity, junitarity_check, spectrum, system_check,
};

pub const SKIPPED_PRECONDITION: &str = "skipped: precondition";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Spectral parameters per realization for the Bäcklund check (half in each half-plane).
    pub lambdas: usize,
    /// Random `(λ, x, t)` triples for the pointwise scattering identities.
    pub points: usize,
    /// Window for pointwise identities; `X` conditioning grows quickly away from `x = 0`.
    pub identity_grid: GridSpec,
    /// Frame for the Lyapunov invariance sweep.
    pub frame_grid: GridSpec,
    /// Window of the PDE convergence studies.
    pub pde_window: [f64; 4],
    pub h_values: Vec<f64>,
    /// Accepted range of observed convergence orders.
    pub order_range: [f64; 2],
    pub convergence: bool,
    pub flow_order: usize,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            lambdas: 10,
            points: 20,
            identity_grid: GridSpec {
                x_min: -1.0,
                x_max: 1.0,
                nx: 5,
                t_min: -0.5,
                t_max: 0.5,
                nt: 3,
            },
            frame_grid: GridSpec {
                x_min: -4.0,
                x_max: 4.0,
                nx: 65,
                t_min: -0.5,
                t_max: 0.5,
                nt: 17,
            },
            pde_window: [-2.0, 2.0, -0.5, 0.5],
            h_values: vec![0.1, 0.05, 0.025, 0.0125],
            order_range: [3.0, 5.0],
            convergence: true,
            flow_order: 1,
            tolerances: BTreeMap::new(),
        }
    }
}

/// Default tolerances by check name.
pub fn default_tolerance(name: &str) -> f64 {
    match name {
        "lyapunov" | "lyapunov_frame" | "path_independence" | "hybrid_x" | "backlund" | "ds_dt" | "gamma_star_evolution"
        | "cansys_structure" => 1e-9,
        "commutation" | "i_resolvent" => 1e-12,
        "mixed_partials" | "evolve_b_oracle" | "ds_dx" | "junitarity" | "ii_derivative" | "iii_output" => 1e-10,
        "identity_at_infinity" => 0.1,
        "cansys_relation" => 1e-6,
        "cansys_residual" => 1e-5,
        _ => 1e-9,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationMeta {
    pub preset: Option<String>,
    pub n: usize,
    pub p: usize,
    pub flow_order: usize,
    pub spectrum: Vec<[f64; 2]>,
    pub resonant_pairs: usize,
    /// Largest `cond(X)` over the sampled identity points; pointwise residuals scale with it.
    pub cond_x_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub name: String,
    /// `None` when the check did not run.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub status: String,
    pub grid: Option<GridSpec>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConvergence {
    pub name: String,
    pub h_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub observed_order: f64,
    pub status: ConvergenceStatus,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub realization: RealizationMeta,
    pub checks: Vec<SuiteCheck>,
    pub convergence: Vec<SuiteConvergence>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> Vec<&str> {
        let checks = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str());
        let studies = self.convergence.iter().filter(|c| !c.pass).map(|c| c.name.as_str());
        checks.chain(studies).collect()
    }

    pub fn check(&self, name: &str) -> Option<&SuiteCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Recorder<'a> {
    config: &'a SuiteConfig,
    checks: Vec<SuiteCheck>,
    convergence: Vec<SuiteConvergence>,
}

impl Recorder<'_> {
    fn tol(&self, name: &str) -> f64 {
        self.config.tolerances.get(name).copied().unwrap_or_else(|| default_tolerance(name))
    }

    fn push(&mut self, name: &str, residual: Option<f64>, pass: bool, status: String, grid: Option<GridSpec>, note: Option<String>) {
        let tolerance = self.tol(name);
        self.checks.push(SuiteCheck {
            name: name.to_string(),
            residual,
            tolerance,
            pass,
            status,
            grid,
            seed: self.config.seed,
            note,
        });
    }

    /// Records a measured residual, or the error that prevented measuring it.
    fn measure(&mut self, name: &str, grid: Option<GridSpec>, value: Result<f64>) -> bool {
        match value {
            Ok(r) => {
                let r_ok = r.is_finite();
                let pass = r_ok && r <= self.tol(name);
                let status = if pass { "pass" } else { "fail" };
                self.push(name, Some(if r_ok { r } else { f64::MAX }), pass, status.into(), grid, None);
                pass
            }
            Err(e) => {
                self.push(name, None, false, "error".into(), grid, Some(e.to_string()));
                false
            }
        }
    }

    fn skip(&mut self, name: &str, why: &str, counts_as_pass: bool) {
        let status = if counts_as_pass { format!("skipped: {why}") } else { SKIPPED_PRECONDITION.to_string() };
        let note = (!counts_as_pass).then(|| why.to_string());
        self.push(name, None, counts_as_pass, status, None, note);
    }

    fn study(&mut self, name: &str, result: Result<ConvergenceStudy>) {
        let [lo, hi] = self.config.order_range;
        match result {
            Ok(s) => {
                let pass = s.passes(lo, hi);
                self.convergence.push(SuiteConvergence {
                    name: name.to_string(),
                    h_values: s.h_values,
                    residuals: s.residuals,
                    observed_order: s.observed_order,
                    status: s.status,
                    pass,
                });
            }
            Err(e) => self.push(name, None, false, "error".into(), None, Some(e.to_string())),
        }
    }
}

/// Names of every check the suite can emit, in execution order.
pub const CHECK_NAMES: [&str; 20] = [
    "params",
    "lyapunov",
    "commutation",
    "lyapunov_frame",
    "mixed_partials",
    "path_independence",
    "evolve_b_oracle",
    "hybrid_x",
    "backlund",
    "ds_dx",
    "ds_dt",
    "junitarity",
    "identity_at_infinity",
    "i_resolvent",
    "ii_derivative",
    "iii_output",
    "gamma_star_evolution",
    "cansys_structure",
    "cansys_relation",
    "cansys_residual",
];

/// Runs every applicable check on `(params, real)`.
///
/// A failing parameter or realization check (e.g. a corrupted `X0`) marks all
/// later checks as skipped. Per-check errors become failing entries with the
/// error text as note.
pub fn run_suite(params: &VesselParams, real: &Realization, config: &SuiteConfig) -> Result<SuiteReport> {
    let mut rec = Recorder {
        config,
        checks: Vec::new(),
        convergence: Vec::new(),
    };
    let preset = params.preset();

    let param_report = params.validate()?;
    let params_ok = param_report.all_pass();
    rec.push(
        "params",
        Some(param_report.max_residual()),
        params_ok,
        if params_ok { "pass" } else { "fail" }.into(),
        None,
        (!params_ok).then(|| param_report.failures().join(", ")),
    );
    let real_report = if params_ok { Some(real.validate(params)?) } else { None };
    let lyap_ok = match &real_report {
        Some(r) => {
            let e = r.get("lyapunov").expect("lyapunov entry");
            let ok = r.all_pass();
            rec.push(
                "lyapunov",
                Some(e.residual),
                ok,
                if ok { "pass" } else { "fail" }.into(),
                None,
                (!ok).then(|| r.failures().join(", ")),
            );
            ok
        }
        None => {
            rec.skip("lyapunov", "invalid vessel parameters", false);
            false
        }
    };

    let mut meta = RealizationMeta {
        preset: preset.map(|p| p.name().to_string()),
        n: real.n,
        p: params.p,
        flow_order: config.flow_order,
        spectrum: spectrum(&real.a).iter().map(|z| [z.re, z.im]).collect(),
        resonant_pairs: real.resonance_flags.len(),
        cond_x_max: None,
    };

    let vessel = if lyap_ok { Vessel::new(params.clone(), real.clone(), config.flow_order).ok() } else { None };
    let Some(v) = vessel else {
        let why = if lyap_ok { "generators could not be built" } else { "realization failed validation" };
        for name in CHECK_NAMES.iter().skip(2) {
            rec.skip(name, why, false);
        }
        return Ok(finish(meta, rec));
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rec.measure("commutation", None, Ok(v.gens.commutator_defect()));
    let frame_grid = config.frame_grid;
    let frame = sample_frame(&v, &frame_grid);
    rec.measure(
        "lyapunov_frame",
        Some(frame_grid),
        frame.as_ref().map(|f| f.diagnostic_max("lyap_res")).map_err(Clone::clone),
    );

    let points = sample_points(&mut rng, &config.identity_grid, config.points.max(1));
    meta.cond_x_max = points
        .iter()
        .filter_map(|&(x, t)| state_at(&v, x, t).ok().map(|s| s.cond_x))
        .reduce(f64::max);
    rec.measure("mixed_partials", Some(config.identity_grid), max_over(&points, |&(x, t)| mixed_partial_defect(&v, x, t)));
    rec.measure(
        "path_independence",
        Some(config.identity_grid),
        max_over(&points, |&(x, t)| {
            let a = evolve_x(params, &v.gens, real, x, t, XMethod::Integrate, XPath::XThenT)?;
            let b = evolve_x(params, &v.gens, real, x, t, XMethod::Integrate, XPath::TThenX)?;
            Ok(fro(&(&a.x - &b.x)) / fro(&a.x).max(f64::MIN_POSITIVE))
        }),
    );
    rec.measure(
        "evolve_b_oracle",
        Some(config.identity_grid),
        max_over(&points[..points.len().min(3)], |&(x, t)| evolve_b_defect(&v, x, t)),
    );
    if real.resonance_flags.is_empty() {
        rec.measure(
            "hybrid_x",
            Some(config.identity_grid),
            max_over(&points, |&(x, t)| {
                let e = evolve_x(params, &v.gens, real, x, t, XMethod::Hybrid, XPath::XThenT)?;
                Ok(e.correction.unwrap_or(0.0))
            }),
        );
    } else {
        rec.skip("hybrid_x", "resonant realization", true);
    }

    scattering_checks(&mut rec, &v, &mut rng, &points);

    let order_one = config.flow_order == 1;
    if order_one && matches!(preset, Some(Preset::SL) | Some(Preset::NLS)) {
        let g = config.identity_grid;
        rec.measure("gamma_star_evolution", Some(g), gamma_star_evolution_residual(&v, &g).map(|r| r.max_residual()));
    } else {
        rec.skip("gamma_star_evolution", "stated for the order-1 SL and NLS flows", true);
    }

    if preset == Some(Preset::CanSys) {
        cansys_checks(&mut rec, &v, frame.as_ref().ok());
    } else {
        rec.skip("cansys_structure", "not a canonical system", true);
        rec.skip("cansys_relation", "not a canonical system", true);
        rec.skip("cansys_residual", "not a canonical system", true);
    }

    if config.convergence && order_one {
        convergence_checks(&mut rec, &v, preset);
    }
    Ok(finish(meta, rec))
}

fn finish(realization: RealizationMeta, rec: Recorder<'_>) -> SuiteReport {
    let pass = rec.checks.iter().all(|c| c.pass) && rec.convergence.iter().all(|c| c.pass);
    SuiteReport {
        realization,
        checks: rec.checks,
        convergence: rec.convergence,
        pass,
    }
}

fn sample_points(rng: &mut ChaCha8Rng, g: &GridSpec, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| (rng.random_range(g.x_min..=g.x_max), rng.random_range(g.t_min..=g.t_max)))
        .collect()
}

/// Maximum of `f` over `items`; singular points are skipped, other errors propagate.
fn max_over<T, F>(items: &[T], mut f: F) -> Result<f64>
where
    F: FnMut(&T) -> Result<f64>,
{
    let mut worst: f64 = 0.0;
    for it in items {
        match f(it) {
            Ok(r) => worst = worst.max(if r.is_finite() { r } else { f64::MAX }),
            Err(VesselError::SingularPoint { .. }) | Err(VesselError::NearPole { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

/// `∂t K` from the t-jet of `B`, against `X_t` applied to `(∂x K, ∂x G)` and against `∂x∂t X`.
fn mixed_partial_defect(v: &Vessel, x: f64, t: f64) -> Result<f64> {
    let st = state_at(v, x, t)?;
    let jet = v.jet(&st, 1, 1)?;
    let (s2, gm) = (&v.params.sigma2, &v.params.gamma);
    let b = &jet.b;
    let (b0, bx, bt) = (b.value(), b.get(1, 0), b.get(0, 1));
    let kx = bx * s2 * b0.adjoint() + b0 * s2 * bx.adjoint();
    let gx = bx * gm * b0.adjoint() + b0 * gm * bx.adjoint();
    let xt_x = v.gens.xt_from_kg(&kx, &gx);
    let kt = bt * s2 * b0.adjoint() + b0 * s2 * bt.adjoint();
    let scale = (fro(&kt) + fro(&xt_x)).max(f64::MIN_POSITIVE);
    Ok((fro(&(&kt - &xt_x)) / scale).max(fro(&(jet.x.get(1, 1) - &kt)) / scale))
}

fn evolve_b_defect(v: &Vessel, x: f64, t: f64) -> Result<f64> {
    let g = build_generators(&v.params, &v.real.a, v.gens.order)?;
    let (n, p) = (v.real.n, v.params.p);
    if n == 0 || fro(&v.real.b0) == 0.0 {
        return Ok(0.0);
    }
    let exact = evolve_b(&g, &v.real.b0, x, t)?;
    let opts = OdeOptions::default();
    let fx = |_: f64, y: &CVec| linalg::vec_cols(&g.dx(&linalg::unvec(y, n, p)));
    let ft = |_: f64, y: &CVec| linalg::vec_cols(&g.dt(&linalg::unvec(y, n, p)));
    let mid = dopri5(fx, 0.0, &linalg::vec_cols(&v.real.b0), x, opts)?.y;
    let end = dopri5(ft, 0.0, &mid, t, opts)?.y;
    Ok(fro(&(linalg::unvec(&end, n, p) - &exact)) / fro(&exact).max(f64::MIN_POSITIVE))
}

fn random_lambda(rng: &mut ChaCha8Rng, spec: &[C64], right_half: bool) -> C64 {
    loop {
        let r: f64 = rng.random_range(0.3..3.0);
        let lam = c(if right_half { r } else { -r }, rng.random_range(-3.0..3.0));
        if spec.iter().all(|z| (z - lam).norm() > 0.05 && (z + lam.conj()).norm() > 0.05) {
            return lam;
        }
    }
}

fn random_u0(rng: &mut ChaCha8Rng, p: usize) -> CVec {
    CVec::from_fn(p, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn scattering_checks(rec: &mut Recorder<'_>, v: &Vessel, rng: &mut ChaCha8Rng, points: &[(f64, f64)]) {
    let cfg = rec.config;
    let g = cfg.identity_grid;
    let spec = spectrum(&v.real.a);
    let p = v.params.p;
    let lambdas: Vec<C64> = (0..cfg.lambdas.max(2)).map(|k| random_lambda(rng, &spec, k % 2 == 0)).collect();
    let xs = g.xs();

    let backlund = (|| {
        let mut worst: f64 = 0.0;
        for &lam in &lambdas {
            let u0 = random_u0(rng, p);
            let t = rng.random_range(g.t_min..=g.t_max);
            worst = worst.max(backlund_check(v, lam, &u0, &xs, t)?.max_residual());
        }
        Ok(worst)
    })();
    rec.measure("backlund", Some(g), backlund);

    let triples: Vec<(C64, f64, f64)> = points
        .iter()
        .enumerate()
        .map(|(k, &(x, t))| (random_lambda(rng, &spec, k % 2 == 0), x, t))
        .collect();
    rec.measure("ds_dx", Some(g), max_over(&triples, |&(l, x, t)| Ok(ds_dx_check(v, l, x, t)?.max_residual())));
    if v.gens.order == 1 {
        rec.measure("ds_dt", Some(g), max_over(&triples, |&(l, x, t)| Ok(ds_dt_check(v, l, x, t)?.max_residual())));
    } else {
        rec.skip("ds_dt", "stated for the order-1 flow", true);
    }
    rec.measure(
        "junitarity",
        Some(g),
        max_over(&triples, |&(l, x, t)| Ok(junitarity_check(v, l, x, t)?.max_residual())),
    );
    let infinity = (|| {
        let mut spread: f64 = 0.0;
        for dir in [c(1.0, 1.0), c(-1.0, 0.5), c(0.2, -1.0)] {
            let vals = identity_at_infinity(v, dir, &[1e3, 1e4, 1e5], 0.0, 0.0)?;
            if vals.iter().all(|&r| r == 0.0) {
                continue;
            }
            for w in vals.windows(2) {
                spread = spread.max((w[1] / w[0] - 1.0).abs());
            }
        }
        Ok(spread)
    })();
    rec.measure("identity_at_infinity", None, infinity);

    let mut sys = [Ok(0.0f64), Ok(0.0), Ok(0.0)];
    for &(l, x, t) in &triples {
        let u0 = random_u0(rng, p);
        match system_check(v, l, &u0, x, t) {
            Ok(r) => {
                for (slot, name) in sys.iter_mut().zip(["i_resolvent", "ii_derivative", "iii_output"]) {
                    if let Ok(w) = slot {
                        *w = w.max(r.residual(name));
                    }
                }
            }
            Err(VesselError::SingularPoint { .. }) | Err(VesselError::NearPole { .. }) => {}
            Err(e) => {
                sys = [Err(e.clone()), Err(e.clone()), Err(e)];
                break;
            }
        }
    }
    for (res, name) in sys.into_iter().zip(["i_resolvent", "ii_derivative", "iii_output"]) {
        rec.measure(name, Some(g), res);
    }
}

fn cansys_checks(rec: &mut Recorder<'_>, v: &Vessel, frame: Option<&FieldFrame>) {
    let structure = frame.map(|f| f.diagnostic_max("structure"));
    let ok = rec.measure(
        "cansys_structure",
        rec.config.frame_grid.into(),
        structure.ok_or(VesselError::EmptyFrame),
    );
    if ok && v.real.is_zero_input() {
        rec.skip("cansys_relation", "zero input", true);
        rec.skip("cansys_residual", "zero input", true);
        return;
    }
    if !ok {
        rec.skip("cansys_relation", "gamma* lacks canonical-system structure", false);
        rec.skip("cansys_residual", "gamma* lacks canonical-system structure", false);
        return;
    }
    let [x0, x1, t0, t1] = rec.config.pde_window;
    let h = rec.config.h_values.iter().copied().fold(f64::INFINITY, f64::min);
    let grid = GridSpec::with_step(x0, x1, t0, t1, h);
    let res = (|| {
        let f = sample_frame(v, &grid)?;
        let k = fit_k_frame(&f, 0.5 * (x0 + x1))?;
        let beta = f.field("beta")?.mapv(|z| z.re);
        let hf = f.field("h")?.mapv(|z| z.re);
        cansys_residual(&beta, &hf, &f.mask, &f.x_grid, &k, grid.hx(), grid.ht())
    })();
    match res {
        Ok(r) => {
            rec.measure("cansys_relation", Some(grid), Ok(r.relation_max));
            rec.measure("cansys_residual", Some(grid), Ok(r.field.max));
            if r.positivity_masked > 0 {
                if let Some(c) = rec.checks.last_mut() {
                    c.note = Some(format!("{} nodes masked where 1/(x+K)^2 - 4 beta^2 <= 0", r.positivity_masked));
                }
            }
        }
        Err(e) => {
            rec.measure("cansys_relation", Some(grid), Err(e.clone()));
            rec.measure("cansys_residual", Some(grid), Err(e));
        }
    }
}

fn convergence_checks(rec: &mut Recorder<'_>, v: &Vessel, preset: Option<Preset>) {
    let [x0, x1, t0, t1] = rec.config.pde_window;
    let hs = rec.config.h_values.clone();
    let frame_at = |h: f64| sample_frame(v, &GridSpec::with_step(x0, x1, t0, t1, h));
    let spacing = |f: &FieldFrame| (f.grid.hx(), f.grid.ht());
    match preset {
        Some(Preset::SL) => {
            let s = convergence_study(
                "kdv",
                |h| {
                    let f = frame_at(h)?;
                    let (hx, ht) = spacing(&f);
                    Ok(kdv_residual(f.field("q")?, &f.mask, hx, ht)?.max)
                },
                &hs,
            );
            rec.study("kdv", s);
            let conv = HierarchyConvention::default();
            let s = convergence_study(
                "hierarchy_n0",
                |h| {
                    let g = GridSpec::with_step(x0, x1, t0, t1, h);
                    Ok(hierarchy_residual(&v.params, &v.real, 0, &g, conv, 1.0)?.field.max)
                },
                &hs,
            );
            rec.study("hierarchy_n0", s);
        }
        Some(Preset::NLS) => {
            for (name, entry, orient) in [
                ("nls_gs21_reversed", "gs21", TimeOrientation::Reversed),
                ("nls_gs12_forward", "gs12", TimeOrientation::Forward),
            ] {
                let s = convergence_study(
                    name,
                    |h| {
                        let f = frame_at(h)?;
                        let (hx, ht) = spacing(&f);
                        Ok(nls_residual(f.field(entry)?, &f.mask, hx, ht, orient)?.max)
                    },
                    &hs,
                );
                rec.study(name, s);
            }
        }
        _ => {}
    }
}

/// Convenience for callers that only need a [`CheckReport`] view of the checks.
pub fn as_check_report(report: &SuiteReport) -> CheckReport {
    let mut out = CheckReport::new();
    for chk in &report.checks {
        match chk.residual {
            Some(r) => {
                out.record(chk.name.clone(), r, chk.tolerance);
            }
            None => {
                out.record_flag(chk.name.clone(), chk.pass);
            }
        }
        if chk.residual.is_some() && out.get(&chk.name).map(|e| e.pass) != Some(chk.pass) {
            out.record_flag(chk.name.clone(), chk.pass);
        }
        if let Some(n) = &chk.note {
            out.annotate(&chk.name, n.clone());
        }
    }
    out
}

/// A realization with `B0 = 0` and `X0 = I`: every identity holds trivially.
pub fn zero_input_realization(params: &VesselParams, n: usize) -> Result<Realization> {
    let a = CMat::from_fn(n, n, |i, j| if i == j { c(0.0, -(1.0 + i as f64)) } else { c(0.0, 0.0) });
    Realization::new(a, CMat::zeros(n, params.p), linalg::eye(n))
}
