use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use vessel::evolution::{sample_frame, FrameSummary, Vessel};
use vessel::hierarchy::{hierarchy, render_hierarchy, MAX_RENDER_N};
use vessel::linalg::{CMat, C64};
use vessel::serial::{self, JsonMatrix};
use vessel::verify::{run_suite, SuiteReport};
use vessel::Preset;

use crate::config::RunConfig;
use crate::CliError;

/// Default report path of `verify` when neither config nor flags name one.
pub const DEFAULT_VERIFY_REPORT: &str = "verify_report.json";

pub struct Style {
    color: bool,
}

impl Style {
    /// Color only on a terminal and only when `NO_COLOR` is unset or empty.
    pub fn detect() -> Self {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Self {
            color: !no_color && std::io::stdout().is_terminal(),
        }
    }

    pub fn plain() -> Self {
        Self { color: false }
    }

    fn verdict(&self, pass: bool) -> String {
        let (word, code) = if pass { ("PASS", "32") } else { ("FAIL", "31") };
        if self.color {
            format!("\x1b[{code}m{word}\x1b[0m")
        } else {
            word.to_string()
        }
    }
}

fn fmt_real(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn fmt_complex(z: C64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => fmt_real(z.re),
        (true, false) if z.im == 1.0 => "i".into(),
        (true, false) if z.im == -1.0 => "-i".into(),
        (true, false) => format!("{}i", fmt_real(z.im)),
        (false, false) => {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{}{sign}{}i", fmt_real(z.re), fmt_real(z.im.abs()))
        }
    }
}

pub fn fmt_matrix(m: &CMat) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = (0..m.ncols()).map(|j| fmt_complex(m[(i, j)])).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

#[derive(Serialize)]
struct PresetJson {
    name: &'static str,
    label: &'static str,
    sigma1: JsonMatrix,
    sigma2: JsonMatrix,
    gamma: JsonMatrix,
}

pub fn presets(json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let res = if json {
        let rows: Vec<PresetJson> = Preset::ALL
            .iter()
            .map(|&k| {
                let p = k.params();
                PresetJson {
                    name: k.name(),
                    label: k.label(),
                    sigma1: serial::matrix_to_json(&p.sigma1),
                    sigma2: serial::matrix_to_json(&p.sigma2),
                    gamma: serial::matrix_to_json(&p.gamma),
                }
            })
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("serializable"))
    } else {
        let mut text = format!("{:<10} {:<22} {:<22} {}\n", "preset", "sigma1", "sigma2", "gamma");
        for k in Preset::ALL {
            let p = k.params();
            text += &format!(
                "{:<10} {:<22} {:<22} {}\n",
                k.label(),
                fmt_matrix(&p.sigma1),
                fmt_matrix(&p.sigma2),
                fmt_matrix(&p.gamma)
            );
        }
        out.write_all(text.as_bytes())
    };
    res.map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

#[derive(Debug, Serialize)]
pub struct SynthesisReport {
    pub preset: Option<String>,
    pub n: usize,
    pub flow_order: usize,
    pub csv: Option<PathBuf>,
    #[serde(flatten)]
    pub frame: FrameSummary,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn synthesize(cfg: &RunConfig, out: &mut dyn Write) -> Result<SynthesisReport, CliError> {
    let (params, real) = cfg.build()?;
    let numeric = |check: &str, e: vessel::VesselError| CliError::Numeric {
        check: check.into(),
        message: e.to_string(),
    };
    let pr = params.validate().map_err(|e| numeric("params", e))?;
    if !pr.all_pass() {
        return Err(numeric("params", vessel::VesselError::Invariant(pr.failures().join(", "))));
    }
    let rr = real.validate(&params).map_err(|e| numeric("lyapunov", e))?;
    if !rr.all_pass() {
        return Err(numeric("lyapunov", vessel::VesselError::Invariant(rr.failures().join(", "))));
    }
    let v = Vessel::new(params.clone(), real, cfg.flow_order).map_err(|e| numeric("generators", e))?;
    let frame = sample_frame(&v, &cfg.grid).map_err(|e| numeric("sample_frame", e))?;
    let summary = frame.summary();
    let tol = cfg.suite_config().tolerances.get("lyapunov_frame").copied().unwrap_or(vessel::verify::suite::default_tolerance("lyapunov_frame"));
    if summary.lyapunov_max.is_nan() || summary.lyapunov_max > tol {
        return Err(CliError::Numeric {
            check: "lyapunov_frame".into(),
            message: format!("max Lyapunov residual {:.3e} exceeds {tol:.1e}", summary.lyapunov_max),
        });
    }
    let mut csv = Vec::new();
    frame.write_csv(&mut csv).map_err(|e| numeric("csv", e))?;
    match &cfg.outputs.csv {
        Some(path) => write_file(path, &csv)?,
        None => out.write_all(&csv).map_err(|e| CliError::Usage(format!("cannot write output: {e}")))?,
    }
    let report = SynthesisReport {
        preset: params.preset().map(|p| p.name().to_string()),
        n: v.n(),
        flow_order: cfg.flow_order,
        csv: cfg.outputs.csv.clone(),
        frame: summary,
    };
    if let Some(path) = &cfg.outputs.report {
        write_file(path, serde_json::to_string_pretty(&report).expect("serializable").as_bytes())?;
    }
    Ok(report)
}

/// Runs the suite, writes the report, prints one line per check.
pub fn verify(cfg: &RunConfig, style: &Style, out: &mut dyn Write) -> Result<SuiteReport, CliError> {
    let (params, real) = cfg.build()?;
    let report = run_suite(&params, &real, &cfg.suite_config()).map_err(|e| CliError::Numeric {
        check: "suite".into(),
        message: e.to_string(),
    })?;
    let path = cfg.outputs.report.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_VERIFY_REPORT));
    let json = report.to_json().map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(&path, json.as_bytes())?;

    let mut text = String::new();
    for c in &report.checks {
        let value = match c.residual {
            Some(r) => format!("{r:.3e} (tol {:.1e})", c.tolerance),
            None => c.status.clone(),
        };
        let note = c.note.as_deref().map(|n| format!("  [{n}]")).unwrap_or_default();
        text += &format!("{} {:<22} {value}{note}\n", style.verdict(c.pass), c.name);
    }
    for s in &report.convergence {
        let rs: Vec<String> = s.residuals.iter().map(|r| format!("{r:.2e}")).collect();
        text += &format!(
            "{} {:<22} order {:.2} residuals [{}]\n",
            style.verdict(s.pass),
            s.name,
            s.observed_order,
            rs.join(", ")
        );
    }
    let failures = report.failures();
    text += &format!(
        "{} checks, {} convergence studies, {} failed; report written to {}\n",
        report.checks.len(),
        report.convergence.len(),
        failures.len(),
        path.display()
    );
    out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("cannot write output: {e}")))?;
    if report.pass {
        Ok(report)
    } else {
        Err(CliError::Verification(failures.into_iter().map(String::from).collect()))
    }
}

pub fn hierarchy_cmd(n: usize, print: bool, out: &mut dyn Write) -> Result<(), CliError> {
    if n > MAX_RENDER_N {
        return Err(CliError::Usage(format!("--n {n} exceeds the term-count guard {MAX_RENDER_N}")));
    }
    let text = if print {
        let lines = render_hierarchy(n).map_err(|e| CliError::Usage(e.to_string()))?;
        lines.join("\n") + "\n"
    } else {
        hierarchy(n)
            .iter()
            .enumerate()
            .map(|(k, b)| format!("b{k}: {} terms\n", b.terms().len()))
            .collect()
    };
    out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}
