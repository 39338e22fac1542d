//! Sampling of states on a rectangular `(x, t)` grid.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generators::Axis;
use super::state::{beta_nls, cansys_fields, q_from_jet, Vessel};
use super::xflow::LineIntegrator;
use crate::error::{Result, VesselError};
use crate::linalg::{self, CMat, C64};
use crate::params::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -8.0,
            x_max: 8.0,
            nx: 257,
            t_min: -1.0,
            t_max: 1.0,
            nt: 65,
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + h * i as f64 }).collect()
}

impl GridSpec {
    /// Grid with spacing `h` in both directions (bounds rounded to whole steps).
    pub fn with_step(x_min: f64, x_max: f64, t_min: f64, t_max: f64, h: f64) -> Self {
        let nx = ((x_max - x_min) / h).round() as usize + 1;
        let nt = ((t_max - t_min) / h).round() as usize + 1;
        Self {
            x_min,
            x_max,
            nx,
            t_min,
            t_max,
            nt,
        }
    }

    pub fn point(x: f64, t: f64) -> Self {
        Self {
            x_min: x,
            x_max: x,
            nx: 1,
            t_min: t,
            t_max: t,
            nt: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.t_min, self.t_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(VesselError::Range("grid bounds must be finite".into()));
        }
        if self.nx == 0 || self.nt == 0 {
            return Err(VesselError::Range("grid needs at least one node per axis".into()));
        }
        if (self.nx > 1 && self.x_max <= self.x_min) || (self.nt > 1 && self.t_max <= self.t_min) {
            return Err(VesselError::Range("grid bounds must be increasing".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ts(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.nt)
    }

    pub fn hx(&self) -> f64 {
        if self.nx > 1 {
            (self.x_max - self.x_min) / (self.nx - 1) as f64
        } else {
            0.0
        }
    }

    pub fn ht(&self) -> f64 {
        if self.nt > 1 {
            (self.t_max - self.t_min) / (self.nt - 1) as f64
        } else {
            0.0
        }
    }
}

/// Fields and diagnostics on a grid; arrays are indexed `[t_index, x_index]`.
#[derive(Debug, Clone)]
pub struct FieldFrame {
    pub grid: GridSpec,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub fields: BTreeMap<String, Array2<C64>>,
    pub diagnostics: BTreeMap<String, Array2<f64>>,
    /// `true` where the node was excluded by a guard.
    pub mask: Array2<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSummary {
    pub grid: GridSpec,
    pub nodes: usize,
    pub masked_nodes: usize,
    pub lyapunov_max: f64,
    pub cond_x_max: f64,
    pub fields: Vec<String>,
}

struct NodeValues {
    fields: Vec<(String, C64)>,
    diagnostics: Vec<(String, f64)>,
}

fn node_values(v: &Vessel, preset: Option<Preset>, x: f64, t: f64, b: CMat, xm: CMat) -> Result<NodeValues> {
    let s = v.state_from(x, t, b, xm)?;
    let mut fields = vec![("tau".to_string(), s.tau)];
    let p = v.params.p;
    for i in 0..p {
        for j in 0..p {
            fields.push((format!("gs{}{}", i + 1, j + 1), s.gamma_star[(i, j)]));
        }
    }
    let mut diagnostics = vec![("cond_x".to_string(), s.cond_x)];
    match preset {
        Some(Preset::SL) => {
            let jet = v.jet(&s, 1, 0)?;
            let q = q_from_jet(&v.params, &jet);
            fields.push(("q".into(), q));
            diagnostics.push(("q_imag".into(), q.im.abs()));
        }
        Some(Preset::NLS) => fields.push(("beta".into(), beta_nls(&s))),
        Some(Preset::CanSys) => {
            // Structure violations are kept as diagnostics rather than masking.
            let gs = &s.gamma_star;
            let beta = linalg::I * gs[(0, 0)] / 2.0;
            let h = -linalg::I * gs[(0, 1)];
            fields.push(("beta".into(), beta));
            fields.push(("h".into(), h));
            let structure = match cansys_fields(&s) {
                Ok(f) => f.structure.max_residual(),
                Err(_) => beta.im.abs().max(h.im.abs()),
            };
            diagnostics.push(("structure".into(), structure));
        }
        None => {}
    }
    diagnostics.push(("lyap_res".into(), s.lyap_res));
    Ok(NodeValues { fields, diagnostics })
}

/// Evaluates every grid node; τ-guard rejections are masked, other errors abort.
///
/// `X` is marched along `t = 0` first, then along each `x = const` line in parallel.
pub fn sample_frame(v: &Vessel, grid: &GridSpec) -> Result<FieldFrame> {
    grid.validate()?;
    let xs = grid.xs();
    let ts = grid.ts();
    let g = &v.gens;
    let preset = v.params.preset();
    let mut line = LineIntegrator::new(g, Axis::X);
    let x_axis = line.march(&v.real.b0, &v.real.x0, 0.0, &xs)?;
    let t_props: Vec<CMat> = ts
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(linalg::eye(g.n * g.p))
            } else {
                linalg::expm(&(&g.nt * C64::new(t, 0.0)))
            }
        })
        .collect::<Result<_>>()?;

    let columns: Vec<Vec<Option<NodeValues>>> = xs
        .par_iter()
        .zip(x_axis.par_iter())
        .map(|(&x, x_line)| -> Result<Vec<Option<NodeValues>>> {
            let b_x = v.b_at(x, 0.0)?;
            let mut tl = LineIntegrator::new(g, Axis::T);
            let x_vals = tl.march(&b_x, x_line, 0.0, &ts)?;
            let vb = linalg::vec_cols(&b_x);
            ts.iter()
                .zip(x_vals)
                .zip(&t_props)
                .map(|((&t, xm), e)| {
                    let b = linalg::unvec(&(e * &vb), g.n, g.p);
                    match node_values(v, preset, x, t, b, linalg::hermitian_part(&xm)) {
                        Ok(n) => Ok(Some(n)),
                        Err(VesselError::SingularPoint { .. }) | Err(VesselError::Singular(_)) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let shape = (ts.len(), xs.len());
    let mut fields: BTreeMap<String, Array2<C64>> = BTreeMap::new();
    let mut diagnostics: BTreeMap<String, Array2<f64>> = BTreeMap::new();
    let mut mask = Array2::from_elem(shape, true);
    for (i, col) in columns.iter().enumerate() {
        for (j, node) in col.iter().enumerate() {
            let Some(node) = node else { continue };
            mask[(j, i)] = false;
            for (name, val) in &node.fields {
                fields.entry(name.clone()).or_insert_with(|| Array2::zeros(shape))[(j, i)] = *val;
            }
            for (name, val) in &node.diagnostics {
                diagnostics.entry(name.clone()).or_insert_with(|| Array2::zeros(shape))[(j, i)] = *val;
            }
        }
    }
    if mask.iter().all(|&m| m) {
        return Err(VesselError::EmptyFrame);
    }
    Ok(FieldFrame {
        grid: *grid,
        x_grid: xs,
        t_grid: ts,
        fields,
        diagnostics,
        mask,
    })
}

impl FieldFrame {
    pub fn field(&self, name: &str) -> Result<&Array2<C64>> {
        self.fields
            .get(name)
            .ok_or_else(|| VesselError::Range(format!("frame has no field `{name}`")))
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn diagnostic_max(&self, name: &str) -> f64 {
        self.diagnostics
            .get(name)
            .map_or(0.0, |d| d.iter().copied().fold(0.0, f64::max))
    }

    pub fn summary(&self) -> FrameSummary {
        FrameSummary {
            grid: self.grid,
            nodes: self.mask.len(),
            masked_nodes: self.masked_count(),
            lyapunov_max: self.diagnostic_max("lyap_res"),
            cond_x_max: self.diagnostic_max("cond_x"),
            fields: self.fields.keys().cloned().collect(),
        }
    }

    /// Diagnostics in CSV column order, `lyap_res` last.
    fn diagnostic_names(&self) -> Vec<&String> {
        let mut names: Vec<&String> = self.diagnostics.keys().filter(|k| *k != "lyap_res").collect();
        if let Some((k, _)) = self.diagnostics.get_key_value("lyap_res") {
            names.push(k);
        }
        names
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x".to_string(), "t".to_string()];
        for name in self.fields.keys() {
            header.push(format!("{name}_re"));
            header.push(format!("{name}_im"));
        }
        let diag = self.diagnostic_names();
        header.extend(diag.iter().map(|s| s.to_string()));
        header.push("mask".into());
        w.write_record(&header)?;
        for (j, t) in self.t_grid.iter().enumerate() {
            for (i, x) in self.x_grid.iter().enumerate() {
                let mut row = vec![x.to_string(), t.to_string()];
                for f in self.fields.values() {
                    row.push(f[(j, i)].re.to_string());
                    row.push(f[(j, i)].im.to_string());
                }
                for d in &diag {
                    row.push(self.diagnostics[*d][(j, i)].to_string());
                }
                row.push(if self.mask[(j, i)] { "1" } else { "0" }.into());
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
