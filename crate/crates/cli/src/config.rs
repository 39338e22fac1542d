//! The JSON run configuration shared by `synthesize` and `verify`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vessel::evolution::GridSpec;
use vessel::serial::{self, JsonComplex, JsonMatrix};
use vessel::verify::SuiteConfig;
use vessel::{
    random_realization, random_soliton_realization, realization_from_discrete_spectrum, Preset, Realization,
    RealizationDocument, VesselParams,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineParams {
    pub sigma1: JsonMatrix,
    pub sigma2: JsonMatrix,
    pub gamma: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSource {
    pub n: usize,
    pub seed: u64,
    /// Replace the input by `B0 = 0` (with `X0 = I` and a skew-Hermitian `A`).
    #[serde(default)]
    pub zero_input: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonSource {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSpectrumSource {
    pub k: Vec<f64>,
    pub rows: Vec<Vec<JsonComplex>>,
    pub diag: Vec<f64>,
}

/// Exactly one field must be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_solitons: Option<SolitonSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrete_spectrum: Option<DiscreteSpectrumSource>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<InlineParams>,
    pub source: SourceSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "one")]
    pub flow_order: usize,
    /// Seed of the verification suite's random draws.
    #[serde(default)]
    pub seed: u64,
    /// Suite settings; `seed`, `tolerances` and `flow_order` above take precedence.
    #[serde(default)]
    pub suite: SuiteConfig,
}

fn one() -> usize {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: Some("SL".into()),
            params: None,
            source: SourceSpec {
                random_solitons: Some(SolitonSource { n: 3, seed: 0 }),
                ..SourceSpec::default()
            },
            grid: GridSpec::default(),
            outputs: Outputs::default(),
            tolerances: BTreeMap::new(),
            flow_order: 1,
            seed: 0,
            suite: SuiteConfig::default(),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    /// Reads and structurally validates a config; relative `source.file` paths
    /// resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
        if let (Some(f), Some(dir)) = (cfg.source.file.as_mut(), path.parent()) {
            if f.is_relative() {
                *f = dir.join(&*f);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.source;
        let count = [s.file.is_some(), s.random.is_some(), s.random_solitons.is_some(), s.discrete_spectrum.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if count != 1 {
            return Err(usage(format!(
                "source must set exactly one of file, random, random_solitons, discrete_spectrum (found {count})"
            )));
        }
        match (s.file.is_some(), self.preset.is_some(), self.params.is_some()) {
            (true, false, false) | (false, true, false) | (false, false, true) => {}
            (true, _, _) => return Err(usage("a file source carries its own parameters; remove preset/params")),
            (false, true, true) => return Err(usage("set either preset or params, not both")),
            (false, false, false) => return Err(usage("set preset or params")),
        }
        if let Some(p) = &self.preset {
            p.parse::<Preset>().map_err(|e| usage(e.to_string()))?;
        }
        let g = &self.grid;
        g.validate().map_err(|e| usage(format!("grid: {e}")))?;
        if g.nx < 2 || g.nt < 2 {
            return Err(usage("grid: nx and nt must be at least 2"));
        }
        if self.flow_order == 0 {
            return Err(usage("flow_order must be at least 1"));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !v.is_finite()) {
            return Err(usage(format!("tolerance {k} = {v} is not finite")));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Option<VesselParams>, CliError> {
        if let Some(p) = &self.preset {
            return Ok(Some(p.parse::<Preset>().map_err(|e| usage(e.to_string()))?.params()));
        }
        if let Some(ip) = &self.params {
            let m = |v: &JsonMatrix, name: &str| serial::matrix_from_json(v).map_err(|e| usage(format!("params.{name}: {e}")));
            let p = VesselParams::new(m(&ip.sigma1, "sigma1")?, m(&ip.sigma2, "sigma2")?, m(&ip.gamma, "gamma")?)
                .map_err(|e| usage(format!("params: {e}")))?;
            return Ok(Some(p));
        }
        Ok(None)
    }

    /// Builds the parameters and realization. A file is decoded but not
    /// validated, so a corrupted realization reaches the suite.
    pub fn build(&self) -> Result<(VesselParams, Realization), CliError> {
        let s = &self.source;
        if let Some(path) = &s.file {
            let doc = RealizationDocument::read(path).map_err(|e| usage(format!("realization file {}: {e}", path.display())))?;
            return doc.into_parts().map_err(|e| usage(format!("realization file {}: {e}", path.display())));
        }
        let params = self.params()?.expect("validated");
        let numeric = |check: &'static str| move |e: vessel::VesselError| CliError::Numeric {
            check: check.to_string(),
            message: e.to_string(),
        };
        let real = if let Some(r) = &s.random {
            if r.n == 0 {
                return Err(usage("source.random.n must be at least 1"));
            }
            if r.zero_input {
                vessel::verify::suite::zero_input_realization(&params, r.n).map_err(numeric("realization"))?
            } else {
                random_realization(r.n, &params, r.seed).map_err(numeric("realization"))?
            }
        } else if let Some(r) = &s.random_solitons {
            if r.n == 0 {
                return Err(usage("source.random_solitons.n must be at least 1"));
            }
            random_soliton_realization(r.n, &params, r.seed).map_err(numeric("realization"))?
        } else {
            let d = s.discrete_spectrum.as_ref().expect("validated");
            let rows: Vec<Vec<_>> = d.rows.iter().map(|r| r.iter().map(|&z| serial::complex_from_json(z)).collect()).collect();
            realization_from_discrete_spectrum(&params, &d.k, &rows, &d.diag).map_err(numeric("realization"))?
        };
        Ok((params, real))
    }

    pub fn suite_config(&self) -> SuiteConfig {
        let mut s = self.suite.clone();
        s.seed = self.seed;
        s.flow_order = self.flow_order;
        s.tolerances.extend(self.tolerances.iter().map(|(k, v)| (k.clone(), *v)));
        s
    }
}
