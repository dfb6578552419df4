//! Job configuration: JSON schema, flag overrides and validation.

use std::path::PathBuf;

use hypstab::models::shock::ShockFamily;
use hypstab::models::{MhdState, PressureLaw};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Classify,
    Scan,
    Shock,
    Verify,
    Probe,
    Demo,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Classify => "classify",
            CommandKind::Scan => "scan",
            CommandKind::Shock => "shock",
            CommandKind::Verify => "verify",
            CommandKind::Probe => "probe",
            CommandKind::Demo => "demo",
        }
    }
}

/// Overrides of the registry defaults. Fields a model does not use are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub rho: Option<f64>,
    pub u: Option<[f64; 3]>,
    #[serde(rename = "H", alias = "h")]
    pub h: Option<[f64; 3]>,
    pub eos: Option<PressureLaw>,
    /// Normal speed of the boundary.
    pub frame_speed: Option<f64>,
    /// Inverse permittivities of the crystal.
    pub alpha: Option<[f64; 3]>,
    /// 2x2 normal form parameter and boundary coefficient.
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub mach: Option<f64>,
    pub family: Option<ShockFamily>,
    /// Magnitude of the field along the fixed continuation direction.
    pub field: Option<f64>,
}

/// Root to classify; without `tau` every real root over `xi` is classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    #[serde(rename = "U", alias = "state", default)]
    pub state: Option<MhdState>,
    pub xi: Vec<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

fn default_model() -> String {
    "two-by-two".into()
}
fn default_refine() -> usize {
    3
}
fn default_grid() -> usize {
    500
}
fn default_threshold() -> f64 {
    1e-6
}
fn default_samples() -> usize {
    50
}
fn default_gammas() -> Vec<f64> {
    vec![1e-2, 1e-1, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub command: Option<CommandKind>,
    /// Registry name or path to a JSON system description.
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub seed: u64,
    /// Approximate number of frequency grid points.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub gamma_floor: f64,
    /// Grid minima handed to the local search.
    #[serde(default = "default_refine")]
    pub refine: usize,
    /// `|D|` at or below this value counts as a Lopatinski failure.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub point: Option<PointSpec>,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub compare_euler: bool,
    /// Random samples per `gamma` level (probe) or in total (verify).
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
}

impl Default for JobConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl JobConfig {
    /// Parse a JSON config, reporting schema violations with their field path.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("hypstab-out"))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: &str| Err(CliError::Config(format!("{field}: {msg}")));
        if !(self.threshold > 0.0) {
            return bad("threshold", "must be positive");
        }
        if !(self.gamma_floor >= 0.0) || !(self.gamma_floor < 1.0) {
            return bad("gamma_floor", "must lie in [0, 1)");
        }
        if self.threads == Some(0) {
            return bad("threads", "must be positive");
        }
        if let Some((k, _)) = self.gammas.iter().enumerate().find(|(_, g)| !(**g > 0.0 && **g <= 1.0)) {
            return bad(&format!("gammas[{k}]"), "must lie in (0, 1]");
        }
        if let Some(s) = &self.sweep {
            if !s.parameter.eq_ignore_ascii_case("h") {
                return bad("sweep.parameter", "only H can be swept");
            }
            if let Some((k, _)) = s.values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
                return bad(&format!("sweep.values[{k}]"), "must be positive");
            }
        }
        Ok(())
    }
}

/// `"1e-1..1e-4"` becomes the decades `1e-1, 1e-2, 1e-3, 1e-4`; a comma list
/// is taken as given.
pub fn parse_sweep_values(spec: &str) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| -> Result<f64, CliError> {
        s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad sweep value '{s}'")))
    };
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if !(a > 0.0 && b > 0.0) {
            return Err(CliError::Usage("sweep bounds must be positive".into()));
        }
        let (la, lb) = (a.log10(), b.log10());
        let steps = (la - lb).abs().round() as i32;
        let dir = if lb < la { -1.0 } else { 1.0 };
        Ok((0..=steps).map(|k| 10f64.powf(la + dir * k as f64)).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}
