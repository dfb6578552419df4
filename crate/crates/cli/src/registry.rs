//! Bundled models and JSON-described systems.

use std::path::Path;

use hypstab::lopatinski::{dissipative_boundary, BoundaryProblem};
use hypstab::models::maxwell::DEFAULT_FRAME_SPEED;
use hypstab::models::shock::{construct_lax_shock, ShockFamily, ShockProblem, FIELD_DIRECTION};
use hypstab::models::{euler_state, maxwell_system_in_frame, mhd_system_in_frame, BiaxialCrystal, MhdState};
use hypstab::normal_form::two_by_two_problem;
use hypstab::{CMat, Complex64, HyperbolicSystem};
use serde::Deserialize;

use crate::config::ModelParams;
use crate::CliError;

pub const MODEL_NAMES: [&str; 6] = ["mhd", "euler-isentropic", "maxwell-biaxial", "euler-shock", "mhd-shock", "two-by-two"];

pub enum Model {
    /// Half-space problem `(system, M)`.
    Boundary { name: String, problem: BoundaryProblem, state: Option<MhdState> },
    Shock { name: String, shock: ShockProblem, euler: ShockProblem, family: ShockFamily },
}

impl Model {
    pub fn name(&self) -> &str {
        match self {
            Model::Boundary { name, .. } | Model::Shock { name, .. } => name,
        }
    }

    /// System used for root classification and structural checks.
    pub fn system(&self) -> HyperbolicSystem {
        match self {
            Model::Boundary { problem, .. } => problem.system().clone(),
            Model::Shock { shock, .. } => shock.doubled_system(),
        }
    }
}

fn default_mhd() -> MhdState {
    MhdState::new(1.2, [0.1, -0.2, 0.3], [0.6, -0.3, 0.8])
}

fn apply_state(base: MhdState, p: &ModelParams) -> MhdState {
    let mut s = base;
    if let Some(r) = p.rho {
        s.rho = r;
    }
    if let Some(u) = p.u {
        s.u = u;
    }
    if let Some(h) = p.h {
        s.h = h;
    }
    if let Some(e) = p.eos {
        s.eos = e;
    }
    s
}

fn dissipative(sys: HyperbolicSystem) -> Result<BoundaryProblem, CliError> {
    let m = dissipative_boundary(&sys)?;
    Ok(BoundaryProblem::constant(&sys, m)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomModel {
    system: serde_json::Value,
    /// Real boundary matrix rows; a dissipative condition when absent.
    #[serde(default)]
    boundary: Option<Vec<Vec<f64>>>,
}

fn load_custom(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let (sys_value, boundary) = if value.get("system").is_some() {
        let de = serde_json::Deserializer::from_str(&text);
        let mut de = de;
        let c: CustomModel = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| CliError::Config(format!("{}: {}: {}", path.display(), e.path(), e.inner())))?;
        (c.system, c.boundary)
    } else {
        (value, None)
    };
    let sys = HyperbolicSystem::from_value(&sys_value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let problem = match boundary {
        None => dissipative(sys)?,
        Some(rows) => {
            let n = sys.dim();
            if rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Config(format!("{}: boundary rows must have {n} entries", path.display())));
            }
            let m = CMat::from_fn(rows.len(), n, |i, j| Complex64::new(rows[i][j], 0.0));
            BoundaryProblem::constant(&sys, m)?
        }
    };
    Ok(Model::Boundary { name: path.display().to_string(), problem, state: None })
}

fn shock_model(name: &str, p: &ModelParams, field: f64) -> Result<Model, CliError> {
    let up = apply_state(MhdState::new(1.0, [0.0; 3], [0.0; 3]), p);
    let fluid = MhdState { h: [0.0; 3], ..up };
    let family = p.family.unwrap_or(ShockFamily::Right);
    let euler = construct_lax_shock(&fluid, family, p.mach.unwrap_or(2.0))?;
    let shock = if field == 0.0 { euler } else { euler.with_field(family, FIELD_DIRECTION.map(|x| x * field))? };
    shock.validate()?;
    Ok(Model::Shock { name: name.into(), shock, euler, family })
}

/// Resolve a registry name or a JSON path, with parameter overrides.
pub fn resolve(model: &str, p: &ModelParams) -> Result<Model, CliError> {
    match model {
        "mhd" => {
            let st = apply_state(default_mhd(), p);
            st.validate()?;
            let sys = mhd_system_in_frame(&st, p.frame_speed.unwrap_or(0.0), [0.0; 2]);
            Ok(Model::Boundary { name: model.into(), problem: dissipative(sys)?, state: Some(st) })
        }
        "euler-isentropic" => {
            let mut st = apply_state(euler_state(1.0, [0.1, 0.2, 0.3], Default::default()), p);
            st.h = [0.0; 3];
            st.validate()?;
            let sys = mhd_system_in_frame(&st, p.frame_speed.unwrap_or(0.0), [0.0; 2]);
            Ok(Model::Boundary { name: model.into(), problem: dissipative(sys)?, state: Some(st) })
        }
        "maxwell-biaxial" => {
            let crystal = match p.alpha {
                Some(a) => BiaxialCrystal::new(a)?,
                None => BiaxialCrystal::default(),
            };
            let sys = maxwell_system_in_frame(&crystal, p.frame_speed.unwrap_or(DEFAULT_FRAME_SPEED));
            Ok(Model::Boundary { name: model.into(), problem: dissipative(sys)?, state: None })
        }
        "two-by-two" => {
            let problem = two_by_two_problem(p.a.unwrap_or(1.0), p.c.unwrap_or(0.5))?;
            Ok(Model::Boundary { name: model.into(), problem, state: None })
        }
        "euler-shock" => shock_model(model, p, 0.0),
        "mhd-shock" => shock_model(model, p, p.field.unwrap_or(1e-2)),
        other => {
            let path = Path::new(other);
            if path.exists() {
                load_custom(path)
            } else {
                Err(CliError::Config(format!(
                    "model: unknown model '{other}' (expected one of {} or a JSON path)",
                    MODEL_NAMES.join(", ")
                )))
            }
        }
    }
}
