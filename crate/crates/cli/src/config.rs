//! Run configuration: a versioned JSON document plus `key=value` overrides.

use std::path::{Path, PathBuf};

use cmc_scri::charts::Mass;
use cmc_scri::cut::Cut;
use cmc_scri::foliation::Foliation;
use cmc_scri::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CutSpec {
    Zero,
    CosTheta {
        amplitude: f64,
    },
    Legendre2 {
        amplitude: f64,
    },
    /// Two-column `theta,value` CSV; relative paths resolve against the
    /// config file's directory.
    Tabulated {
        path: PathBuf,
        #[serde(default = "default_modes")]
        max_modes: usize,
    },
}

fn default_modes() -> usize {
    8
}

impl Default for CutSpec {
    fn default() -> Self {
        CutSpec::Zero
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoliationCheckConfig {
    pub n_theta: usize,
    pub n_s: usize,
    /// Leaves checked, as multiples of `H₀⁻¹`.
    pub tau_factors: Vec<f64>,
    pub thetas: Vec<f64>,
    pub s_levels: Vec<f64>,
    pub min_slope: f64,
}

impl Default for FoliationCheckConfig {
    fn default() -> Self {
        Self {
            n_theta: 32,
            n_s: 64,
            tau_factors: vec![0.6, 1.0, 1.8],
            thetas: vec![0.3, 1.2, 2.5],
            s_levels: vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2],
            min_slope: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default)]
    pub cut: CutSpec,
    #[serde(default = "one")]
    pub h0: f64,
    /// Forces the outer end of the foliated slab instead of searching for it.
    #[serde(default)]
    pub s0: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub foliation_check: FoliationCheckConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Directory the config was read from; not serialised.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one() -> f64 {
    1.0
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({ "schema_version": SCHEMA_VERSION }))
            .expect("default config deserialises")
    }
}

/// Set `root.a.b.c = value` for `path = "a.b.c"`, creating objects on the way.
pub fn apply_override(root: &mut Value, assignment: &str) -> CliResult<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("bad override key `{path}`")));
    }
    // numbers, booleans, null, arrays and objects parse as JSON; anything else is a string
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    for k in &keys[..keys.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override `{path}`: `{k}` is not inside an object")))?;
        cur = obj
            .entry(k.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override `{path}` does not address an object field")))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Reads `path` (or starts from the defaults), applies overrides, then
    /// deserialises and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let (mut value, base_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                let v: Value =
                    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (v, dir)
            }
            None => (serde_json::json!({ "schema_version": SCHEMA_VERSION }), PathBuf::new()),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg: RunConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.base_dir = base_dir;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let m = self.mass()?;
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(CliError::Config(format!("h0 must be positive, got {}", self.h0)));
        }
        if let Some(s0) = self.s0 {
            if !(s0 > 0.0 && s0 < m.s_horizon()) {
                return Err(CliError::Config(format!(
                    "s0 = {s0} outside (0, 1/(2m)) = (0, {})",
                    m.s_horizon()
                )));
            }
        }
        match &self.cut {
            CutSpec::CosTheta { amplitude } | CutSpec::Legendre2 { amplitude } if !amplitude.is_finite() => {
                return Err(CliError::Config("cut amplitude must be finite".into()));
            }
            CutSpec::Tabulated { max_modes: 0, .. } => {
                return Err(CliError::Config("tabulated cut needs max_modes ≥ 1".into()));
            }
            _ => {}
        }
        self.solver.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let fc = &self.foliation_check;
        if fc.n_theta < 3 || fc.n_s < 2 || fc.tau_factors.is_empty() || fc.thetas.is_empty() || fc.s_levels.len() < 2 {
            return Err(CliError::Config("foliation_check grids are too small".into()));
        }
        Ok(())
    }

    pub fn mass(&self) -> CliResult<Mass> {
        Mass::new(self.mass).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn cut(&self) -> CliResult<Cut> {
        Ok(match &self.cut {
            CutSpec::Zero => Cut::Zero,
            CutSpec::CosTheta { amplitude } => Cut::CosTheta { amplitude: *amplitude },
            CutSpec::Legendre2 { amplitude } => Cut::Legendre2 { amplitude: *amplitude },
            CutSpec::Tabulated { path, max_modes } => {
                let full = self.base_dir.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
                Cut::from_csv(&text, *max_modes).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?
            }
        })
    }

    /// Foliation with the default `s₀ = 1/(4m)`, or the forced one.
    pub fn foliation(&self) -> CliResult<Foliation> {
        let fol = Foliation::new(self.mass()?, &self.cut()?, self.h0).map_err(|e| CliError::Config(e.to_string()))?;
        match self.s0 {
            Some(s0) => fol.with_s0(s0).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(fol),
        }
    }
}
