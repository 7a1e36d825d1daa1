//! JSON run configuration with a versioned schema. Unknown keys are
//! rejected; every section except the soliton data has defaults.

use serde::{Deserialize, Serialize};

use crate::curvature::ScanGrid;
use crate::error::{invalid, Error, Result};
use crate::profiles::{build_cao_profile, build_taubnut_profile, Family, Gauge, ProfileSet, SolitonParams};

pub const SCHEMA_VERSION: u32 = 1;

const MAX_GRID: usize = 2000;
const MAX_SAMPLES: usize = 100_000;
const MAX_ELL: usize = 8;
const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    pub xi1: usize,
    pub xi2: usize,
    pub xi2_max: f64,
    pub t: usize,
    /// Interior samples for residual checks.
    pub samples: usize,
    /// Points for finite-difference curvature.
    pub curvature_samples: usize,
    pub volume_r_max: f64,
    pub volume_steps: usize,
    /// Largest coordinate along distance rays.
    pub ray_max: f64,
    pub ray_steps: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            xi1: 200,
            xi2: 200,
            xi2_max: 20.0,
            t: 41,
            samples: 100,
            curvature_samples: 50,
            volume_r_max: 1e3,
            volume_steps: 11,
            ray_max: 1e4,
            ray_steps: 13,
        }
    }
}

impl Grids {
    pub fn scan(&self) -> ScanGrid {
        ScanGrid {
            n_xi1: self.xi1,
            n_xi2: self.xi2,
            xi2_max: self.xi2_max,
            n_t: self.t,
        }
    }
}

/// Tolerances of the verification checks; overridable by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ode_residual: f64,
    pub ma_std: f64,
    pub compatibility: f64,
    pub eigenvalue: f64,
    pub boundary: f64,
    pub flat_riemann: f64,
    pub ricci_flat: f64,
    pub scal_closed_form: f64,
    pub soliton_residual: f64,
    pub volume_exponent: f64,
    pub growth_exponent: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_residual: 1e-10,
            ma_std: 1e-6,
            compatibility: 1e-10,
            eigenvalue: 1e-9,
            boundary: 1e-3,
            flat_riemann: 1e-6,
            ricci_flat: 1e-5,
            scal_closed_form: 1e-4,
            soliton_residual: 1e-4,
            volume_exponent: 0.1,
            growth_exponent: 0.05,
        }
    }
}

impl Tolerances {
    /// Applies `KEY=VAL` to the field named `KEY`.
    pub fn apply_override(&mut self, entry: &str) -> Result<()> {
        let (key, val) = entry
            .split_once('=')
            .ok_or_else(|| invalid(format!("override `{entry}` is not KEY=VAL")))?;
        let val: f64 = val
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| invalid(format!("override value `{val}` is not a nonnegative number")))?;
        let mut map = match serde_json::to_value(&*self) {
            Ok(serde_json::Value::Object(m)) => m,
            _ => return Err(invalid("tolerances do not serialise")),
        };
        let slot = map
            .get_mut(key.trim())
            .ok_or_else(|| invalid(format!("unknown tolerance `{}`", key.trim())))?;
        *slot = serde_json::json!(val);
        *self = serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub family: Family,
    /// Dimensions `d_j` of the base factors.
    pub partition: Vec<usize>,
    pub alpha: Vec<f64>,
    pub a: f64,
    #[serde(default = "unit")]
    pub scale: f64,
    #[serde(default)]
    pub gauge: Gauge,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

fn unit() -> f64 {
    1.0
}

impl RunConfig {
    /// Parses and validates a configuration.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn params(&self) -> SolitonParams {
        SolitonParams {
            a: self.a,
            alpha: self.alpha.clone(),
            dims: self.partition.clone(),
            scale: self.scale,
            gauge: self.gauge,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema_version {}", self.schema_version)));
        }
        let l = self.alpha.len();
        if l == 0 || l > MAX_ELL || self.partition.len() != l {
            return Err(invalid("alpha and partition must have the same length between 1 and 8"));
        }
        if l + self.partition.iter().sum::<usize>() > MAX_DIM {
            return Err(invalid("complex dimension above 16"));
        }
        if !self.a.is_finite() || self.alpha.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("configuration"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(invalid("scale must be positive"));
        }
        let g = &self.grids;
        let grid_ok = (1..=MAX_GRID).contains(&g.xi1)
            && (1..=MAX_GRID).contains(&g.xi2)
            && (2..=MAX_GRID).contains(&g.t)
            && g.xi2_max.is_finite()
            && g.xi2_max > 1.01
            && (2..=MAX_SAMPLES).contains(&g.samples)
            && (1..=MAX_SAMPLES).contains(&g.curvature_samples)
            && g.volume_r_max.is_finite()
            && g.volume_r_max > 0.0
            && (2..=MAX_GRID).contains(&g.volume_steps)
            && g.ray_max.is_finite()
            && g.ray_max > 0.0
            && (2..=MAX_GRID).contains(&g.ray_steps);
        if !grid_ok {
            return Err(invalid("grid sizes out of range"));
        }
        let t = serde_json::to_value(&self.tolerances).map_err(|e| invalid(e.to_string()))?;
        if let serde_json::Value::Object(m) = t {
            if m.values()
                .any(|v| !v.as_f64().is_some_and(|x| x.is_finite() && x >= 0.0))
            {
                return Err(invalid("tolerances must be nonnegative"));
            }
        }
        if self.family == Family::TaubNut && (l < 2 || self.partition[l - 1] != 0) {
            return Err(invalid("the Taub-NUT family needs ℓ ≥ 2 and d_ℓ = 0"));
        }
        Ok(())
    }

    /// Builds the profile set described by the configuration.
    pub fn build(&self) -> Result<ProfileSet> {
        match self.family {
            Family::Cao => build_cao_profile(&self.params()),
            Family::TaubNut => build_taubnut_profile(&self.params()),
        }
    }
}
