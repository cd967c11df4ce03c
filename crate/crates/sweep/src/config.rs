//! Sweep configuration files.
//!
//! Configs are TOML. Frequencies are written as ν = ω/2π in MHz unless
//! `units = "relative"`, in which case they are taken as plain multiples of a
//! reference rate and used unchanged. [`angular`] is the only place where
//! the conversion happens.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use fpsteady::paramp::ParampParams;
use fpsteady::qgrid::{Axis, GridSpec};
use fpsteady::transmon::TransmonCavityParams;

use crate::error::{Result, SweepError};
use crate::observable::Observable;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TransmonCavity,
    ParametricDuffing,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleTarget {
    TransmonCavity,
    ParametricDuffing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Mhz,
    Relative,
}

/// Converts a configured frequency to angular units.
pub fn angular(value: f64, units: Units) -> f64 {
    match units {
        Units::Mhz => TAU * value,
        Units::Relative => value,
    }
}

/// Inverse of [`angular`], for reporting frequencies back in config units.
pub fn from_angular(value: f64, units: Units) -> f64 {
    match units {
        Units::Mhz => value / TAU,
        Units::Relative => value,
    }
}

/// A real number, or a complex one as `{ re, im }` or `{ abs, phase }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Cartesian { re: f64, im: f64 },
    Polar { abs: f64, phase: f64 },
}

impl ParamValue {
    pub fn to_complex(self) -> Complex64 {
        match self {
            ParamValue::Real(v) => Complex64::new(v, 0.0),
            ParamValue::Cartesian { re, im } => Complex64::new(re, im),
            ParamValue::Polar { abs, phase } => Complex64::from_polar(abs, phase),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: String,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub scale: AxisScale,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

impl AxisConfig {
    /// Sample points in config units.
    pub fn points(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            if self.min.is_some() || self.max.is_some() || self.count.is_some() {
                return Err(cfg(format!("axis `{}` mixes `values` with a range", self.param)));
            }
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(cfg(format!("axis `{}` needs finite values", self.param)));
            }
            return Ok(v.clone());
        }
        let (Some(min), Some(max), Some(count)) = (self.min, self.max, self.count) else {
            return Err(cfg(format!("axis `{}` needs min, max and count (or values)", self.param)));
        };
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(cfg(format!("axis `{}` has bad range [{min}, {max}]", self.param)));
        }
        if count < 2 {
            if count == 1 && min == max {
                return Ok(vec![min]);
            }
            return Err(cfg(format!("axis `{}` needs count >= 2", self.param)));
        }
        let t = |i: usize| i as f64 / (count - 1) as f64;
        Ok(match self.scale {
            AxisScale::Linear => (0..count).map(|i| min + (max - min) * t(i)).collect(),
            AxisScale::Log => {
                if min <= 0.0 {
                    return Err(cfg(format!("log axis `{}` needs min > 0", self.param)));
                }
                let (a, b) = (min.ln(), max.ln());
                (0..count).map(|i| (a + (b - a) * t(i)).exp()).collect()
            }
        })
    }
}

/// Phase-plane grid for Q-function observables, in units of the field amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QGridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub count: usize,
}

impl QGridConfig {
    pub fn square(half: f64, count: usize) -> Self {
        QGridConfig { x_min: -half, x_max: half, y_min: -half, y_max: half, count }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { x: Axis::new(self.x_min, self.x_max, self.count), y: Axis::new(self.y_min, self.y_max, self.count) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
    /// File stem; defaults to the config name.
    #[serde(default)]
    pub prefix: String,
    #[serde(default)]
    pub intensity: Intensity,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { formats: default_formats(), prefix: String::new(), intensity: Intensity::default() }
    }
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_check_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_check_points")]
    pub max_points: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_check_tolerance() -> f64 {
    1e-6
}

fn default_check_points() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleModelConfig {
    pub target: OracleTarget,
    /// Starting truncation per mode; grown until observables settle.
    pub dims: Vec<usize>,
    #[serde(default = "default_oracle_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_dim_cap")]
    pub dim_cap: usize,
}

fn default_oracle_tol() -> f64 {
    1e-8
}

fn default_dim_cap() -> usize {
    fpsteady::oracle::DEFAULT_DIM_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: ModelKind,
    #[serde(default)]
    pub oracle: Option<OracleModelConfig>,
    #[serde(default)]
    pub units: Units,
    pub params: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub axes: Vec<AxisConfig>,
    pub observables: Vec<String>,
    #[serde(default)]
    pub qgrid: Option<QGridConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub oracle_check: Option<OracleCheckConfig>,
}

/// Concrete parameters for one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointParams {
    Transmon(TransmonCavityParams),
    Paramp(ParampParams),
}

const TRANSMON_PARAMS: [&str; 7] = ["delta_c", "delta_ct", "g", "chi", "gamma_c", "gamma_t", "epsilon"];
const PARAMP_PARAMS: [&str; 6] = ["delta", "eps1", "eps2", "u", "gamma1", "gamma2"];

fn cfg(msg: String) -> SweepError {
    SweepError::Config(msg)
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut c: SweepConfig = toml::from_str(text).map_err(|e| cfg(e.to_string()))?;
        if c.output.prefix.is_empty() {
            c.output.prefix = if c.name.is_empty() { "sweep".into() } else { c.name.clone() };
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Which analytic parameter set this config describes.
    pub fn target(&self) -> OracleTarget {
        match (self.model, &self.oracle) {
            (ModelKind::TransmonCavity, _) => OracleTarget::TransmonCavity,
            (ModelKind::ParametricDuffing, _) => OracleTarget::ParametricDuffing,
            (ModelKind::Oracle, Some(o)) => o.target,
            (ModelKind::Oracle, None) => OracleTarget::ParametricDuffing,
        }
    }

    fn param_names(&self) -> &'static [&'static str] {
        match self.target() {
            OracleTarget::TransmonCavity => &TRANSMON_PARAMS,
            OracleTarget::ParametricDuffing => &PARAMP_PARAMS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(cfg(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        match (self.model, &self.oracle) {
            (ModelKind::Oracle, None) => return Err(cfg("model `oracle` needs an [oracle] table".into())),
            (ModelKind::Oracle, Some(o)) => {
                let want = match o.target {
                    OracleTarget::TransmonCavity => 2,
                    OracleTarget::ParametricDuffing => 1,
                };
                if o.dims.len() != want || o.dims.iter().any(|&d| d < 2) {
                    return Err(cfg(format!("oracle dims must list {want} truncations of at least 2")));
                }
            }
            (_, Some(_)) => return Err(cfg("[oracle] table is only valid with model `oracle`".into())),
            _ => {}
        }
        let names = self.param_names();
        for (k, v) in &self.params {
            if !names.contains(&k.as_str()) {
                return Err(cfg(format!("unknown parameter `{k}`; expected one of {names:?}")));
            }
            let z = v.to_complex();
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(cfg(format!("parameter `{k}` is not finite")));
            }
        }
        if self.axes.len() > 2 {
            return Err(cfg(format!("at most two swept parameters, got {}", self.axes.len())));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if !names.contains(&a.param.as_str()) {
                return Err(cfg(format!("axis sweeps unknown parameter `{}`", a.param)));
            }
            if self.axes[..i].iter().any(|b| b.param == a.param) {
                return Err(cfg(format!("parameter `{}` swept twice", a.param)));
            }
            a.points()?;
        }
        if self.observables.is_empty() {
            return Err(cfg("no observables requested".into()));
        }
        let obs = self.parsed_observables()?;
        if obs.iter().any(|o| o.needs_qgrid()) {
            let Some(q) = self.qgrid else {
                return Err(cfg("Q-function observables need a [qgrid] table".into()));
            };
            q.spec().validate().map_err(|e| cfg(format!("bad qgrid: {e}")))?;
        }
        if let Some(q) = self.qgrid {
            if q.count < 2 {
                return Err(cfg("qgrid count must be at least 2".into()));
            }
        }
        if self.output.prefix.is_empty() || self.output.prefix.contains(['/', '\\']) {
            return Err(cfg("output prefix must be a plain file stem".into()));
        }
        if let Some(c) = self.oracle_check {
            if c.enabled && self.model == ModelKind::Oracle {
                return Err(cfg("oracle_check is meaningless for model `oracle`".into()));
            }
            if !(c.tolerance > 0.0) {
                return Err(cfg("oracle_check tolerance must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn parsed_observables(&self) -> Result<Vec<Observable>> {
        self.observables.iter().map(|s| Observable::parse(s, self.target(), self.model)).collect()
    }

    /// Axis sample points in config units, outermost first.
    pub fn axis_points(&self) -> Result<Vec<Vec<f64>>> {
        self.axes.iter().map(|a| a.points()).collect()
    }

    /// Parameters at one grid point; `assign` pairs swept names with config-unit values.
    ///
    /// A swept complex parameter takes the swept value as its magnitude and
    /// keeps the phase of its fixed value.
    pub fn point_params(&self, assign: &[(&str, f64)]) -> Result<PointParams> {
        let get = |name: &str, default: Option<Complex64>| -> Result<Complex64> {
            let fixed = self.params.get(name).map(|v| v.to_complex());
            let raw = match assign.iter().find(|(n, _)| *n == name) {
                Some(&(_, v)) => {
                    let phase = fixed.map(|z| if z.norm() > 0.0 { z.arg() } else { 0.0 }).unwrap_or(0.0);
                    Complex64::from_polar(v, phase)
                }
                None => match fixed.or(default) {
                    Some(z) => z,
                    None => return Err(cfg(format!("missing parameter `{name}`"))),
                },
            };
            Ok(Complex64::new(angular(raw.re, self.units), angular(raw.im, self.units)))
        };
        let real = |name: &str, default: Option<f64>| -> Result<f64> {
            let z = get(name, default.map(|d| Complex64::new(d, 0.0)))?;
            if z.im != 0.0 {
                return Err(cfg(format!("parameter `{name}` must be real")));
            }
            Ok(z.re)
        };
        Ok(match self.target() {
            OracleTarget::TransmonCavity => PointParams::Transmon(TransmonCavityParams {
                delta_c: real("delta_c", None)?,
                delta_ct: real("delta_ct", None)?,
                g: real("g", None)?,
                chi: real("chi", None)?,
                gamma_c: real("gamma_c", None)?,
                gamma_t: real("gamma_t", Some(0.0))?,
                epsilon: get("epsilon", None)?,
            }),
            OracleTarget::ParametricDuffing => PointParams::Paramp(ParampParams {
                delta: real("delta", None)?,
                eps1: get("eps1", Some(Complex64::new(0.0, 0.0)))?,
                eps2: get("eps2", Some(Complex64::new(0.0, 0.0)))?,
                u: real("u", None)?,
                gamma1: real("gamma1", None)?,
                gamma2: real("gamma2", Some(0.0))?,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
model = "parametric_duffing"
units = "relative"
observables = ["n_c"]
[params]
delta = -12.0
eps2 = { abs = 2.0, phase = 0.5 }
u = 5.0
gamma1 = 1.0
[output]
prefix = "t"
"#;

    #[test]
    fn parses_and_builds_points() {
        let c = SweepConfig::from_toml(BASE).unwrap();
        let PointParams::Paramp(p) = c.point_params(&[("eps2", 3.0)]).unwrap() else { panic!() };
        assert!((p.eps2 - Complex64::from_polar(3.0, 0.5)).norm() < 1e-15);
        assert_eq!(p.gamma2, 0.0);
    }

    #[test]
    fn mhz_units_become_angular() {
        let text = BASE.replace("units = \"relative\"\n", "");
        let c = SweepConfig::from_toml(&text).unwrap();
        let PointParams::Paramp(p) = c.point_params(&[]).unwrap() else { panic!() };
        assert!((p.delta - (-12.0 * TAU)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SweepConfig::from_toml(&BASE.replace("schema_version = 1", "schema_version = 7")).is_err());
        assert!(SweepConfig::from_toml(&BASE.replace("u = 5.0", "u = 5.0\nbogus = 1.0")).is_err());
        assert!(SweepConfig::from_toml(&BASE.replace("[\"n_c\"]", "[\"nonsense\"]")).is_err());
        let axis = "[[axes]]\nparam = \"eps2\"\nmin = 1.0\nmax = 0.0\ncount = 3\n";
        assert!(SweepConfig::from_toml(&format!("{BASE}{axis}")).is_err());
        let axis = "[[axes]]\nparam = \"eps2\"\nmin = 0.0\nmax = 1.0\ncount = 3\nscale = \"log\"\n";
        assert!(SweepConfig::from_toml(&format!("{BASE}{axis}")).is_err());
    }

    #[test]
    fn log_axis() {
        let a = AxisConfig { param: "x".into(), min: Some(1.0), max: Some(100.0), count: Some(3), scale: AxisScale::Log, values: None };
        let p = a.points().unwrap();
        assert!((p[1] - 10.0).abs() < 1e-12);
    }
}
