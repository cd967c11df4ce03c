//! Bundled configs for the standard parameter scans.

use std::path::{Path, PathBuf};

use crate::config::{AxisConfig, AxisScale, ModelKind, OutputConfig, OutputFormat, ParamValue, SweepConfig, Units, SCHEMA_VERSION};
use crate::emit::emit;
use crate::error::{Result, SweepError};
use crate::run::{run_sweep, RunOptions};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../configs/", $name, ".toml")))),*]
    };
}

pub const BUNDLED: &[(&str, &str)] = bundled![
    "resonant_rabi",
    "resonant_excitations",
    "dispersive_transmon",
    "dispersive_reflection",
    "dispersive_excitations",
    "transmon_bistability",
    "transmon_q_low_drive",
    "transmon_q_high_drive",
    "phase_diagram",
    "transition_detuning_12",
    "transition_detuning_8",
    "squeezing_weak_kerr",
    "squeezing_strong_kerr",
    "cat_a",
    "cat_b",
    "cat_c",
    "cat_d",
];

pub fn bundled(name: &str) -> Result<SweepConfig> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| SweepError::Config(format!("no bundled config `{name}`")))?;
    SweepConfig::from_toml(text)
}

/// Runs every bundled config (or the one named `only`) and writes the outputs to `dir`.
pub fn run_figures(dir: &Path, only: Option<&str>, opts: RunOptions) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, _) in BUNDLED {
        if only.is_some_and(|o| o != *name) {
            continue;
        }
        let cfg = bundled(name)?;
        let result = run_sweep(&cfg, opts)?;
        written.extend(emit(&result, dir)?);
    }
    if written.is_empty() {
        return Err(SweepError::Config(format!("no bundled config `{}`", only.unwrap_or(""))));
    }
    Ok(written)
}

/// Mean-field phase classification over `(Δ, |ε₂|)` in units of `γ₁`.
pub fn phase_diagram_config(delta: (f64, f64), eps2_max: f64, count: usize, u: f64, prefix: &str) -> SweepConfig {
    let axis = |param: &str, min: f64, max: f64| AxisConfig {
        param: param.into(),
        min: Some(min),
        max: Some(max),
        count: Some(count),
        scale: AxisScale::Linear,
        values: None,
    };
    SweepConfig {
        schema_version: SCHEMA_VERSION,
        name: "phase_diagram".into(),
        description: "classical fixed-point phases of the parametric oscillator".into(),
        model: ModelKind::ParametricDuffing,
        oracle: None,
        units: Units::Relative,
        params: [("gamma1", 1.0), ("u", u), ("delta", 0.0)].into_iter().map(|(k, v)| (k.to_string(), ParamValue::Real(v))).collect(),
        axes: vec![axis("delta", delta.0, delta.1), axis("eps2", 0.0, eps2_max)],
        observables: vec!["phase".into()],
        qgrid: None,
        output: OutputConfig { formats: vec![OutputFormat::Csv, OutputFormat::Pgm], prefix: prefix.into(), intensity: Default::default() },
        oracle_check: None,
    }
}
