//! JSON configuration files.
//!
//! A config is a flat JSON object. Frequencies and rates are in units of Ω₂.
//! An optional `"preset"` supplies every value; keys given alongside it
//! override the preset. Without a preset all physical keys are required.

use qdc_core::experiment::{ExperimentConfig, Preset};
use qdc_core::{CouplingGate, IntegratorConfig, PulseWarning};
use serde::Serialize;
use serde_json::{Map, Value};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

pub const UNITS_NOTE: &str = "frequencies and rates in units of omega2; times in units of 1/omega2";

const KNOWN_KEYS: &[&str] = &[
    "preset",
    "chi",
    "omega1",
    "omega2",
    "delta",
    "phi",
    "t_phase",
    "alpha",
    "n0",
    "gamma_s",
    "gamma_m",
    "n_th",
    "n_max",
    "dt",
    "coupling_gate",
    "observer_stride",
    "leakage_tol",
    "phi_points",
    "alpha_points",
    "rabi_duration",
];

const REQUIRED_KEYS: &[&str] = &[
    "chi", "omega1", "omega2", "delta", "alpha", "n0", "gamma_s", "gamma_m", "n_th", "n_max", "dt",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Self::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Grid sizes and trace duration for the sweep subcommands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub phi_points: usize,
    pub alpha_points: usize,
    pub rabi_duration: f64,
}

/// Fully resolved configuration, echoed into every output file.
#[derive(Debug, Clone, Serialize)]
pub struct LoadedConfig {
    pub preset: Option<String>,
    pub experiment: ExperimentConfig,
    #[serde(serialize_with = "serialize_integrator")]
    pub integrator: IntegratorConfig,
    pub sweep: SweepSettings,
    pub units: &'static str,
    #[serde(skip)]
    pub warnings: Vec<PulseWarning>,
}

fn serialize_integrator<S: serde::Serializer>(
    i: &IntegratorConfig,
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("IntegratorConfig", 3)?;
    st.serialize_field("dt", &i.dt)?;
    st.serialize_field("observer_stride", &i.observer_stride)?;
    st.serialize_field("leakage_tol", &i.leakage_tol)?;
    st.end()
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub n_max: Option<usize>,
}

fn preset_values(preset: Preset) -> Map<String, Value> {
    let e = ExperimentConfig::preset(preset);
    let mut m = Map::new();
    m.insert("chi".into(), e.chi.into());
    m.insert("omega1".into(), e.omega1.into());
    m.insert("omega2".into(), e.omega2.into());
    m.insert("delta".into(), e.delta.into());
    m.insert("phi".into(), e.phi.into());
    m.insert("alpha".into(), e.alpha.into());
    m.insert("n0".into(), e.n0.into());
    m.insert("gamma_s".into(), e.gamma_s.into());
    m.insert("gamma_m".into(), e.gamma_m.into());
    m.insert("n_th".into(), e.n_th.into());
    m.insert("n_max".into(), e.n_max.into());
    m.insert("dt".into(), IntegratorConfig::default().dt.into());
    m.insert(
        "coupling_gate".into(),
        serde_json::to_value(e.coupling_gate).expect("gate serializes"),
    );
    m
}

pub fn load_config(path: &Path, overrides: Overrides) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, overrides)
}

pub fn parse_config(text: &str, overrides: Overrides) -> Result<LoadedConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let Value::Object(user) = value else {
        return Err(ConfigError::Parse("top level must be a JSON object".into()));
    };
    if let Some(key) = user.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(ConfigError::invalid(key, "unknown key"));
    }

    let preset =
        match user.get("preset") {
            None => None,
            Some(Value::String(name)) => Some(Preset::from_name(name).ok_or_else(|| {
                ConfigError::invalid("preset", format!("unknown preset {name:?}"))
            })?),
            Some(_) => return Err(ConfigError::invalid("preset", "must be a string")),
        };
    if user.contains_key("phi") && user.contains_key("t_phase") {
        return Err(ConfigError::invalid(
            "t_phase",
            "give either phi or t_phase, not both",
        ));
    }
    let mut map = preset.map(preset_values).unwrap_or_default();
    if user.contains_key("t_phase") {
        map.remove("phi");
    }
    for (k, v) in user {
        if k != "preset" {
            map.insert(k, v);
        }
    }
    if let Some(dt) = overrides.dt {
        map.insert("dt".into(), dt.into());
    }
    if let Some(n) = overrides.n_max {
        map.insert("n_max".into(), n.into());
    }
    if let Some(key) = REQUIRED_KEYS.iter().find(|k| !map.contains_key(**k)) {
        return Err(ConfigError::invalid(key, "missing required key"));
    }

    let delta = number(&map, "delta")?;
    let phi = match map.get("t_phase") {
        Some(_) => number(&map, "t_phase")? * delta,
        None => optional_number(&map, "phi")?.unwrap_or(0.0),
    };
    let coupling_gate = match map.get("coupling_gate") {
        None => CouplingGate::default(),
        Some(v) => serde_json::from_value(v.clone()).map_err(|_| {
            ConfigError::invalid("coupling_gate", "expected \"always_on\" or \"stage3_only\"")
        })?,
    };
    let experiment = ExperimentConfig {
        chi: number(&map, "chi")?,
        omega1: number(&map, "omega1")?,
        omega2: number(&map, "omega2")?,
        delta,
        phi,
        alpha: number(&map, "alpha")?,
        n0: count(&map, "n0")?,
        gamma_s: number(&map, "gamma_s")?,
        gamma_m: number(&map, "gamma_m")?,
        n_th: number(&map, "n_th")?,
        n_max: count(&map, "n_max")?,
        coupling_gate,
    };
    let defaults = IntegratorConfig::default();
    let integrator = IntegratorConfig {
        dt: number(&map, "dt")?,
        observer_stride: optional_count(&map, "observer_stride")?
            .unwrap_or(defaults.observer_stride),
        leakage_tol: optional_number(&map, "leakage_tol")?.unwrap_or(defaults.leakage_tol),
    };
    let sweep = SweepSettings {
        phi_points: optional_count(&map, "phi_points")?.unwrap_or(41),
        alpha_points: optional_count(&map, "alpha_points")?.unwrap_or(9),
        rabi_duration: optional_number(&map, "rabi_duration")?.unwrap_or(PI / experiment.omega2),
    };

    let warnings = experiment.validate().map_err(|e| match e {
        qdc_core::ExperimentError::Invalid { field, reason } => ConfigError::invalid(field, reason),
        other => ConfigError::invalid("config", other.to_string()),
    })?;
    validate_integration(&experiment, &integrator, &sweep)?;

    Ok(LoadedConfig {
        preset: preset.map(|p| p.name().to_string()),
        experiment,
        integrator,
        sweep,
        units: UNITS_NOTE,
        warnings,
    })
}

fn validate_integration(
    e: &ExperimentConfig,
    i: &IntegratorConfig,
    s: &SweepSettings,
) -> Result<(), ConfigError> {
    let bound = e
        .model()
        .map_err(|err| ConfigError::invalid("config", err.to_string()))?
        .max_step();
    if !(i.dt > 0.0) || i.dt > bound {
        return Err(ConfigError::invalid(
            "dt",
            format!("must lie in (0, {bound}], got {}", i.dt),
        ));
    }
    if i.observer_stride == 0 {
        return Err(ConfigError::invalid(
            "observer_stride",
            "must be at least 1",
        ));
    }
    if !(i.leakage_tol > 0.0) {
        return Err(ConfigError::invalid("leakage_tol", "must be positive"));
    }
    if s.phi_points < 2 {
        return Err(ConfigError::invalid("phi_points", "need at least 2 points"));
    }
    if s.alpha_points < 1 {
        return Err(ConfigError::invalid(
            "alpha_points",
            "need at least 1 point",
        ));
    }
    if !(s.rabi_duration > 0.0 && s.rabi_duration.is_finite()) {
        return Err(ConfigError::invalid("rabi_duration", "must be positive"));
    }
    Ok(())
}

fn optional_number(map: &Map<String, Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| ConfigError::invalid(key, format!("expected a number, got {v}"))),
    }
}

fn number(map: &Map<String, Value>, key: &str) -> Result<f64, ConfigError> {
    optional_number(map, key)?.ok_or_else(|| ConfigError::invalid(key, "missing required key"))
}

fn optional_count(map: &Map<String, Value>, key: &str) -> Result<Option<usize>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v.as_u64().map(|n| Some(n as usize)).ok_or_else(|| {
            ConfigError::invalid(key, format!("expected a non-negative integer, got {v}"))
        }),
    }
}

fn count(map: &Map<String, Value>, key: &str) -> Result<usize, ConfigError> {
    optional_count(map, key)?.ok_or_else(|| ConfigError::invalid(key, "missing required key"))
}
