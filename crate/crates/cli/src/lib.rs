//! Batch driver for the which-path interferometer model: loads a JSON config,
//! runs one of the protocols and writes CSV/JSON results.

pub mod config;
mod output;

use config::{ConfigError, LoadedConfig};
use qdc_core::experiment::{
    linspace, morphing_sweep, phase_sweep, ramsey_run, selective_rotation_trace,
};
use qdc_core::{DynamicsError, ExperimentError};
use serde_json::json;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub use config::{load_config, parse_config, Overrides};

pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_DYNAMICS: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Single protocol run at the configured phase.
    Run,
    /// `P_e` against phase at the configured angle.
    Fringe,
    /// `P_e` over the angle/phase grid.
    Morph,
    /// Selective-drive traces from the addressed and an unaddressed Fock level.
    Rabi,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io { .. }) | CliError::Config(ConfigError::Parse(_)) => {
                EXIT_PARSE
            }
            CliError::Config(ConfigError::Validation { .. }) => EXIT_VALIDATION,
            CliError::Experiment(ExperimentError::Invalid { .. } | ExperimentError::Pulse(_)) => {
                EXIT_VALIDATION
            }
            CliError::Experiment(_) => EXIT_DYNAMICS,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    /// Machine-readable description printed on stderr.
    pub fn diagnostic(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.to_string(), "exit_code": self.exit_code() });
        match self {
            CliError::Config(ConfigError::Validation { field, .. }) => v["field"] = json!(field),
            CliError::Experiment(ExperimentError::Invalid { field, .. }) => {
                v["field"] = json!(field)
            }
            CliError::Experiment(ExperimentError::Dynamics(d)) => match d {
                DynamicsError::Leakage {
                    t,
                    population,
                    tolerance,
                } => {
                    v["kind"] = json!("leakage");
                    v["t"] = json!(t);
                    v["population"] = json!(population);
                    v["tolerance"] = json!(tolerance);
                }
                DynamicsError::TraceDrift { t, drift } => {
                    v["kind"] = json!("trace_drift");
                    v["t"] = json!(t);
                    v["drift"] = json!(drift);
                }
                DynamicsError::StepSize { dt, bound } => {
                    v["kind"] = json!("step_size");
                    v["dt"] = json!(dt);
                    v["bound"] = json!(bound);
                }
                _ => v["kind"] = json!("dynamics"),
            },
            _ => {}
        }
        v
    }
}

/// Runs `command` and writes its files into `out_dir`, returning their paths.
pub fn execute(
    command: Command,
    cfg: &LoadedConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let exp = &cfg.experiment;
    let icfg = &cfg.integrator;
    let mut files = Vec::new();
    match command {
        Command::Run => {
            let run = ramsey_run(exp, icfg)?;
            let summary = json!({
                "config": cfg,
                "pe_final": run.pe_final,
                "fidelity_particle": run.fidelity_particle,
                "fidelity_wave": run.fidelity_wave,
                "diagnostics": run.diagnostics,
                "warnings": run.warnings,
            });
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
            files.push(output::write(out_dir, "run.json", &text)?);
            let header = output::header(cfg, json!({ "diagnostics": run.diagnostics }));
            let rows = run.pe_trace.iter().map(|&(t, pe)| vec![t, pe]);
            files.push(output::write_csv(
                out_dir,
                "run_trace.csv",
                &header,
                &["t", "pe"],
                rows,
            )?);
        }
        Command::Fringe => {
            let grid = linspace(0.0, 2.0 * PI, cfg.sweep.phi_points);
            let sweep = phase_sweep(exp, icfg, &grid)?;
            let header = output::header(
                cfg,
                json!({ "visibility": sweep.visibility, "diagnostics": sweep.diagnostics }),
            );
            let rows = sweep
                .phi_grid
                .iter()
                .zip(&sweep.pe)
                .map(|(&phi, &pe)| vec![phi, pe]);
            files.push(output::write_csv(
                out_dir,
                "fringe.csv",
                &header,
                &["phi", "pe"],
                rows,
            )?);
        }
        Command::Morph => {
            let alphas = linspace(0.0, FRAC_PI_2, cfg.sweep.alpha_points);
            let phis = linspace(0.0, 2.0 * PI, cfg.sweep.phi_points);
            let surface = morphing_sweep(exp, icfg, &alphas, &phis)?;
            let header = output::header(cfg, json!({ "diagnostics": surface.diagnostics }));
            let rows = surface
                .alpha_grid
                .iter()
                .zip(&surface.pe_matrix)
                .flat_map(|(&a, row)| {
                    surface
                        .phi_grid
                        .iter()
                        .zip(row)
                        .map(move |(&phi, &pe)| vec![a, phi, pe])
                });
            files.push(output::write_csv(
                out_dir,
                "morph.csv",
                &header,
                &["alpha", "phi", "pe"],
                rows,
            )?);
            let rows = surface
                .alpha_grid
                .iter()
                .zip(&surface.visibility_per_alpha)
                .map(|(&a, &v)| vec![a, v]);
            files.push(output::write_csv(
                out_dir,
                "morph_visibility.csv",
                &header,
                &["alpha", "visibility"],
                rows,
            )?);
        }
        Command::Rabi => {
            let selected = exp.n0;
            let unselected = if selected == 0 { 1 } else { 0 };
            let duration = cfg.sweep.rabi_duration;
            let on = selective_rotation_trace(exp, icfg, selected, duration)?;
            let off = selective_rotation_trace(exp, icfg, unselected, duration)?;
            let mut diagnostics = on.diagnostics;
            diagnostics.merge(&off.diagnostics);
            let header = output::header(
                cfg,
                json!({
                    "selected_fock": selected,
                    "unselected_fock": unselected,
                    "diagnostics": diagnostics,
                }),
            );
            let rows = on
                .samples
                .iter()
                .zip(&off.samples)
                .map(|(&(t, a), &(_, b))| vec![t, a, b]);
            files.push(output::write_csv(
                out_dir,
                "rabi.csv",
                &header,
                &["t", "pe_selected", "pe_unselected"],
                rows,
            )?);
        }
    }
    Ok(files)
}
