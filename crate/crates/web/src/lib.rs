//! Browser bindings for the interferometer model.
//!
//! The page in `www/` calls three entry points: a simulated phase fringe,
//! selective-drive traces for the lowest Fock levels, and the closed-form
//! `P_e(α, φ)` surface.

use qdc_core::experiment::{analytic_pe, linspace, phase_sweep, selective_rotation_trace};
use qdc_core::{CouplingGate, ExperimentConfig, IntegratorConfig, Preset};
use std::f64::consts::{FRAC_PI_2, PI};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 201;

#[wasm_bindgen]
pub struct Fringe {
    phi: Vec<f64>,
    pe: Vec<f64>,
    analytic: Vec<f64>,
    visibility: f64,
}

#[wasm_bindgen]
impl Fringe {
    #[wasm_bindgen(getter)]
    pub fn phi(&self) -> Vec<f64> {
        self.phi.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn pe(&self) -> Vec<f64> {
        self.pe.clone()
    }

    /// Ideal closed-system curve at the same angle.
    #[wasm_bindgen(getter)]
    pub fn analytic(&self) -> Vec<f64> {
        self.analytic.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn visibility(&self) -> f64 {
        self.visibility
    }
}

#[wasm_bindgen]
pub struct RabiTraces {
    t: Vec<f64>,
    levels: usize,
    /// Row-major, one row per Fock level.
    pe: Vec<f64>,
}

#[wasm_bindgen]
impl RabiTraces {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `P_e(t)` starting from `|g, n⟩`.
    pub fn level(&self, n: usize) -> Vec<f64> {
        let len = self.t.len();
        self.pe
            .get(n * len..(n + 1) * len)
            .map(<[f64]>::to_vec)
            .unwrap_or_default()
    }
}

fn check_points(points: usize) -> Result<(), String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!(
            "points must lie in [2, {MAX_POINTS}], got {points}"
        ));
    }
    Ok(())
}

pub fn simulate_fringe(
    preset: &str,
    alpha: f64,
    stage3_only: bool,
    points: usize,
) -> Result<Fringe, String> {
    check_points(points)?;
    let preset = Preset::from_name(preset).ok_or_else(|| format!("unknown preset {preset:?}"))?;
    let gate = if stage3_only {
        CouplingGate::Stage3Only
    } else {
        CouplingGate::AlwaysOn
    };
    let cfg = ExperimentConfig {
        coupling_gate: gate,
        ..ExperimentConfig::preset(preset)
    }
    .with_alpha(alpha);
    let grid = linspace(0.0, 2.0 * PI, points);
    let sweep =
        phase_sweep(&cfg, &IntegratorConfig::default(), &grid).map_err(|e| e.to_string())?;
    Ok(Fringe {
        analytic: grid.iter().map(|&phi| analytic_pe(alpha, phi)).collect(),
        phi: sweep.phi_grid,
        pe: sweep.pe,
        visibility: sweep.visibility,
    })
}

/// Closed-system traces under a continuous drive of strength `omega2`
/// resonant with the `N₀ = 1` level, for Fock levels `0..levels`.
pub fn simulate_rabi(omega2: f64, duration: f64, levels: usize) -> Result<RabiTraces, String> {
    // The drive conserves phonon number.
    let cfg = ExperimentConfig {
        omega2,
        n_max: 5,
        ..ExperimentConfig::preset(Preset::Fig3)
    };
    if !(omega2 > 0.0 && omega2 < cfg.chi) {
        return Err(format!("omega2 must lie in (0, {}), got {omega2}", cfg.chi));
    }
    if !(duration > 0.0 && duration <= 100.0) {
        return Err(format!("duration must lie in (0, 100], got {duration}"));
    }
    if !(1..=4).contains(&levels) {
        return Err(format!("levels must lie in [1, 4], got {levels}"));
    }
    let dt = 1e-3;
    let steps = (duration / dt).ceil() as usize;
    let icfg = IntegratorConfig {
        dt,
        observer_stride: (steps / 400).max(1),
        leakage_tol: 1e-4,
    };
    let mut t = Vec::new();
    let mut pe = Vec::new();
    for n in 0..levels {
        let trace =
            selective_rotation_trace(&cfg, &icfg, n, duration).map_err(|e| e.to_string())?;
        if n == 0 {
            t = trace.samples.iter().map(|s| s.0).collect();
        }
        pe.extend(trace.samples.iter().map(|s| s.1));
    }
    Ok(RabiTraces { t, levels, pe })
}

/// Row-major `P_e` on an `alpha_points × phi_points` grid over
/// `[0, π/2] × [0, 2π]`.
pub fn analytic_surface(alpha_points: usize, phi_points: usize) -> Result<Vec<f64>, String> {
    check_points(alpha_points)?;
    check_points(phi_points)?;
    let phis = linspace(0.0, 2.0 * PI, phi_points);
    Ok(linspace(0.0, FRAC_PI_2, alpha_points)
        .into_iter()
        .flat_map(|a| phis.iter().map(move |&p| analytic_pe(a, p)))
        .collect())
}

#[wasm_bindgen]
pub fn fringe(
    preset: &str,
    alpha: f64,
    stage3_only: bool,
    points: usize,
) -> Result<Fringe, JsValue> {
    simulate_fringe(preset, alpha, stage3_only, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rabi(omega2: f64, duration: f64, levels: usize) -> Result<RabiTraces, JsValue> {
    simulate_rabi(omega2, duration, levels).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn surface(alpha_points: usize, phi_points: usize) -> Result<Vec<f64>, JsValue> {
    analytic_surface(alpha_points, phi_points).map_err(|e| JsValue::from_str(&e))
}
