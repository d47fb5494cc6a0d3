//! The delayed-choice Ramsey protocol, its sweeps and closed-form predictions.
//!
//! The resonator starts in `cos α|0⟩ + sin α|N₀⟩` with the spin in `|g⟩`.
//! After the first rotation and the phase window the spin carries the
//! particle state; the number-selective second rotation then acts only on
//! the `|N₀⟩` branch, turning it into the wave state. Ideally
//!
//! ```text
//! P_e(α, φ) = ½cos²α + sin²α·cos²(φ/2),   V = sin²α
//! ```
//!
//! With a finite `Ω₂/χ` the selective pulse also drives the `|0⟩` branch
//! off resonance, so simulated particle-branch fringes are not flat.

use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use thiserror::Error;

use crate::dynamics::{evolve, Diagnostics, Drive, DynamicsError, IntegratorConfig, LindbladModel};
use crate::hilbert::{expectation, fidelity_pure, partial_trace_fock, HilbertError, Ket, C64};
use crate::pulses::{CouplingGate, PulseError, PulseSchedule, PulseWarning};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("visibility is undefined when every probability is zero")]
    UndefinedVisibility,
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

impl ExperimentError {
    fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

/// Named parameter sets for the standard scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Selective rotations, no decoherence.
    Fig3,
    /// Morphing surface, no decoherence, coupling gated to the selective pulse.
    Fig4,
    /// Decoherent run from `|g,1⟩`.
    Fig5a,
    /// Decoherent run from `(|g,0⟩ + |g,1⟩)/√2`.
    Fig5b,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig3, Preset::Fig4, Preset::Fig5a, Preset::Fig5b];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5a => "fig5a",
            Preset::Fig5b => "fig5b",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// Physical parameters of one protocol run, frequencies in units of Ω₂.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub chi: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub delta: f64,
    /// Ramsey phase; the detuning window lasts `T = φ/Δ`.
    pub phi: f64,
    /// Resonator superposition angle.
    pub alpha: f64,
    pub n0: usize,
    pub gamma_s: f64,
    pub gamma_m: f64,
    pub n_th: f64,
    pub n_max: usize,
    pub coupling_gate: CouplingGate,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = Self {
            chi: 10.0,
            omega1: 50.0,
            omega2: 1.0,
            delta: 100.0,
            phi: 0.0,
            alpha: FRAC_PI_2,
            n0: 1,
            gamma_s: 0.1,
            gamma_m: 0.1,
            n_th: 1.0,
            n_max: 8,
            coupling_gate: CouplingGate::AlwaysOn,
        };
        match preset {
            Preset::Fig3 => Self {
                gamma_s: 0.0,
                gamma_m: 0.0,
                ..base
            },
            Preset::Fig4 => Self {
                gamma_s: 0.0,
                gamma_m: 0.0,
                coupling_gate: CouplingGate::Stage3Only,
                ..base
            },
            Preset::Fig5a => base,
            Preset::Fig5b => Self {
                alpha: PI / 4.0,
                ..base
            },
        }
    }

    /// Same parameters with every decoherence channel switched off.
    pub fn closed(&self) -> Self {
        Self {
            gamma_s: 0.0,
            gamma_m: 0.0,
            ..self.clone()
        }
    }

    pub fn with_phase(&self, phi: f64) -> Self {
        Self {
            phi,
            ..self.clone()
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    /// Duration `T` of the detuning window.
    pub fn phase_window(&self) -> f64 {
        self.phi / self.delta
    }

    pub fn schedule(&self) -> Result<PulseSchedule, ExperimentError> {
        Ok(PulseSchedule::new(
            self.omega1,
            self.omega2,
            self.delta,
            self.phase_window(),
            self.n0 as f64 * self.chi,
            self.coupling_gate,
        )?)
    }

    pub fn model(&self) -> Result<LindbladModel, ExperimentError> {
        Ok(LindbladModel::new(
            self.chi,
            self.n0,
            Drive::Ramsey(self.schedule()?),
            self.gamma_s,
            self.gamma_m,
            self.n_th,
            self.n_max,
        )?)
    }

    /// Checks ranges and the selectivity condition; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<PulseWarning>, ExperimentError> {
        for (field, value) in [
            ("chi", self.chi),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("delta", self.delta),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ExperimentError::invalid(
                    field,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        for (field, value) in [
            ("gamma_s", self.gamma_s),
            ("gamma_m", self.gamma_m),
            ("n_th", self.n_th),
            ("phi", self.phi),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ExperimentError::invalid(
                    field,
                    format!("must be non-negative, got {value}"),
                ));
            }
        }
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&self.alpha) {
            return Err(ExperimentError::invalid(
                "alpha",
                format!("must lie in [0, π/2], got {}", self.alpha),
            ));
        }
        if self.n_max < 2 {
            return Err(ExperimentError::invalid(
                "n_max",
                format!("need at least 2 levels, got {}", self.n_max),
            ));
        }
        if self.n0 == 0 || self.n0 >= self.n_max {
            return Err(ExperimentError::invalid(
                "n0",
                format!(
                    "must satisfy 1 ≤ n0 < n_max = {}, got {}",
                    self.n_max, self.n0
                ),
            ));
        }
        let schedule = self.schedule()?;
        match schedule.validate(self.chi) {
            Ok(w) => Ok(w),
            Err(e) => Err(ExperimentError::invalid("omega2", e.to_string())),
        }
    }
}

/// `|g⟩ ⊗ (cos α|0⟩ + sin α|N₀⟩)`
pub fn prepare_initial(cfg: &ExperimentConfig) -> Result<Ket, ExperimentError> {
    if cfg.n0 >= cfg.n_max {
        return Err(HilbertError::DimensionMismatch {
            expected: cfg.n_max,
            found: cfg.n0 + 1,
        }
        .into());
    }
    let mut fock = vec![C64::new(0.0, 0.0); cfg.n_max];
    fock[0] += cfg.alpha.cos();
    fock[cfg.n0] += cfg.alpha.sin();
    Ok(Ket::tensor(
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        &fock,
    )?)
}

/// Spin state after the first rotation and the phase window,
/// `(|g⟩ − i e^{−iφ}|e⟩)/√2` for the `H = Ωσ_x` rotation sense.
pub fn particle_spin_state(phi: f64) -> [C64; 2] {
    let e = C64::new(0.0, -1.0) * C64::from_polar(1.0, -phi);
    [C64::new(FRAC_1_SQRT_2, 0.0), e * FRAC_1_SQRT_2]
}

/// Spin state after the selective rotation acts on the particle state.
pub fn wave_spin_state(phi: f64) -> [C64; 2] {
    let [g, e] = particle_spin_state(phi);
    let mi = C64::new(0.0, -1.0);
    [(g + mi * e) * FRAC_1_SQRT_2, (e + mi * g) * FRAC_1_SQRT_2]
}

/// Ideal joint output `cos α|ψ_p⟩|0⟩ + sin α|ψ_w⟩|N₀⟩` in the simulation
/// frame: the `|e,N₀⟩` amplitude carries the dispersive phase accumulated
/// while the coupling was on.
pub fn ideal_final_state(cfg: &ExperimentConfig) -> Result<Ket, ExperimentError> {
    let schedule = cfg.schedule()?;
    let frame = C64::from_polar(
        1.0,
        -(cfg.n0 as f64) * cfg.chi * schedule.coupled_time(schedule.t3()),
    );
    let p = particle_spin_state(cfg.phi);
    let w = wave_spin_state(cfg.phi);
    let mut amps = nalgebra::DVector::from_element(2 * cfg.n_max, C64::new(0.0, 0.0));
    let (ca, sa) = (cfg.alpha.cos(), cfg.alpha.sin());
    amps[0] = p[0] * ca;
    amps[cfg.n_max] = p[1] * ca;
    amps[cfg.n0] = w[0] * sa;
    amps[cfg.n_max + cfg.n0] = w[1] * sa * frame;
    Ok(Ket::from_amplitudes(amps, cfg.n_max)?)
}

/// Ideal excited-state probability `½cos²α + sin²α cos²(φ/2)`.
pub fn analytic_pe(alpha: f64, phi: f64) -> f64 {
    0.5 * alpha.cos().powi(2) + alpha.sin().powi(2) * (phi / 2.0).cos().powi(2)
}

/// Ideal fringe visibility `sin²α`.
pub fn analytic_visibility(alpha: f64) -> f64 {
    alpha.sin().powi(2)
}

/// `(P_max − P_min)/(P_max + P_min)`
pub fn visibility(pe: &[f64]) -> Result<f64, ExperimentError> {
    if pe.is_empty() {
        return Err(ExperimentError::invalid("pe", "empty list"));
    }
    if let Some(bad) = pe.iter().find(|p| !(-1e-9..=1.0 + 1e-9).contains(*p)) {
        return Err(ExperimentError::invalid(
            "pe",
            format!("probability {bad} outside [0, 1]"),
        ));
    }
    let max = pe.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = pe.iter().copied().fold(f64::INFINITY, f64::min);
    if max + min <= 0.0 {
        return Err(ExperimentError::UndefinedVisibility);
    }
    Ok((max - min) / (max + min))
}

/// Mean thermal phonon number `1/(eˣ − 1)` for `x = ħω_m/k_B T`.
pub fn thermal_occupation(x: f64) -> Result<f64, ExperimentError> {
    if !(x > 0.0) {
        return Err(ExperimentError::invalid(
            "x",
            format!("must be positive, got {x}"),
        ));
    }
    Ok(1.0 / x.exp_m1())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    /// Sampled `(t, P_e)`.
    pub pe_trace: Vec<(f64, f64)>,
    pub pe_final: f64,
    /// Overlap of the reduced spin state with the particle state.
    pub fidelity_particle: f64,
    /// Overlap of the joint state with the ideal branch superposition.
    pub fidelity_wave: f64,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<PulseWarning>,
}

/// Runs the full protocol once.
pub fn ramsey_run(
    cfg: &ExperimentConfig,
    icfg: &IntegratorConfig,
) -> Result<RunResult, ExperimentError> {
    let warnings = cfg.validate()?;
    let model = cfg.model()?;
    let t3 = cfg.schedule()?.t3();
    let rho0 = prepare_initial(cfg)?.projector();
    let mut pe_trace = Vec::new();
    let evolution = evolve(&model, &rho0, icfg, t3, |s| {
        pe_trace.push((s.t, s.rho.excited_population()));
    })?;
    let rho = &evolution.final_state;
    let pe_final = expectation(&model.ops().proj_e, rho)?;
    let [g, e] = particle_spin_state(cfg.phi);
    let fidelity_particle = fidelity_pure(&partial_trace_fock(rho), &Ket::spin(g, e)?)?;
    let fidelity_wave = fidelity_pure(rho, &ideal_final_state(cfg)?)?;
    Ok(RunResult {
        pe_trace,
        pe_final,
        fidelity_particle,
        fidelity_wave,
        diagnostics: evolution.diagnostics,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FringeSweep {
    pub phi_grid: Vec<f64>,
    pub pe: Vec<f64>,
    pub visibility: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorphSurface {
    pub alpha_grid: Vec<f64>,
    pub phi_grid: Vec<f64>,
    /// `pe_matrix[i][j]` at `(alpha_grid[i], phi_grid[j])`.
    pub pe_matrix: Vec<Vec<f64>>,
    pub visibility_per_alpha: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// `points` evenly spaced values on `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Default phase grid: 41 points on `[0, 2π]`.
pub fn default_phi_grid() -> Vec<f64> {
    linspace(0.0, 2.0 * PI, 41)
}

/// Default angle grid: 9 points on `[0, π/2]`.
pub fn default_alpha_grid() -> Vec<f64> {
    linspace(0.0, FRAC_PI_2, 9)
}

fn check_grid(field: &'static str, grid: &[f64]) -> Result<(), ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::invalid(field, "grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ExperimentError::invalid(
            field,
            "grid must be strictly increasing",
        ));
    }
    Ok(())
}

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order follows input order.
fn map_points<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// One protocol run per phase, `T = φ/Δ`.
pub fn phase_sweep(
    cfg: &ExperimentConfig,
    icfg: &IntegratorConfig,
    phi_grid: &[f64],
) -> Result<FringeSweep, ExperimentError> {
    check_grid("phi_grid", phi_grid)?;
    let runs = map_points(phi_grid, |&phi| ramsey_run(&cfg.with_phase(phi), icfg));
    let mut pe = Vec::with_capacity(runs.len());
    let mut diagnostics = Diagnostics::default();
    for run in runs {
        let run = run?;
        pe.push(run.pe_final);
        diagnostics.merge(&run.diagnostics);
    }
    Ok(FringeSweep {
        phi_grid: phi_grid.to_vec(),
        visibility: visibility(&pe)?,
        pe,
        diagnostics,
    })
}

/// Full `P_e(α, φ)` surface.
pub fn morphing_sweep(
    cfg: &ExperimentConfig,
    icfg: &IntegratorConfig,
    alpha_grid: &[f64],
    phi_grid: &[f64],
) -> Result<MorphSurface, ExperimentError> {
    check_grid("alpha_grid", alpha_grid)?;
    check_grid("phi_grid", phi_grid)?;
    let points: Vec<(f64, f64)> = alpha_grid
        .iter()
        .flat_map(|&a| phi_grid.iter().map(move |&p| (a, p)))
        .collect();
    let runs = map_points(&points, |&(alpha, phi)| {
        ramsey_run(&cfg.with_alpha(alpha).with_phase(phi), icfg)
    });
    let mut diagnostics = Diagnostics::default();
    let mut flat = Vec::with_capacity(runs.len());
    for run in runs {
        let run = run?;
        diagnostics.merge(&run.diagnostics);
        flat.push(run.pe_final);
    }
    let pe_matrix: Vec<Vec<f64>> = flat.chunks(phi_grid.len()).map(<[f64]>::to_vec).collect();
    let visibility_per_alpha = pe_matrix
        .iter()
        .map(|row| visibility(row))
        .collect::<Result<_, _>>()?;
    Ok(MorphSurface {
        alpha_grid: alpha_grid.to_vec(),
        phi_grid: phi_grid.to_vec(),
        pe_matrix,
        visibility_per_alpha,
        diagnostics,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RabiTrace {
    pub fock_n: usize,
    /// Sampled `(t, P_e)`.
    pub samples: Vec<(f64, f64)>,
    pub diagnostics: Diagnostics,
}

impl RabiTrace {
    pub fn max_pe(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Continuous Ω₂ drive resonant with `|g,N₀⟩ ↔ |e,N₀⟩`, starting from
/// `|g,fock_n⟩`.
pub fn selective_rotation_trace(
    cfg: &ExperimentConfig,
    icfg: &IntegratorConfig,
    fock_n: usize,
    duration: f64,
) -> Result<RabiTrace, ExperimentError> {
    if fock_n >= cfg.n_max {
        return Err(HilbertError::DimensionMismatch {
            expected: cfg.n_max,
            found: fock_n + 1,
        }
        .into());
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(ExperimentError::invalid(
            "duration",
            format!("must be non-negative, got {duration}"),
        ));
    }
    let model = LindbladModel::new(
        cfg.chi,
        cfg.n0,
        Drive::Selective { omega: cfg.omega2 },
        cfg.gamma_s,
        cfg.gamma_m,
        cfg.n_th,
        cfg.n_max,
    )?;
    let rho0 = Ket::basis(false, fock_n, cfg.n_max)?.projector();
    let mut samples = Vec::new();
    let evolution = evolve(&model, &rho0, icfg, duration, |s| {
        samples.push((s.t, s.rho.excited_population()));
    })?;
    Ok(RabiTrace {
        fock_n,
        samples,
        diagnostics: evolution.diagnostics,
    })
}
