//! Three-stage Ramsey drive schedule.
//!
//! ```text
//!   Ω₁ ─┐                      ┌─ Ω₂ (at ω₀ + N₀χ)
//!       │   Δ for time T        │
//!  [0, t1)   [t1, t2)    [t2, t3]    idle
//! ```
//!
//! A drive `H = Ω σ_x` held for `π/(4Ω)` is a π/2 rotation: the rotation
//! angle is `2Ωt`, not `Ωt`. Stage intervals are half-open and closed at the
//! left; the last stage also includes `t3`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

/// Ω₂/χ above which the selective pulse leaks noticeably into the other
/// number states (the off-resonant transfer 4Ω₂²/(4Ω₂²+χ²) exceeds 1/26).
pub const SELECTIVITY_WARN_RATIO: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("invalid pulse parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("selectivity violated: omega2 = {omega2} must be smaller than chi = {chi}")]
    SelectivityViolated { omega2: f64, chi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PulseWarning {
    /// Ω₂/χ is large enough that the selective pulse is visibly imperfect.
    WeakSelectivity { ratio: f64 },
}

impl std::fmt::Display for PulseWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PulseWarning::WeakSelectivity { ratio } => write!(
                f,
                "omega2/chi = {ratio:.3} > {SELECTIVITY_WARN_RATIO}: selective pulse will drive other number states"
            ),
        }
    }
}

/// When the dispersive coupling `χ a†a|e⟩⟨e|` is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingGate {
    /// Coupling present during the whole protocol.
    #[default]
    AlwaysOn,
    /// Coupling switched on only for the selective pulse.
    Stage3Only,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// First π/2 rotation (Ω₁).
    Split,
    /// Detuning window accumulating the phase φ = ΔT.
    Phase,
    /// Number-selective π/2 rotation (Ω₂).
    Selective,
    /// After the protocol.
    Idle,
}

/// Drive values at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub omega1: f64,
    pub omega2: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    omega1: f64,
    omega2: f64,
    delta: f64,
    phase_window: f64,
    drive_detuning: f64,
    coupling_gate: CouplingGate,
    t1: f64,
    t2: f64,
    t3: f64,
}

impl PulseSchedule {
    /// `phase_window` is the duration `T` of the detuning stage;
    /// `drive_detuning` is the selective drive offset `N₀χ` from ω₀.
    pub fn new(
        omega1: f64,
        omega2: f64,
        delta: f64,
        phase_window: f64,
        drive_detuning: f64,
        coupling_gate: CouplingGate,
    ) -> Result<Self, PulseError> {
        let positive = [("omega1", omega1), ("omega2", omega2)];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PulseError::InvalidParameter { name, value });
            }
        }
        if !(phase_window >= 0.0 && phase_window.is_finite()) {
            return Err(PulseError::InvalidParameter {
                name: "phase_window",
                value: phase_window,
            });
        }
        if !delta.is_finite() {
            return Err(PulseError::InvalidParameter {
                name: "delta",
                value: delta,
            });
        }
        if !drive_detuning.is_finite() {
            return Err(PulseError::InvalidParameter {
                name: "drive_detuning",
                value: drive_detuning,
            });
        }
        let t1 = FRAC_PI_4 / omega1;
        let t2 = t1 + phase_window;
        let t3 = t2 + FRAC_PI_4 / omega2;
        Ok(Self {
            omega1,
            omega2,
            delta,
            phase_window,
            drive_detuning,
            coupling_gate,
            t1,
            t2,
            t3,
        })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Duration `T` of the detuning window.
    pub fn phase_window(&self) -> f64 {
        self.phase_window
    }

    /// Ramsey phase `φ = ΔT`.
    pub fn phase(&self) -> f64 {
        self.delta * self.phase_window
    }

    pub fn drive_detuning(&self) -> f64 {
        self.drive_detuning
    }

    pub fn coupling_gate(&self) -> CouplingGate {
        self.coupling_gate
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn t3(&self) -> f64 {
        self.t3
    }

    /// Stage active at `t` (assumed non-negative).
    pub fn stage_at(&self, t: f64) -> Stage {
        if t < self.t1 {
            Stage::Split
        } else if t < self.t2 {
            Stage::Phase
        } else if t <= self.t3 {
            Stage::Selective
        } else {
            Stage::Idle
        }
    }

    /// Drive values of `stage`, independent of the time within it.
    pub fn stage_amplitudes(&self, stage: Stage) -> Amplitudes {
        let (omega1, omega2, delta) = match stage {
            Stage::Split => (self.omega1, 0.0, 0.0),
            Stage::Phase => (0.0, 0.0, self.delta),
            Stage::Selective => (0.0, self.omega2, 0.0),
            Stage::Idle => (0.0, 0.0, 0.0),
        };
        Amplitudes {
            omega1,
            omega2,
            delta,
        }
    }

    pub fn amplitudes_at(&self, t: f64) -> Result<Amplitudes, PulseError> {
        if t < 0.0 || t.is_nan() {
            return Err(PulseError::NegativeTime(t));
        }
        Ok(self.stage_amplitudes(self.stage_at(t)))
    }

    /// Whether the dispersive coupling is on during `stage`.
    pub fn coupling_on(&self, stage: Stage) -> bool {
        match self.coupling_gate {
            CouplingGate::AlwaysOn => true,
            CouplingGate::Stage3Only => stage == Stage::Selective,
        }
    }

    /// Time spent with the coupling on up to `t`.
    ///
    /// The selective drive carries the phase `e^{-iN₀χ·coupled_time(t)}`, so it
    /// stays locked to the `|e,N₀⟩` amplitude, which picks up `N₀χ` only while
    /// the coupling is on. Under [`CouplingGate::Stage3Only`] this is `t − t2`.
    pub fn coupled_time(&self, t: f64) -> f64 {
        match self.coupling_gate {
            CouplingGate::AlwaysOn => t,
            CouplingGate::Stage3Only => (t - self.t2).clamp(0.0, self.t3 - self.t2),
        }
    }

    /// Checks the selectivity condition `Ω₂ ≪ χ`.
    pub fn validate(&self, chi: f64) -> Result<Vec<PulseWarning>, PulseError> {
        if self.omega2 >= chi {
            return Err(PulseError::SelectivityViolated {
                omega2: self.omega2,
                chi,
            });
        }
        let ratio = self.omega2 / chi;
        let mut warnings = Vec::new();
        if ratio > SELECTIVITY_WARN_RATIO * (1.0 + 1e-12) {
            warnings.push(PulseWarning::WeakSelectivity { ratio });
        }
        Ok(warnings)
    }
}
