//! Simulation of a quantum delayed-choice Ramsey interferometer built from a
//! two-level spin dispersively coupled to a mechanical resonator.
//!
//! The resonator prepared in `cos α|0⟩ + sin α|N₀⟩` controls whether the
//! second (number-selective) Ramsey pulse acts, so the spin ends in a
//! superposition of wave-like and particle-like behaviour. The crate
//! provides
//!
//! - [`hilbert`]: operators and states on the truncated spin ⊗ Fock space,
//! - [`pulses`]: the three-stage piecewise drive schedule,
//! - [`dynamics`]: the rotating-frame Hamiltonian, Lindblad dissipators, a
//!   fixed-step RK4 integrator and an independent unitary oracle,
//! - [`experiment`]: the protocol driver, fringe and morphing sweeps,
//!   visibility and the closed-form predictions.
//!
//! All frequencies and rates are expressed in units of the selective Rabi
//! amplitude `Ω₂`; times in units of `1/Ω₂`.

pub mod dynamics;
pub mod experiment;
pub mod hilbert;
pub mod pulses;

pub use dynamics::{
    evolve, unitary_oracle_evolve, Diagnostics, Drive, DynamicsError, Evolution, IntegratorConfig,
    LindbladModel, Sample,
};
pub use experiment::{
    analytic_pe, analytic_visibility, morphing_sweep, phase_sweep, prepare_initial, ramsey_run,
    selective_rotation_trace, thermal_occupation, visibility, ExperimentConfig, ExperimentError,
    FringeSweep, MorphSurface, Preset, RabiTrace, RunResult,
};
pub use hilbert::{
    expectation, fidelity_pure, min_eigenvalue, partial_trace_fock, trace_distance, DensityMatrix,
    HilbertError, Ket, Operator, OperatorSet, C64,
};
pub use pulses::{Amplitudes, CouplingGate, PulseError, PulseSchedule, PulseWarning, Stage};
