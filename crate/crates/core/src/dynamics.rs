//! Rotating-frame Hamiltonian, Lindblad dissipators and time integration.
//!
//! The generator is written in the frame rotating at ω₀ for the spin and ω_m
//! for the resonator, so neither carrier frequency appears. In that frame
//!
//! ```text
//! H(t) = δ(t)|e⟩⟨e| + g(t)χ a†a|e⟩⟨e| + Ω₁(t)σ_x
//!      + Ω₂(t)(e^{-iθ(t)}σ₊ + e^{iθ(t)}σ₋),   θ(t) = N₀χ·τ_c(t)
//! ```
//!
//! where `g(t)` is the coupling gate and `τ_c(t)` the time spent with the
//! coupling on (see [`PulseSchedule::coupled_time`]). The master equation is
//!
//! ```text
//! dρ/dt = −i[H,ρ] + γ_s D[|e⟩⟨e|]ρ + n_th γ_m D[a†]ρ + (n_th+1) γ_m D[a]ρ
//! ```
//!
//! integrated with fixed-step classic RK4. Trace is never renormalized.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{
    min_eigenvalue, DensityMatrix, HilbertError, Ket, Operator, OperatorSet, C64,
};
use crate::pulses::{PulseSchedule, Stage};

/// Largest tolerated `|Tr ρ − 1|` before integration is aborted.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid model parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("truncation leakage at t = {t}: top Fock level population {population:e} exceeds {tolerance:e}")]
    Leakage {
        t: f64,
        population: f64,
        tolerance: f64,
    },
    #[error("trace drift {drift:e} at t = {t}: reduce the step size")]
    TraceDrift { t: f64, drift: f64 },
    #[error("step size dt = {dt} exceeds the stability bound {bound}")]
    StepSize { dt: f64, bound: f64 },
    #[error("unitary oracle requires all decoherence rates to be zero")]
    OracleMisuse,
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Coherent drive applied on top of the dispersive Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub enum Drive {
    /// The three-stage Ramsey protocol.
    Ramsey(PulseSchedule),
    /// Continuous drive of amplitude `omega` resonant with `|g,N₀⟩ ↔ |e,N₀⟩`,
    /// coupling always on.
    Selective { omega: f64 },
    /// No drive; only the dispersive term.
    Free,
}

/// Parameters of the open-system model.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    chi: f64,
    n0: usize,
    drive: Drive,
    gamma_s: f64,
    gamma_m: f64,
    n_th: f64,
    ops: OperatorSet,
    jumps: Vec<Triplets>,
    /// ½ Σ L†L
    decay: Operator,
}

/// Nonzero entries of an operator. The generator is applied through these so
/// each product costs `nnz·d` rather than `d³`.
#[derive(Debug, Clone)]
struct Triplets(Vec<(usize, usize, C64)>);

impl Triplets {
    fn from_dense(m: &Operator) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    entries.push((i, j, v));
                }
            }
        }
        Self(entries)
    }

    /// `out += A·ρ`
    fn left_mul_add(&self, rho: &Operator, out: &mut Operator) {
        for &(i, j, a) in &self.0 {
            for c in 0..rho.ncols() {
                out[(i, c)] += a * rho[(j, c)];
            }
        }
    }

    /// `out += ρ·A†`
    fn right_mul_adjoint_add(&self, rho: &Operator, out: &mut Operator) {
        for &(i, j, a) in &self.0 {
            let a = a.conj();
            for r in 0..rho.nrows() {
                out[(r, i)] += rho[(r, j)] * a;
            }
        }
    }

    /// `out += A·ρ·A†`
    fn sandwich_add(&self, rho: &Operator, out: &mut Operator) {
        for &(i, j, a) in &self.0 {
            for &(k, l, b) in &self.0 {
                out[(i, k)] += a * rho[(j, l)] * b.conj();
            }
        }
    }
}

impl LindbladModel {
    pub fn new(
        chi: f64,
        n0: usize,
        drive: Drive,
        gamma_s: f64,
        gamma_m: f64,
        n_th: f64,
        n_max: usize,
    ) -> Result<Self, DynamicsError> {
        let ops = OperatorSet::new(n_max)?;
        for (name, value) in [
            ("chi", chi),
            ("gamma_s", gamma_s),
            ("gamma_m", gamma_m),
            ("n_th", n_th),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(DynamicsError::InvalidParameter { name, value });
            }
        }
        if n0 >= n_max {
            return Err(HilbertError::DimensionMismatch {
                expected: n_max,
                found: n0 + 1,
            }
            .into());
        }
        if let Drive::Selective { omega } = drive {
            if !omega.is_finite() {
                return Err(DynamicsError::InvalidParameter {
                    name: "omega",
                    value: omega,
                });
            }
        }

        let mut dense_jumps = Vec::new();
        let channels = [
            (gamma_s, &ops.proj_e),
            ((n_th + 1.0) * gamma_m, &ops.a),
            (n_th * gamma_m, &ops.a_dag),
        ];
        for (rate, op) in channels {
            if rate > 0.0 {
                dense_jumps.push(op * C64::from(rate.sqrt()));
            }
        }
        let d = ops.dim();
        let decay = dense_jumps
            .iter()
            .fold(Operator::zeros(d, d), |acc, l| acc + l.adjoint() * l)
            * C64::from(0.5);
        let jumps = dense_jumps.iter().map(Triplets::from_dense).collect();

        Ok(Self {
            chi,
            n0,
            drive,
            gamma_s,
            gamma_m,
            n_th,
            ops,
            jumps,
            decay,
        })
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn gamma_m(&self) -> f64 {
        self.gamma_m
    }

    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    pub fn ops(&self) -> &OperatorSet {
        &self.ops
    }

    pub fn n_max(&self) -> usize {
        self.ops.n_max
    }

    pub fn is_closed(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Detuning of the selective drive from ω₀; equals the dispersive shift
    /// `N₀χ` of the selected transition.
    pub fn drive_detuning(&self) -> f64 {
        match &self.drive {
            Drive::Ramsey(s) => s.drive_detuning(),
            Drive::Selective { .. } | Drive::Free => self.n0 as f64 * self.chi,
        }
    }

    /// End of the protocol, if the drive has one.
    pub fn protocol_end(&self) -> Option<f64> {
        match &self.drive {
            Drive::Ramsey(s) => Some(s.t3()),
            _ => None,
        }
    }

    /// Phase `θ(t)` of the selective drive, `σ₊` carrying `e^{-iθ}`.
    pub fn drive_phase(&self, t: f64) -> f64 {
        match &self.drive {
            Drive::Ramsey(s) => s.drive_detuning() * s.coupled_time(t),
            Drive::Selective { .. } | Drive::Free => self.drive_detuning() * t,
        }
    }

    fn stage_at(&self, t: f64) -> Stage {
        match &self.drive {
            Drive::Ramsey(s) => s.stage_at(t),
            Drive::Selective { .. } => Stage::Selective,
            Drive::Free => Stage::Idle,
        }
    }

    /// Hamiltonian at `t`, with the stage taken as given. The integrators use
    /// this so that evaluations at a stage's right edge stay in that stage.
    pub fn hamiltonian_in_stage(&self, stage: Stage, t: f64) -> Operator {
        let ops = &self.ops;
        let (omega1, omega2, delta, coupled) = match &self.drive {
            Drive::Ramsey(s) => {
                let a = s.stage_amplitudes(stage);
                (a.omega1, a.omega2, a.delta, s.coupling_on(stage))
            }
            Drive::Selective { omega } => (0.0, *omega, 0.0, true),
            Drive::Free => (0.0, 0.0, 0.0, true),
        };
        let mut h = Operator::zeros(ops.dim(), ops.dim());
        if delta != 0.0 {
            h += &ops.proj_e * C64::from(delta);
        }
        if coupled && self.chi != 0.0 {
            h += &ops.dispersive * C64::from(self.chi);
        }
        if omega1 != 0.0 {
            h += &ops.sigma_x * C64::from(omega1);
        }
        if omega2 != 0.0 {
            let phase = Complex64::from_polar(omega2, -self.drive_phase(t));
            h += &ops.sigma_plus * phase + &ops.sigma_minus * phase.conj();
        }
        h
    }

    /// Hamiltonian at `t` using the schedule's stage boundaries.
    pub fn build_hamiltonian(&self, t: f64) -> Operator {
        self.hamiltonian_in_stage(self.stage_at(t), t)
    }

    fn rhs_with(&self, h: &Operator, rho: &Operator) -> Operator {
        // dρ = Gρ + ρG† + Σ LρL†,  G = −iH − ½ΣL†L
        let g = Triplets::from_dense(&(h * Complex64::new(0.0, -1.0) - &self.decay));
        let d = rho.nrows();
        let mut out = Operator::zeros(d, d);
        g.left_mul_add(rho, &mut out);
        g.right_mul_adjoint_add(rho, &mut out);
        for l in &self.jumps {
            l.sandwich_add(rho, &mut out);
        }
        out
    }

    /// `dρ/dt` at time `t`.
    pub fn lindblad_rhs(&self, rho: &DensityMatrix, t: f64) -> Operator {
        self.rhs_with(&self.build_hamiltonian(t), rho.entries())
    }

    /// Piecewise-smooth segments covering `[0, t_end]`.
    fn segments(&self, t_end: f64) -> Vec<(f64, f64, Stage)> {
        let edges = match &self.drive {
            Drive::Ramsey(s) => vec![
                (0.0, s.t1(), Stage::Split),
                (s.t1(), s.t2(), Stage::Phase),
                (s.t2(), s.t3(), Stage::Selective),
                (s.t3(), f64::INFINITY, Stage::Idle),
            ],
            _ => vec![(0.0, f64::INFINITY, self.stage_at(0.0))],
        };
        edges
            .into_iter()
            .filter_map(|(a, b, stage)| {
                let b = b.min(t_end);
                (b > a).then_some((a, b, stage))
            })
            .collect()
    }

    /// Upper bound on the step size: a twentieth of the shortest time scale.
    pub fn max_step(&self) -> f64 {
        let mut rates = vec![self.chi, self.drive_detuning()];
        match &self.drive {
            Drive::Ramsey(s) => rates.extend([s.omega1(), s.omega2(), s.delta().abs()]),
            Drive::Selective { omega } => rates.push(omega.abs()),
            Drive::Free => {}
        }
        let fastest = rates.into_iter().fold(0.0_f64, f64::max);
        if fastest > 0.0 {
            1.0 / (20.0 * fastest)
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Nominal step; each stage uses the largest step ≤ `dt` that divides it.
    pub dt: f64,
    /// Steps between observer samples.
    pub observer_stride: usize,
    /// Bound on the top-Fock-level population.
    pub leakage_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 5e-4,
            observer_stride: 10,
            leakage_tol: 1e-4,
        }
    }
}

/// Worst-case state diagnostics over all samples of a run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub max_leakage: f64,
    pub samples: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            max_trace_drift: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_leakage: 0.0,
            samples: 0,
        }
    }
}

impl Diagnostics {
    pub fn record(&mut self, rho: &DensityMatrix) {
        let tr = rho.trace();
        self.max_trace_drift = self.max_trace_drift.max((tr - 1.0).norm());
        self.max_hermiticity_error = self.max_hermiticity_error.max(rho.hermiticity_error());
        self.min_eigenvalue = self.min_eigenvalue.min(min_eigenvalue(rho));
        self.max_leakage = self.max_leakage.max(rho.top_fock_population());
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &Diagnostics) {
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
        self.max_leakage = self.max_leakage.max(other.max_leakage);
        self.samples += other.samples;
    }

    /// Trace, Hermiticity and positivity within the density-matrix
    /// tolerances, and leakage below `leakage_tol`.
    pub fn within(&self, leakage_tol: f64) -> bool {
        use crate::hilbert::{HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL};
        self.max_trace_drift <= TRACE_TOL
            && self.max_hermiticity_error <= HERMITICITY_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
            && self.max_leakage <= leakage_tol
    }
}

/// State handed to the observer.
pub struct Sample<'a> {
    pub t: f64,
    pub rho: &'a DensityMatrix,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_state: DensityMatrix,
    pub diagnostics: Diagnostics,
}

/// Integrates the master equation from `rho0` over `[0, t_end]`.
///
/// The observer sees the initial state, every `observer_stride`-th step and
/// the final state. Every sample is checked for trace drift and truncation
/// leakage.
pub fn evolve<F>(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    icfg: &IntegratorConfig,
    t_end: f64,
    mut observer: F,
) -> Result<Evolution, DynamicsError>
where
    F: FnMut(&Sample<'_>),
{
    if rho0.dim() != model.ops.dim() {
        return Err(HilbertError::DimensionMismatch {
            expected: model.ops.dim(),
            found: rho0.dim(),
        }
        .into());
    }
    let bound = model.max_step();
    if !(icfg.dt > 0.0) || icfg.dt > bound {
        return Err(DynamicsError::StepSize { dt: icfg.dt, bound });
    }
    if !(t_end >= 0.0) {
        return Err(DynamicsError::InvalidParameter {
            name: "t_end",
            value: t_end,
        });
    }
    let stride = icfg.observer_stride.max(1);
    let n_max = model.n_max();

    let mut diagnostics = Diagnostics::default();
    let mut sample = |t: f64, rho: &DensityMatrix, diagnostics: &mut Diagnostics| {
        diagnostics.record(rho);
        let drift = (rho.trace() - 1.0).norm();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(DynamicsError::TraceDrift { t, drift });
        }
        let population = rho.top_fock_population();
        if population > icfg.leakage_tol {
            return Err(DynamicsError::Leakage {
                t,
                population,
                tolerance: icfg.leakage_tol,
            });
        }
        observer(&Sample { t, rho });
        Ok(())
    };

    let mut state = rho0.clone();
    sample(0.0, &state, &mut diagnostics)?;
    let mut rho = state.into_entries();
    let mut t = 0.0;
    let mut step = 0usize;

    let segments = model.segments(t_end);
    let last_segment = segments.len().saturating_sub(1);
    for (k, &(start, end, stage)) in segments.iter().enumerate() {
        let n = ((end - start) / icfg.dt - 1e-9).ceil().max(1.0) as usize;
        let h = (end - start) / n as f64;
        let half = C64::from(h / 2.0);
        let full = C64::from(h);
        let sixth = C64::from(h / 6.0);
        for i in 0..n {
            let t0 = start + i as f64 * h;
            let h0 = model.hamiltonian_in_stage(stage, t0);
            let hm = model.hamiltonian_in_stage(stage, t0 + h / 2.0);
            let h1 = model.hamiltonian_in_stage(stage, t0 + h);
            let k1 = model.rhs_with(&h0, &rho);
            let k2 = model.rhs_with(&hm, &(&rho + &k1 * half));
            let k3 = model.rhs_with(&hm, &(&rho + &k2 * half));
            let k4 = model.rhs_with(&h1, &(&rho + &k3 * full));
            rho += (k1 + (k2 + k3) * C64::from(2.0) + k4) * sixth;

            step += 1;
            t = if i + 1 == n { end } else { t0 + h };
            let is_last = k == last_segment && i + 1 == n;
            if step.is_multiple_of(stride) || is_last {
                let current = DensityMatrix::from_entries_unchecked(rho, n_max)?;
                sample(t, &current, &mut diagnostics)?;
                rho = current.into_entries();
            }
        }
    }
    let _ = t;
    state = DensityMatrix::from_entries_unchecked(rho, n_max)?;
    Ok(Evolution {
        final_state: state,
        diagnostics,
    })
}

/// `exp(−iHt)` for Hermitian `H`, through its eigendecomposition.
pub fn propagator(h: &Operator, t: f64) -> Operator {
    let eig = SymmetricEigen::new((h + h.adjoint()) * C64::from(0.5));
    let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * t));
    let v = &eig.eigenvectors;
    v * Operator::from_diagonal(&phases) * v.adjoint()
}

/// Closed-system cross-check of [`evolve`]: a product of exact exponentials
/// of `H` sampled at the midpoint of `n_substeps` uniform slices per stage.
///
/// The selective stage is exponentiated in the frame co-rotating with its
/// drive phase, `V(t) = exp(iθ(t)|e⟩⟨e|)`, where its Hamiltonian
/// `V H V† − θ'|e⟩⟨e|` is constant; every other stage is already constant.
pub fn unitary_oracle_evolve(
    model: &LindbladModel,
    psi0: &Ket,
    t_end: f64,
    n_substeps: usize,
) -> Result<Ket, DynamicsError> {
    if !model.is_closed() {
        return Err(DynamicsError::OracleMisuse);
    }
    if psi0.dim() != model.ops.dim() {
        return Err(HilbertError::DimensionMismatch {
            expected: model.ops.dim(),
            found: psi0.dim(),
        }
        .into());
    }
    let n = n_substeps.max(1);
    let n_max = model.n_max();
    let rate = model.drive_detuning();
    // V(t) as a diagonal: phase e^{iθ} on every |e,n⟩
    let frame = |t: f64| {
        let phase = Complex64::from_polar(1.0, model.drive_phase(t));
        nalgebra::DVector::from_fn(2 * n_max, |i, _| {
            if i >= n_max {
                phase
            } else {
                C64::new(1.0, 0.0)
            }
        })
    };
    let mut psi = psi0.amplitudes().clone();
    for (start, end, stage) in model.segments(t_end) {
        let h = (end - start) / n as f64;
        let rotating = stage == Stage::Selective && rate != 0.0;
        let mut cached: Option<Operator> = None;
        for i in 0..n {
            let ta = start + i as f64 * h;
            let tm = ta + 0.5 * h;
            let u = match &cached {
                Some(u) => u.clone(),
                None => {
                    let mut hm = model.hamiltonian_in_stage(stage, tm);
                    if rotating {
                        let v = frame(tm);
                        hm = Operator::from_fn(hm.nrows(), hm.ncols(), |r, c| {
                            v[r] * hm[(r, c)] * v[c].conj()
                        });
                        hm -= &model.ops.proj_e * C64::from(rate);
                    }
                    let u = propagator(&hm, h);
                    // constant in the chosen frame
                    cached = Some(u.clone());
                    u
                }
            };
            if rotating {
                psi.component_mul_assign(&frame(ta));
                psi = u * psi;
                psi.component_mul_assign(&frame(ta + h).map(|z| z.conj()));
            } else {
                psi = u * psi;
            }
        }
    }
    Ok(Ket::from_amplitudes(psi, n_max)?)
}
