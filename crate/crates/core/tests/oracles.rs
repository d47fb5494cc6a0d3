//! Independent oracles for the integrator and the protocol driver.

use approx::assert_abs_diff_eq;
use num_complex::Complex64 as C64;
use qdc_core::dynamics::propagator;
use qdc_core::experiment::{default_phi_grid, ideal_final_state, linspace};
use qdc_core::*;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

/// `exp(−iHτ)|ψ⟩` for the 2×2 `H = [[0, Ω], [Ω, δ]]`, closed form.
fn two_level(omega: f64, detuning: f64, tau: f64, psi: [C64; 2]) -> [C64; 2] {
    let r = (omega * omega + detuning * detuning / 4.0).sqrt();
    let (c, s) = ((r * tau).cos(), (r * tau).sin());
    let global = C64::from_polar(1.0, -detuning * tau / 2.0);
    let mi = C64::new(0.0, -1.0);
    // H − δ/2 = Ωσ_x − (δ/2)σ_z
    let u00 = c + mi * s * (-detuning / 2.0) / r;
    let u11 = c + mi * s * (detuning / 2.0) / r;
    let u01 = mi * s * omega / r;
    [
        global * (u00 * psi[0] + u01 * psi[1]),
        global * (u01 * psi[0] + u11 * psi[1]),
    ]
}

/// Exact closed-system `P_e` for the gated protocol (coupling on only during
/// the selective pulse). Stage 1 and 2 are exact rotations; during stage 3
/// each Fock branch `n` is a two-level system detuned by `(n − N₀)χ` from the
/// drive in the drive frame.
fn gated_protocol_pe(cfg: &ExperimentConfig) -> f64 {
    let psi_p = [
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(0.0, -FRAC_1_SQRT_2) * C64::from_polar(1.0, -cfg.phi),
    ];
    let tau = FRAC_PI_4 / cfg.omega2;
    let branch = |n: usize| {
        let detuning = (n as f64 - cfg.n0 as f64) * cfg.chi;
        two_level(cfg.omega2, detuning, tau, psi_p)[1].norm_sqr()
    };
    cfg.alpha.cos().powi(2) * branch(0) + cfg.alpha.sin().powi(2) * branch(cfg.n0)
}

fn icfg(dt: f64) -> IntegratorConfig {
    IntegratorConfig {
        dt,
        observer_stride: 10,
        leakage_tol: 1e-4,
    }
}

fn fig4() -> ExperimentConfig {
    ExperimentConfig::preset(Preset::Fig4)
}

#[test]
fn closed_form_two_level_matches_eigen_propagator() {
    // sanity check of the oracle helper against the library propagator
    let m = LindbladModel::new(0.0, 0, Drive::Free, 0.0, 0.0, 0.0, 2).unwrap();
    let mut h = m.ops().proj_e.clone() * C64::from(3.0);
    h += &m.ops().sigma_x * C64::from(1.2);
    let u = propagator(&h, 0.8);
    let psi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let out = two_level(1.2, 3.0, 0.8, psi);
    // |g,0⟩ = 0, |e,0⟩ = 2
    let g = u[(0, 0)] * psi[0] + u[(0, 2)] * psi[1];
    let e = u[(2, 0)] * psi[0] + u[(2, 2)] * psi[1];
    assert_abs_diff_eq!((g - out[0]).norm(), 0.0, epsilon = 1e-13);
    assert_abs_diff_eq!((e - out[1]).norm(), 0.0, epsilon = 1e-13);
}

#[test]
fn gated_protocol_matches_closed_form() {
    let mut worst = 0.0_f64;
    for alpha in linspace(0.0, FRAC_PI_2, 5) {
        for phi in linspace(0.0, 2.0 * PI, 5) {
            let cfg = fig4().with_alpha(alpha).with_phase(phi);
            let run = ramsey_run(&cfg, &IntegratorConfig::default()).unwrap();
            worst = worst.max((run.pe_final - gated_protocol_pe(&cfg)).abs());
        }
    }
    assert!(worst < 1e-6, "worst deviation {worst:e}");
}

#[test]
fn finite_selectivity_offset_of_particle_branch() {
    // Ω₂ = χ/10: the off-resonant drive of |0⟩ shifts the particle fringe by
    // up to ~0.11, well beyond a 0.03 budget around ½.
    let offsets: Vec<f64> = linspace(0.0, 2.0 * PI, 5)
        .into_iter()
        .map(|phi| gated_protocol_pe(&fig4().with_alpha(0.0).with_phase(phi)) - 0.5)
        .collect();
    let worst = offsets.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    assert!((worst - 0.1111).abs() < 1e-3, "offsets {offsets:?}");
    // the wave branch is exactly resonant
    for phi in linspace(0.0, 2.0 * PI, 5) {
        let cfg = fig4().with_phase(phi);
        assert_abs_diff_eq!(
            gated_protocol_pe(&cfg),
            analytic_pe(FRAC_PI_2, phi),
            epsilon = 1e-12
        );
    }
}

#[test]
fn wave_case_follows_analytic_fringe() {
    let run = ramsey_run(&fig4(), &IntegratorConfig::default()).unwrap();
    assert_abs_diff_eq!(run.pe_final, 1.0, epsilon = 0.03);
    let sweep = phase_sweep(&fig4(), &IntegratorConfig::default(), &default_phi_grid()).unwrap();
    assert!(sweep.visibility >= 0.97, "V = {}", sweep.visibility);
}

#[test]
fn particle_case_fringe_contrast() {
    // closed-form expectation for α = 0 on the default grid
    let grid = default_phi_grid();
    let expected: Vec<f64> = grid
        .iter()
        .map(|&phi| gated_protocol_pe(&fig4().with_alpha(0.0).with_phase(phi)))
        .collect();
    let sweep = phase_sweep(&fig4().with_alpha(0.0), &IntegratorConfig::default(), &grid).unwrap();
    for (pe, ex) in sweep.pe.iter().zip(&expected) {
        assert_abs_diff_eq!(*pe, *ex, epsilon = 1e-6);
    }
    assert_abs_diff_eq!(
        sweep.visibility,
        visibility(&expected).unwrap(),
        epsilon = 1e-6
    );
}

#[test]
fn wave_fidelity_against_ideal_state() {
    for gate in [CouplingGate::Stage3Only, CouplingGate::AlwaysOn] {
        let cfg = ExperimentConfig {
            coupling_gate: gate,
            ..fig4()
        }
        .with_phase(FRAC_PI_2);
        let run = ramsey_run(&cfg, &IntegratorConfig::default()).unwrap();
        assert!(run.fidelity_wave >= 0.97, "{gate:?}: {}", run.fidelity_wave);
    }
}

#[test]
fn particle_fidelity_for_resonator_ground_state() {
    let cfg = fig4().with_alpha(0.0).with_phase(1.0);
    let run = ramsey_run(&cfg, &IntegratorConfig::default()).unwrap();
    // overlap of the closed-form particle branch with the ideal particle state
    let ideal = ideal_final_state(&cfg).unwrap();
    assert!(run.fidelity_particle > 0.95 && run.fidelity_particle <= 1.0 + 1e-12);
    assert_abs_diff_eq!(run.fidelity_particle, run.fidelity_wave, epsilon = 1e-9);
    assert_abs_diff_eq!(ideal.norm(), 1.0, epsilon = 1e-12);
}

#[test]
fn resonator_in_ground_state_blocks_second_rotation() {
    // the selective pulse does not act; the spin stays near ½
    for phi in [0.0, FRAC_PI_2, PI] {
        let cfg = fig4().with_alpha(0.0).with_phase(phi);
        let run = ramsey_run(&cfg, &IntegratorConfig::default()).unwrap();
        assert_abs_diff_eq!(run.pe_final, gated_protocol_pe(&cfg), epsilon = 1e-6);
        assert!((run.pe_final - 0.5).abs() < 0.12);
    }
}

#[test]
fn rk4_agrees_with_unitary_oracle() {
    for gate in [CouplingGate::AlwaysOn, CouplingGate::Stage3Only] {
        for (alpha, phi) in [(FRAC_PI_2, FRAC_PI_2), (PI / 4.0, 2.0), (PI / 3.0, 5.5)] {
            let cfg = ExperimentConfig {
                coupling_gate: gate,
                ..fig4()
            }
            .with_alpha(alpha)
            .with_phase(phi);
            let model = cfg.model().unwrap();
            let t3 = cfg.schedule().unwrap().t3();
            let psi0 = experiment::prepare_initial(&cfg).unwrap();
            let rk = evolve(
                &model,
                &psi0.projector(),
                &IntegratorConfig::default(),
                t3,
                |_| {},
            )
            .unwrap();
            let oracle = unitary_oracle_evolve(&model, &psi0, t3, 200).unwrap();
            let d = trace_distance(&rk.final_state, &oracle.projector()).unwrap();
            assert!(
                d <= 1e-6,
                "{gate:?} α={alpha} φ={phi}: trace distance {d:e}"
            );

            let finer = unitary_oracle_evolve(&model, &psi0, t3, 400).unwrap();
            let pe = |k: &Ket| expectation(&model.ops().proj_e, &k.projector()).unwrap();
            assert!((pe(&oracle) - pe(&finer)).abs() < 1e-8);
        }
    }
}

#[test]
fn step_halving_is_converged() {
    let cfg = ExperimentConfig::preset(Preset::Fig5a).with_phase(FRAC_PI_2);
    let coarse = ramsey_run(&cfg, &icfg(5e-4)).unwrap().pe_final;
    let fine = ramsey_run(&cfg, &icfg(2.5e-4)).unwrap().pe_final;
    assert!((coarse - fine).abs() < 1e-6, "{coarse} vs {fine}");
}

#[test]
fn closed_evolution_keeps_purity() {
    let cfg = ExperimentConfig::preset(Preset::Fig5b)
        .closed()
        .with_phase(1.0);
    let model = cfg.model().unwrap();
    let rho0 = experiment::prepare_initial(&cfg).unwrap().projector();
    let mut worst = 0.0_f64;
    evolve(
        &model,
        &rho0,
        &IntegratorConfig::default(),
        cfg.schedule().unwrap().t3(),
        |s| {
            worst = worst.max((s.rho.purity() - 1.0).abs());
        },
    )
    .unwrap();
    assert!(worst < 1e-6, "purity deviation {worst:e}");
}

#[test]
fn pure_dephasing_decay() {
    let gamma = 0.4;
    let m = LindbladModel::new(0.0, 0, Drive::Free, gamma, 0.0, 0.0, 2).unwrap();
    let psi = Ket::tensor(
        [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, -FRAC_1_SQRT_2)],
        &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    )
    .unwrap();
    let mut worst = 0.0_f64;
    evolve(&m, &psi.projector(), &icfg(1e-2), 3.0, |s| {
        let coherence = s.rho.entries()[(0, 2)].norm();
        worst = worst.max((coherence - 0.5 * (-gamma * s.t / 2.0).exp()).abs());
    })
    .unwrap();
    assert!(worst < 1e-7, "{worst:e}");
}

#[test]
fn mechanical_number_decay() {
    let gamma = 0.3;
    let n_start = 3;
    let m = LindbladModel::new(0.0, 0, Drive::Free, 0.0, gamma, 0.0, 6).unwrap();
    let rho0 = Ket::basis(false, n_start, 6).unwrap().projector();
    let number = m.ops().number.clone();
    let mut worst = 0.0_f64;
    evolve(&m, &rho0, &icfg(1e-2), 4.0, |s| {
        let n = expectation(&number, s.rho).unwrap();
        worst = worst.max((n - n_start as f64 * (-gamma * s.t).exp()).abs());
    })
    .unwrap();
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn selective_rotation_examples() {
    let cfg = ExperimentConfig::preset(Preset::Fig3);
    let icfg = IntegratorConfig {
        dt: 1e-3,
        observer_stride: 5,
        leakage_tol: 1e-4,
    };
    let selected = selective_rotation_trace(&cfg, &icfg, 1, FRAC_PI_2).unwrap();
    assert!(selected.max_pe() >= 0.98);
    let unselected = selective_rotation_trace(&cfg, &icfg, 0, FRAC_PI_2).unwrap();
    assert!(unselected.max_pe() <= 0.04);
    let half = selective_rotation_trace(&cfg, &icfg, 1, FRAC_PI_4).unwrap();
    assert_abs_diff_eq!(half.samples.last().unwrap().1, 0.5, epsilon = 0.01);

    // detuned Rabi: peak 4Ω²/(4Ω²+χ²) = 1/26 is reached within one period
    let long = selective_rotation_trace(&cfg, &icfg, 0, 2.0 * PI / 104f64.sqrt()).unwrap();
    assert_abs_diff_eq!(long.max_pe(), 1.0 / 26.0, epsilon = 1e-4);
    assert!(selective_rotation_trace(&cfg, &icfg, 8, 1.0).is_err());
}

#[test]
fn fringe_is_periodic_in_phase() {
    let cfg = fig4().with_alpha(PI / 3.0);
    for phi in [0.3, 1.7, 4.0] {
        let a = ramsey_run(&cfg.with_phase(phi), &IntegratorConfig::default())
            .unwrap()
            .pe_final;
        let b = ramsey_run(
            &cfg.with_phase(phi + 2.0 * PI),
            &IntegratorConfig::default(),
        )
        .unwrap()
        .pe_final;
        assert!((a - b).abs() <= 1e-3, "φ={phi}: {a} vs {b}");
    }
}

#[test]
fn visibility_grows_with_alpha() {
    let surface = morphing_sweep(
        &fig4(),
        &IntegratorConfig::default(),
        &linspace(0.0, FRAC_PI_2, 5),
        &linspace(0.0, 2.0 * PI, 9),
    )
    .unwrap();
    assert_eq!(surface.pe_matrix.len(), 5);
    assert!(surface.pe_matrix.iter().all(|row| row.len() == 9));
    assert!(surface
        .visibility_per_alpha
        .windows(2)
        .all(|w| w[1] >= w[0]));
    assert!(surface.diagnostics.within(1e-4));
}
