//! States and operators on the truncated joint space `spin ⊗ Fock`.
//!
//! Basis ordering puts the spin index outermost:
//! `|g,0⟩, |g,1⟩, …, |g,n_max−1⟩, |e,0⟩, …, |e,n_max−1⟩`, so the joint index
//! of `|s,n⟩` is `s·n_max + n` with `s = 0` for `|g⟩` and `s = 1` for `|e⟩`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Dense complex matrix acting on the joint space.
pub type Operator = DMatrix<C64>;

/// Tolerance on the norm of factors handed to [`Ket::tensor`].
pub const NORM_TOL: f64 = 1e-9;
/// Trace tolerance for a valid [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-8;
/// Largest tolerated `|ρ − ρ†|` entry.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Most negative tolerated eigenvalue.
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("invalid Fock truncation n_max = {0}: need at least 2 levels")]
    InvalidDimension(usize),
    #[error("{what} is not normalized: norm = {norm}")]
    NotNormalized { what: &'static str, norm: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("observable is not Hermitian (imaginary expectation {imag:e})")]
    NonHermitianObservable { imag: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Pure state of the joint system (or of the bare spin when `dim_fock == 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: DVector<C64>,
    dim_fock: usize,
}

impl Ket {
    /// Kronecker product `spin ⊗ fock`; both factors must be normalized.
    pub fn tensor(spin: [C64; 2], fock: &[C64]) -> Result<Self, HilbertError> {
        if fock.is_empty() {
            return Err(HilbertError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let spin_norm = (spin[0].norm_sqr() + spin[1].norm_sqr()).sqrt();
        if (spin_norm - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::NotNormalized {
                what: "spin factor",
                norm: spin_norm,
            });
        }
        let fock_norm = fock.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (fock_norm - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::NotNormalized {
                what: "Fock factor",
                norm: fock_norm,
            });
        }
        let n = fock.len();
        let amplitudes = DVector::from_fn(2 * n, |i, _| spin[i / n] * fock[i % n]);
        Ok(Self {
            amplitudes,
            dim_fock: n,
        })
    }

    /// Basis state `|g,n⟩` (or `|e,n⟩` when `excited`).
    pub fn basis(excited: bool, n: usize, n_max: usize) -> Result<Self, HilbertError> {
        if n >= n_max {
            return Err(HilbertError::DimensionMismatch {
                expected: n_max,
                found: n + 1,
            });
        }
        let mut amplitudes = DVector::from_element(2 * n_max, ZERO);
        amplitudes[usize::from(excited) * n_max + n] = ONE;
        Ok(Self {
            amplitudes,
            dim_fock: n_max,
        })
    }

    /// Bare spin state `g|g⟩ + e|e⟩`.
    pub fn spin(g: C64, e: C64) -> Result<Self, HilbertError> {
        Self::tensor([g, e], &[ONE])
    }

    /// Wraps raw amplitudes, renormalizing them. Fails on a zero vector.
    pub fn from_amplitudes(
        amplitudes: DVector<C64>,
        dim_fock: usize,
    ) -> Result<Self, HilbertError> {
        if amplitudes.len() != 2 * dim_fock {
            return Err(HilbertError::DimensionMismatch {
                expected: 2 * dim_fock,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HilbertError::NotNormalized { what: "ket", norm });
        }
        Ok(Self {
            amplitudes: amplitudes / C64::from(norm),
            dim_fock,
        })
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dim_fock(&self) -> usize {
        self.dim_fock
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Amplitude of `|s,n⟩`.
    pub fn amplitude(&self, excited: bool, n: usize) -> C64 {
        self.amplitudes[usize::from(excited) * self.dim_fock + n]
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            entries: &self.amplitudes * self.amplitudes.adjoint(),
            dim_fock: self.dim_fock,
        }
    }
}

/// Mixed state of the joint system (or of the bare spin when `dim_fock == 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: Operator,
    dim_fock: usize,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity before accepting `entries`.
    pub fn from_entries(entries: Operator, dim_fock: usize) -> Result<Self, HilbertError> {
        let rho = Self::from_entries_unchecked(entries, dim_fock)?;
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(HilbertError::InvalidState(format!("trace = {tr}")));
        }
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(HilbertError::InvalidState(format!("|ρ − ρ†| = {herm:e}")));
        }
        let min = min_eigenvalue(&rho);
        if min < -POSITIVITY_TOL {
            return Err(HilbertError::InvalidState(format!(
                "min eigenvalue = {min:e}"
            )));
        }
        Ok(rho)
    }

    /// Only checks the shape. Used for intermediate integrator states whose
    /// physical validity is monitored separately.
    pub fn from_entries_unchecked(
        entries: Operator,
        dim_fock: usize,
    ) -> Result<Self, HilbertError> {
        let d = 2 * dim_fock;
        if entries.nrows() != d || entries.ncols() != d {
            return Err(HilbertError::DimensionMismatch {
                expected: d,
                found: entries.nrows(),
            });
        }
        Ok(Self { entries, dim_fock })
    }

    pub fn maximally_mixed(dim_fock: usize) -> Self {
        let d = 2 * dim_fock;
        Self {
            entries: Operator::identity(d, d) * C64::from(1.0 / d as f64),
            dim_fock,
        }
    }

    pub fn entries(&self) -> &Operator {
        &self.entries
    }

    pub fn into_entries(self) -> Operator {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn dim_fock(&self) -> usize {
        self.dim_fock
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ ρ_ij ρ_ji
        self.entries
            .iter()
            .zip(self.entries.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    /// `⟨s,n|ρ|s,n⟩`
    pub fn population(&self, excited: bool, n: usize) -> f64 {
        let i = usize::from(excited) * self.dim_fock + n;
        self.entries[(i, i)].re
    }

    /// Total population of the highest retained Fock level, summed over both
    /// spin branches. Values above ~1e-4 signal truncation leakage.
    pub fn top_fock_population(&self) -> f64 {
        let top = self.dim_fock - 1;
        self.population(false, top) + self.population(true, top)
    }

    /// Population of `|e⟩` read off the diagonal.
    pub fn excited_population(&self) -> f64 {
        (0..self.dim_fock).map(|n| self.population(true, n)).sum()
    }
}

/// The standard operator set on `2 ⊗ n_max` dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSet {
    pub n_max: usize,
    /// Mechanical destruction operator `I ⊗ a`.
    pub a: Operator,
    pub a_dag: Operator,
    /// `I ⊗ a†a`
    pub number: Operator,
    /// `|e⟩⟨e| ⊗ I`
    pub proj_e: Operator,
    /// `|g⟩⟨g| ⊗ I`
    pub proj_g: Operator,
    /// `(|e⟩⟨g| + |g⟩⟨e|) ⊗ I`
    pub sigma_x: Operator,
    /// `|e⟩⟨g| ⊗ I`
    pub sigma_plus: Operator,
    /// `|g⟩⟨e| ⊗ I`
    pub sigma_minus: Operator,
    /// `|e⟩⟨e| ⊗ a†a`, the dispersive coupling operator.
    pub dispersive: Operator,
    pub identity: Operator,
}

impl OperatorSet {
    pub fn new(n_max: usize) -> Result<Self, HilbertError> {
        if n_max < 2 {
            return Err(HilbertError::InvalidDimension(n_max));
        }
        let d = 2 * n_max;
        let fock_a = DMatrix::from_fn(n_max, n_max, |i, j| {
            if j == i + 1 {
                C64::from((j as f64).sqrt())
            } else {
                ZERO
            }
        });
        let fock_id = DMatrix::<C64>::identity(n_max, n_max);
        let spin = |m: [[f64; 2]; 2]| DMatrix::from_fn(2, 2, |i, j| C64::from(m[i][j]));
        // rows/cols: 0 = g, 1 = e
        let s_id = spin([[1.0, 0.0], [0.0, 1.0]]);
        let s_e = spin([[0.0, 0.0], [0.0, 1.0]]);
        let s_g = spin([[1.0, 0.0], [0.0, 0.0]]);
        let s_plus = spin([[0.0, 0.0], [1.0, 0.0]]);
        let s_minus = spin([[0.0, 1.0], [0.0, 0.0]]);
        let s_x = spin([[0.0, 1.0], [1.0, 0.0]]);

        let fock_n = fock_a.adjoint() * &fock_a;
        let a = s_id.kronecker(&fock_a);
        Ok(Self {
            n_max,
            a_dag: a.adjoint(),
            a,
            number: s_id.kronecker(&fock_n),
            proj_e: s_e.kronecker(&fock_id),
            proj_g: s_g.kronecker(&fock_id),
            sigma_x: s_x.kronecker(&fock_id),
            sigma_plus: s_plus.kronecker(&fock_id),
            sigma_minus: s_minus.kronecker(&fock_id),
            dispersive: s_e.kronecker(&fock_n),
            identity: Operator::identity(d, d),
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n_max
    }
}

/// `Tr(op·ρ)` for a Hermitian observable.
pub fn expectation(op: &Operator, rho: &DensityMatrix) -> Result<f64, HilbertError> {
    if op.nrows() != rho.dim() || op.ncols() != rho.dim() {
        return Err(HilbertError::DimensionMismatch {
            expected: rho.dim(),
            found: op.nrows(),
        });
    }
    let herm = (op - op.adjoint())
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.norm()));
    if herm > HERMITICITY_TOL {
        return Err(HilbertError::NonHermitianObservable { imag: herm });
    }
    // Tr(AB) = Σ_ij A_ij B_ji
    let tr: C64 = op
        .iter()
        .zip(rho.entries().transpose().iter())
        .map(|(a, b)| a * b)
        .sum();
    if tr.im.abs() > 1e-8 {
        return Err(HilbertError::NonHermitianObservable { imag: tr.im });
    }
    Ok(tr.re)
}

/// `⟨ψ|ρ|ψ⟩`
pub fn fidelity_pure(rho: &DensityMatrix, psi: &Ket) -> Result<f64, HilbertError> {
    if psi.dim() != rho.dim() {
        return Err(HilbertError::DimensionMismatch {
            expected: rho.dim(),
            found: psi.dim(),
        });
    }
    let v = psi.amplitudes();
    Ok(v.dotc(&(rho.entries() * v)).re)
}

/// Reduced spin state `Tr_fock ρ` as a 2×2 density matrix.
pub fn partial_trace_fock(rho: &DensityMatrix) -> DensityMatrix {
    let n = rho.dim_fock();
    let m = rho.entries();
    let entries = DMatrix::from_fn(2, 2, |s, t| (0..n).map(|k| m[(s * n + k, t * n + k)]).sum());
    DensityMatrix {
        entries,
        dim_fock: 1,
    }
}

/// Smallest eigenvalue of the Hermitian part `(ρ + ρ†)/2`.
pub fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    hermitian_eigenvalues(rho.entries())
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `½ Σ |λ_i(ρ − σ)|`
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, HilbertError> {
    if rho.dim() != sigma.dim() {
        return Err(HilbertError::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let diff = rho.entries() - sigma.entries();
    Ok(0.5
        * hermitian_eigenvalues(&diff)
            .iter()
            .map(|l| l.abs())
            .sum::<f64>())
}

fn hermitian_eigenvalues(m: &Operator) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::from(0.5);
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ladder_entries() {
        let ops = OperatorSet::new(2).unwrap();
        assert_abs_diff_eq!(ops.number[(1, 1)].re, 1.0, epsilon = 1e-15);

        let ops = OperatorSet::new(8).unwrap();
        assert_abs_diff_eq!(ops.a[(3, 4)].re, 2.0, epsilon = 1e-15);
        // same entry in the |e⟩ block
        assert_abs_diff_eq!(ops.a[(8 + 3, 8 + 4)].re, 2.0, epsilon = 1e-15);
        assert_eq!(ops.a.column(0).iter().filter(|z| z.norm() > 0.0).count(), 0);
        assert_abs_diff_eq!(ops.number[(7, 7)].re, 7.0, epsilon = 1e-14);
    }

    #[test]
    fn projectors_are_orthogonal_and_complete() {
        let ops = OperatorSet::new(8).unwrap();
        assert!((&ops.proj_e * &ops.proj_g).iter().all(|z| z.norm() == 0.0));
        assert_eq!(&ops.proj_e + &ops.proj_g, ops.identity);
        assert_eq!(&ops.sigma_plus + &ops.sigma_minus, ops.sigma_x);
        assert_eq!(&ops.proj_e * &ops.number, ops.dispersive);
    }

    #[test]
    fn commutator_on_untruncated_block() {
        let n_max = 8;
        let ops = OperatorSet::new(n_max).unwrap();
        let comm = &ops.a * &ops.a_dag - &ops.a_dag * &ops.a;
        for m in 0..n_max - 1 {
            assert_abs_diff_eq!(comm[(m, m)].re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(comm[(n_max + m, n_max + m)].re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn too_small_truncation_is_rejected() {
        assert_eq!(OperatorSet::new(1), Err(HilbertError::InvalidDimension(1)));
        assert_eq!(OperatorSet::new(0), Err(HilbertError::InvalidDimension(0)));
    }

    #[test]
    fn tensor_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k = Ket::tensor([c(1.0, 0.0), ZERO], &[c(1.0, 0.0), ZERO, ZERO]).unwrap();
        assert_eq!(k.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert_eq!(k.amplitude(false, 0), c(1.0, 0.0));

        let k = Ket::tensor([c(1.0, 0.0), ZERO], &[c(h, 0.0), c(h, 0.0)]).unwrap();
        assert_abs_diff_eq!(k.amplitude(false, 0).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(k.amplitude(false, 1).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(k.norm(), 1.0, epsilon = 1e-12);

        let k = Ket::tensor([c(h, 0.0), c(0.0, h)], &[ZERO, c(1.0, 0.0), ZERO]).unwrap();
        assert_abs_diff_eq!(k.amplitude(false, 1).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(k.amplitude(true, 1).im, h, epsilon = 1e-15);
        assert_eq!(k.amplitude(true, 0), ZERO);
    }

    #[test]
    fn tensor_rejects_unnormalized_factors() {
        let err = Ket::tensor([c(1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(
            err,
            HilbertError::NotNormalized {
                what: "spin factor",
                ..
            }
        ));
        let err = Ket::tensor([c(1.0, 0.0), ZERO], &[c(0.5, 0.0), ZERO]).unwrap_err();
        assert!(matches!(
            err,
            HilbertError::NotNormalized {
                what: "Fock factor",
                ..
            }
        ));
    }

    #[test]
    fn expectation_examples() {
        let ops = OperatorSet::new(4).unwrap();
        let g0 = Ket::basis(false, 0, 4).unwrap().projector();
        assert_abs_diff_eq!(expectation(&ops.proj_e, &g0).unwrap(), 0.0);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi_p = Ket::tensor([c(h, 0.0), c(0.0, -h)], &[c(1.0, 0.0), ZERO, ZERO, ZERO]).unwrap();
        assert_abs_diff_eq!(
            expectation(&ops.proj_e, &psi_p.projector()).unwrap(),
            0.5,
            epsilon = 1e-15
        );

        let g1 = Ket::basis(false, 1, 4).unwrap().projector();
        assert_abs_diff_eq!(expectation(&ops.number, &g1).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let ops = OperatorSet::new(3).unwrap();
        let rho = DensityMatrix::maximally_mixed(3);
        let sp = ops.sigma_plus.clone() * c(0.0, 1.0);
        assert!(matches!(
            expectation(&sp, &rho),
            Err(HilbertError::NonHermitianObservable { .. })
        ));
        assert!(matches!(
            expectation(&OperatorSet::new(2).unwrap().number, &rho),
            Err(HilbertError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let psi = Ket::tensor([c(0.6, 0.0), c(0.0, 0.8)], &[c(0.0, 1.0), ZERO]).unwrap();
        assert_abs_diff_eq!(
            fidelity_pure(&psi.projector(), &psi).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(fidelity_pure(&mixed, &psi).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let g1 = Ket::basis(false, 1, 3).unwrap().projector();
        let spin = partial_trace_fock(&g1);
        assert_eq!(spin.dim(), 2);
        assert_abs_diff_eq!(spin.population(false, 0), 1.0);
        assert_abs_diff_eq!(spin.entries()[(1, 1)].norm(), 0.0);
        assert_abs_diff_eq!(spin.entries()[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn partial_trace_of_branch_superposition() {
        // cos α |ψ_p⟩|0⟩ + sin α |ψ_w⟩|N₀⟩ with α = π/4, N₀ = 2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi_p = [c(h, 0.0), c(0.0, -h)];
        let psi_w = [c(0.6, 0.0), c(0.0, 0.8)];
        let mut amps = DVector::from_element(8, ZERO);
        for s in 0..2 {
            amps[s * 4] = psi_p[s] * h;
            amps[s * 4 + 2] = psi_w[s] * h;
        }
        let psi = Ket::from_amplitudes(amps, 4).unwrap();
        let reduced = partial_trace_fock(&psi.projector());
        let p = Ket::spin(psi_p[0], psi_p[1]).unwrap().projector();
        let w = Ket::spin(psi_w[0], psi_w[1]).unwrap().projector();
        let expected = (p.entries() + w.entries()) * C64::from(0.5);
        assert!((reduced.entries() - expected)
            .iter()
            .all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn min_eigenvalue_examples() {
        let psi = Ket::tensor([c(0.6, 0.0), c(0.0, 0.8)], &[c(0.0, 1.0), ZERO]).unwrap();
        assert_abs_diff_eq!(min_eigenvalue(&psi.projector()), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            min_eigenvalue(&DensityMatrix::maximally_mixed(2)),
            0.25,
            epsilon = 1e-14
        );
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(0.7, 0.0),
            c(0.3, 0.0),
            ZERO,
            ZERO,
        ]));
        let rho = DensityMatrix::from_entries(diag, 2).unwrap();
        assert_abs_diff_eq!(min_eigenvalue(&rho), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn from_entries_validates() {
        let bad_trace = Operator::identity(4, 4);
        assert!(DensityMatrix::from_entries(bad_trace, 2).is_err());
        let negative = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.2, 0.0),
            c(-0.2, 0.0),
            ZERO,
            ZERO,
        ]));
        assert!(DensityMatrix::from_entries(negative, 2).is_err());
        assert!(matches!(
            DensityMatrix::from_entries(Operator::identity(3, 3), 2),
            Err(HilbertError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_distance_of_orthogonal_states_is_one() {
        let a = Ket::basis(false, 0, 2).unwrap().projector();
        let b = Ket::basis(true, 1, 2).unwrap().projector();
        assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&a, &a).unwrap(), 0.0, epsilon = 1e-15);
    }
}
