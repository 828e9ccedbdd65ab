//! Bipartite density states built from Størmer blocks, partial transposes and
//! explicit separable decompositions.
//!
//! States live on `ℂⁿ ⊗ ℂ^d` with the block index as the first factor.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, eig_hermitian, hermitian_part, ket_bra, min_eig_and_norm, op_norm, psd_report, relative_frobenius,
    trace, ComplexMatrix, ComplexVector, Tolerance,
};
use crate::stormer::{CanonicalDecomposition, OperatorBlockMatrix};

const STATE_HERMITIAN_TOL: f64 = 1e-10;
const STATE_TRACE_TOL: f64 = 1e-10;
const STATE_MIN_EIG: f64 = -1e-9;

/// Normalized positive matrix on `ℂⁿ ⊗ ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    dims: (usize, usize),
    matrix: ComplexMatrix,
}

impl DensityState {
    pub fn new(dims: (usize, usize), matrix: ComplexMatrix) -> Result<Self> {
        let (n, d) = dims;
        if n == 0 || d == 0 || matrix.shape() != (n * d, n * d) {
            return Err(Error::Dimension(format!(
                "state matrix is {}x{}, dims ({n}, {d})",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        crate::linalg::ensure_finite(&matrix)?;
        let skew = crate::linalg::asymmetry(&matrix);
        if skew > STATE_HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                asymmetry: skew,
                allowed: STATE_HERMITIAN_TOL,
            });
        }
        let tr = trace(&matrix);
        if (tr - c64(1.0, 0.0)).norm() > STATE_TRACE_TOL {
            return Err(Error::Domain(format!("state trace is {tr}, expected 1")));
        }
        let (min, _) = min_eig_and_norm(&hermitian_part(&matrix));
        if min < STATE_MIN_EIG {
            return Err(Error::NotPsd { min_eig: min });
        }
        Ok(DensityState { dims, matrix })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Product state `σ ⊗ τ` of two density matrices.
    pub fn product(sigma: &ComplexMatrix, tau: &ComplexMatrix) -> Result<Self> {
        DensityState::new((sigma.nrows(), tau.nrows()), sigma.kronecker(tau))
    }

    /// `(|00⟩ + |11⟩)/√2` on `ℂ² ⊗ ℂ²`.
    pub fn bell() -> Self {
        let mut psi = ComplexVector::zeros(4);
        psi[0] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[3] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        DensityState::new((2, 2), ket_bra(&psi, &psi)).expect("valid state")
    }
}

/// `ρ = X / tr X` for a positive block matrix.
pub fn state_from_block(x: &OperatorBlockMatrix) -> Result<DensityState> {
    let m = x.assembled();
    let report = psd_report(&m, Tolerance::default())?;
    if !report.psd {
        return Err(Error::NotPsd {
            min_eig: report.min_eig,
        });
    }
    let tr = trace(&m).re;
    if tr <= report.threshold {
        return Err(Error::Domain("block matrix has zero trace".into()));
    }
    let normalized = hermitian_part(&m) / c64(tr, 0.0);
    DensityState::new((x.n(), x.d()), normalized)
}

/// Tensor factor selector for the partial transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// The block index `ℂⁿ`.
    First,
    /// The Hilbert space `ℂ^d`.
    Second,
}

impl Factor {
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Factor::First),
            2 => Ok(Factor::Second),
            other => Err(Error::Input(format!("tensor factor must be 1 or 2, got {other}"))),
        }
    }
}

/// Partial transpose of an `nd × nd` matrix on `ℂⁿ ⊗ ℂ^d`.
pub fn partial_transpose_matrix(m: &ComplexMatrix, dims: (usize, usize), factor: Factor) -> ComplexMatrix {
    let (n, d) = dims;
    assert_eq!(m.shape(), (n * d, n * d), "matrix does not match dims");
    ComplexMatrix::from_fn(n * d, n * d, |row, col| {
        let (i, a) = (row / d, row % d);
        let (j, b) = (col / d, col % d);
        match factor {
            Factor::First => m[(j * d + a, i * d + b)],
            Factor::Second => m[(i * d + b, j * d + a)],
        }
    })
}

pub fn partial_transpose(rho: &DensityState, factor: Factor) -> ComplexMatrix {
    partial_transpose_matrix(&rho.matrix, rho.dims, factor)
}

/// Smallest eigenvalue of the partial transpose on the first factor.
pub fn ppt_margin(rho: &DensityState) -> f64 {
    min_eig_and_norm(&hermitian_part(&partial_transpose(rho, Factor::First))).0
}

pub fn is_ppt(rho: &DensityState, tol: Tolerance) -> bool {
    let pt = partial_transpose(rho, Factor::First);
    let (min, norm) = min_eig_and_norm(&hermitian_part(&pt));
    min >= -tol.threshold(norm)
}

/// `ρ = Σ_i p_i |w_i⟩⟨w_i| ⊗ |φ_i⟩⟨φ_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDecomposition {
    pub weights: Vec<f64>,
    pub factor1: Vec<ComplexVector>,
    pub factor2: Vec<ComplexVector>,
}

impl SeparableDecomposition {
    pub fn reassemble(&self) -> ComplexMatrix {
        let n = self.factor1[0].len();
        let d = self.factor2[0].len();
        let mut rho = ComplexMatrix::zeros(n * d, n * d);
        for ((p, w), phi) in self.weights.iter().zip(&self.factor1).zip(&self.factor2) {
            rho += ket_bra(w, w).kronecker(&ket_bra(phi, phi)) * c64(*p, 0.0);
        }
        rho
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.factor1[0].len(), self.factor2[0].len())
    }

    /// Checks positivity of the weights, their normalization and unit factors.
    pub fn check_invariants(&self, eps: f64) -> bool {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().all(|&p| p > 0.0)
            && (total - 1.0).abs() <= eps
            && self.factor1.iter().all(|w| (w.norm() - 1.0).abs() <= eps)
            && self.factor2.iter().all(|f| (f.norm() - 1.0).abs() <= eps)
    }
}

/// Separable form of the normalized Gram block from its canonical decomposition.
///
/// Term `i` has weight `α_i²(1+|λ_i|²)` before normalization, first factor
/// `(1, λ̄_i)/√(1+|λ_i|²)` and second factor `φ_i`.
pub fn separable_decomposition(dec: &CanonicalDecomposition) -> Result<SeparableDecomposition> {
    let mut weights = Vec::new();
    let mut factor1 = Vec::new();
    let mut factor2 = Vec::new();
    for i in dec.active_terms() {
        let l = dec.lambdas[i];
        let scale = 1.0 + l.norm_sqr();
        let weight = dec.alphas[i] * dec.alphas[i] * scale;
        if weight <= 0.0 {
            continue;
        }
        weights.push(weight);
        let s = 1.0 / scale.sqrt();
        factor1.push(ComplexVector::from_column_slice(&[c64(s, 0.0), l.conj() * s]));
        factor2.push(dec.phis[i].clone());
    }
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 {
        return Err(Error::Domain("decomposition has no nonzero terms".into()));
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(SeparableDecomposition {
        weights,
        factor1,
        factor2,
    })
}

/// Relative Frobenius distance between a separable decomposition and a state.
pub fn separable_residual(sep: &SeparableDecomposition, rho: &DensityState) -> f64 {
    relative_frobenius(&sep.reassemble(), rho.matrix())
}

/// Eigenvalues of a state (ascending); convenience for reports.
pub fn spectrum(rho: &DensityState) -> Result<Vec<f64>> {
    Ok(eig_hermitian(rho.matrix())?.eigenvalues)
}

/// `‖ρ‖_op`.
pub fn state_norm(rho: &DensityState) -> f64 {
    op_norm(rho.matrix())
}
