//! Dense complex linear algebra used throughout the crate.
//!
//! Every positivity statement ("≥ 0", "≤ 1") is evaluated against a
//! [`Tolerance`] whose threshold grows with the operator norm of the matrix
//! under test, so the predicates behave the same on well- and badly-scaled
//! inputs.

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix; the carrier for operators, blocks and states.
pub type ComplexMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

/// Asymmetry allowed before a matrix handed to the Hermitian eigensolver is
/// rejected instead of symmetrized.
pub const HERMITIAN_REPAIR_LIMIT: f64 = 1e-6;

/// Default SVD cutoff for the generalized inverse.
pub const DEFAULT_RCOND: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Absolute plus norm-relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_eps: 1e-10,
            rel_eps: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Result<Self> {
        if !(abs_eps >= 0.0 && rel_eps >= 0.0 && abs_eps.is_finite() && rel_eps.is_finite()) {
            return Err(Error::Input(format!(
                "tolerances must be finite and non-negative, got abs={abs_eps} rel={rel_eps}"
            )));
        }
        Ok(Tolerance { abs_eps, rel_eps })
    }

    /// Threshold for a matrix of operator norm `norm`.
    #[inline]
    pub fn threshold(&self, norm: f64) -> f64 {
        self.abs_eps + self.rel_eps * (1.0 + norm)
    }

    /// Threshold for quantities homogeneous of degree two in the matrix,
    /// such as `T*T - TT*`.
    #[inline]
    pub fn quadratic_threshold(&self, norm: f64) -> f64 {
        self.abs_eps + self.rel_eps * (1.0 + norm) * (1.0 + norm)
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// `V diag(f(w)) V*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &w) in self.eigenvalues.iter().enumerate() {
            let s = f(w);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * v.adjoint()
    }
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Input(
            "matrix must have at least one row and column".into(),
        ));
    }
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input("matrix contains non-finite entries".into()))
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Diagonal matrix from complex entries.
pub fn diag(entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(entries))
}

/// Diagonal matrix from real entries.
pub fn diag_real(entries: &[f64]) -> ComplexMatrix {
    let e: Vec<Complex64> = entries.iter().map(|&x| c64(x, 0.0)).collect();
    diag(&e)
}

/// Matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c64(x, 0.0)))
}

/// Matrix from complex row-major entries.
pub fn complex_matrix(rows: usize, cols: usize, entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, cols, entries)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Rank-one operator `|f><g|`, i.e. `z ↦ (g, z) f`.
pub fn ket_bra(f: &ComplexVector, g: &ComplexVector) -> ComplexMatrix {
    f * g.adjoint()
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a - b‖_F / max(‖b‖_F, tiny)`.
pub fn relative_frobenius(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let denom = frobenius(b).max(f64::MIN_POSITIVE);
    frobenius(&(a - b)) / denom
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().copied().sum()
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Spectral radius of a matrix known to be Hermitian (no symmetry check).
fn hermitian_spectral_radius(h: &ComplexMatrix) -> f64 {
    let w = h.clone().symmetric_eigenvalues();
    w.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `‖M - M*‖_op`, computed as the spectral radius of the Hermitian `i(M - M*)`.
pub fn asymmetry(m: &ComplexMatrix) -> f64 {
    let skew = m - m.adjoint();
    if skew.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    hermitian_spectral_radius(&(skew * c64(0.0, 1.0)))
}

/// `(M + M*)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    ensure_square(m)?;
    Ok(asymmetry(m) <= tol.threshold(op_norm(m)))
}

/// Normalizes each column so its first non-negligible entry is real positive.
fn fix_phases(v: &mut ComplexMatrix) {
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        let cutoff = 1e-10 * norm.max(f64::MIN_POSITIVE);
        if let Some(z) = col.iter().copied().find(|z| z.norm() > cutoff) {
            let phase = z.conj() / z.norm();
            for x in col.iter_mut() {
                *x *= phase;
            }
        }
    }
}

/// Eigendecomposition of a Hermitian matrix; the input is symmetrized first.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEig> {
    ensure_square(m)?;
    let skew = asymmetry(m);
    let allowed = HERMITIAN_REPAIR_LIMIT * (1.0 + op_norm(m));
    if skew > allowed {
        return Err(Error::NotHermitian {
            asymmetry: skew,
            allowed,
        });
    }
    Ok(eig_hermitian_unchecked(&hermitian_part(m)))
}

/// Eigendecomposition of a matrix the caller guarantees to be Hermitian.
pub(crate) fn eig_hermitian_unchecked(h: &ComplexMatrix) -> HermitianEig {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    fix_phases(&mut eigenvectors);
    HermitianEig {
        eigenvalues,
        eigenvectors,
    }
}

/// Smallest eigenvalue of a matrix the caller guarantees to be Hermitian,
/// together with its spectral radius (= operator norm).
pub(crate) fn min_eig_and_norm(h: &ComplexMatrix) -> (f64, f64) {
    let w = h.clone().symmetric_eigenvalues();
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let radius = w.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    (min, radius)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.min_eigenvalue())
}

/// Result of a positivity test with the evidence behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub psd: bool,
    pub hermitian: bool,
    pub min_eig: f64,
    pub threshold: f64,
}

pub fn psd_report(m: &ComplexMatrix, tol: Tolerance) -> Result<PsdReport> {
    ensure_square(m)?;
    let norm = op_norm(m);
    let threshold = tol.threshold(norm);
    let hermitian = asymmetry(m) <= threshold;
    let (min_eig, _) = min_eig_and_norm(&hermitian_part(m));
    Ok(PsdReport {
        psd: hermitian && min_eig >= -threshold,
        hermitian,
        min_eig,
        threshold,
    })
}

pub fn is_psd(m: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    Ok(psd_report(m, tol)?.psd)
}

/// Hermitian PSD square root; negative eigenvalues within tolerance are clipped.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let report = psd_report(m, Tolerance::default())?;
    if !report.psd {
        return Err(Error::NotPsd {
            min_eig: report.min_eig,
        });
    }
    Ok(eig_hermitian_unchecked(&hermitian_part(m)).map_spectrum(|w| w.max(0.0).sqrt()))
}

/// Moore–Penrose pseudoinverse; singular values below `rcond·σ_max` count as zero.
pub fn pinv(m: &ComplexMatrix, rcond: f64) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("SVD computed with u");
    let v_t = svd.v_t.expect("SVD computed with v_t");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let cutoff = rcond * sigma_max;
    let mut out = ComplexMatrix::zeros(cols, rows);
    if sigma_max == 0.0 {
        return out;
    }
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let vk = v_t.row(k).adjoint();
            let uk = u.column(k);
            out += (vk * uk.adjoint()) * c64(1.0 / s, 0.0);
        }
    }
    out
}

/// Ratio `σ_max / σ_min` (infinite for singular input).
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    let max = s.first().copied().unwrap_or(0.0);
    let min = s.last().copied().unwrap_or(0.0);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn is_contraction(t: &ComplexMatrix, tol: Tolerance) -> bool {
    let norm = op_norm(t);
    norm <= 1.0 + tol.threshold(norm)
}

/// `T*T - TT*`.
pub fn self_commutator(t: &ComplexMatrix) -> ComplexMatrix {
    let adj = t.adjoint();
    &adj * t - t * &adj
}

pub fn is_normal(t: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    ensure_square(t)?;
    let commutator = self_commutator(t);
    let size = hermitian_spectral_radius(&hermitian_part(&commutator));
    Ok(size <= tol.quadratic_threshold(op_norm(t)))
}

/// `‖T* g‖ ≤ ‖T g‖` for all `g`, i.e. `T*T - TT* ⪰ 0`.
///
/// The self-commutator has trace zero, so if its eigenvalues are all at least
/// `-ε` none exceeds `(d-1)ε`. The allowance is therefore the normality
/// threshold divided by `d - 1`: anything accepted here is also normal within
/// the [`is_normal`] threshold.
pub fn is_hyponormal(t: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    let d = ensure_square(t)?;
    let commutator = hermitian_part(&self_commutator(t));
    let (min, _) = min_eig_and_norm(&commutator);
    let allowance = tol.quadratic_threshold(op_norm(t)) / d.saturating_sub(1).max(1) as f64;
    Ok(min >= -allowance)
}

/// Complex Schur form `T = Q S Q*` with `Q` unitary and `S` upper triangular.
pub fn schur(t: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    ensure_square(t)?;
    let decomposition = Schur::try_new(t.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    Ok(decomposition.unpack())
}

/// Orthonormalizes the columns of `m` in place (modified Gram–Schmidt).
pub(crate) fn orthonormalize_columns(m: &mut ComplexMatrix) {
    let cols = m.ncols();
    for j in 0..cols {
        for i in 0..j {
            let qi = m.column(i).clone_owned();
            let proj = qi.dotc(&m.column(j));
            let mut cj = m.column_mut(j);
            cj -= qi * proj;
        }
        let norm = m.column(j).norm();
        if norm > 0.0 {
            m.column_mut(j).scale_mut(1.0 / norm);
        }
    }
}
