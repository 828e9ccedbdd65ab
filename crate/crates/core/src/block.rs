//! Positivity of two-block partitioned matrices `[[A, B], [B*, C]]`.
//!
//! The partitioned matrix is PSD iff `A ⪰ 0`, `C ⪰ 0` and
//! `B = A^{1/2} W C^{1/2}` for some contraction `W`. Here `A` is `n×n`,
//! `C` is `k×k` and `B` is `n×k`; `n` and `k` need not agree. Singular `A` or
//! `C` are handled through generalized inverses, in which case the range
//! condition (recomposition reproduces `B`) decides.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian_unchecked, ensure_square, hermitian_part, is_contraction, is_psd, op_norm, ComplexMatrix,
    Tolerance,
};

/// Blocks `A` (n×n), `B` (n×k), `C` (k×k) of `[[A, B], [B*, C]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition2 {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
}

impl Partition2 {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix, c: ComplexMatrix) -> Result<Self> {
        let n = ensure_square(&a)?;
        let k = ensure_square(&c)?;
        if b.shape() != (n, k) {
            return Err(Error::Dimension(format!(
                "off-diagonal block is {}x{}, expected {n}x{k}",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Partition2 { a, b, c })
    }

    /// Splits a square matrix after row/column `n`, reading `B` from the
    /// upper-right corner.
    pub fn split(m: &ComplexMatrix, n: usize) -> Result<Self> {
        let total = ensure_square(m)?;
        if n == 0 || n >= total {
            return Err(Error::Dimension(format!(
                "split point {n} must lie strictly inside 1..{total}"
            )));
        }
        let k = total - n;
        Partition2::new(
            m.view((0, 0), (n, n)).into_owned(),
            m.view((0, n), (n, k)).into_owned(),
            m.view((n, n), (k, k)).into_owned(),
        )
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn k(&self) -> usize {
        self.c.nrows()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let s = num_complex::Complex64::new(s, 0.0);
        Partition2 {
            a: &self.a * s,
            b: &self.b * s,
            c: &self.c * s,
        }
    }

    /// The full `(n+k)×(n+k)` matrix.
    pub fn assemble(&self) -> ComplexMatrix {
        let (n, k) = (self.n(), self.k());
        let mut m = ComplexMatrix::zeros(n + k, n + k);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, k)).copy_from(&self.b);
        m.view_mut((n, 0), (k, n)).copy_from(&self.b.adjoint());
        m.view_mut((n, n), (k, k)).copy_from(&self.c);
        m
    }
}

/// Outcome of the contraction-factorization test.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    pub psd: bool,
    /// `W₀ = (A^{1/2})⁺ B (C^{1/2})⁺`; present only when `psd`.
    pub w: Option<ComplexMatrix>,
    /// `‖A^{1/2} W₀ C^{1/2} - B‖_op` (infinite when a diagonal block is not PSD).
    pub residual: f64,
    /// `‖W₀‖_op` (infinite when a diagonal block is not PSD).
    pub w_norm: f64,
}

/// `(M^{1/2}, (M^{1/2})⁺)` for a PSD `M`. The cutoff acts on the eigenvalues of
/// `M` rather than on their square roots, so rounding-level eigenvalues
/// (≈ 1e-16) are dropped instead of being amplified to ≈ 1e-8.
fn root_pair(m: &ComplexMatrix, rcond: f64) -> (ComplexMatrix, ComplexMatrix) {
    let eig = eig_hermitian_unchecked(&hermitian_part(m));
    let cutoff = rcond * eig.max_eigenvalue().max(0.0);
    let root = eig.map_spectrum(|w| w.max(0.0).sqrt());
    let inv_root = eig.map_spectrum(|w| {
        if w > cutoff && w > 0.0 {
            1.0 / w.sqrt()
        } else {
            0.0
        }
    });
    (root, inv_root)
}

/// PSD test through the contraction factorization, with pseudoinverse cutoff
/// `rcond` applied to the spectra of the diagonal blocks.
pub fn psd_via_contraction_rcond(
    p: &Partition2,
    tol: Tolerance,
    rcond: f64,
) -> Result<ContractionCertificate> {
    let rejected = ContractionCertificate {
        psd: false,
        w: None,
        residual: f64::INFINITY,
        w_norm: f64::INFINITY,
    };
    if !is_psd(&p.a, tol)? || !is_psd(&p.c, tol)? {
        return Ok(rejected);
    }
    let (root_a, inv_root_a) = root_pair(&p.a, rcond);
    let (root_c, inv_root_c) = root_pair(&p.c, rcond);
    let w = &inv_root_a * &p.b * &inv_root_c;
    let residual = op_norm(&(&root_a * &w * &root_c - &p.b));
    let w_norm = op_norm(&w);
    let in_range = residual <= tol.threshold(op_norm(&p.b));
    let psd = in_range && is_contraction(&w, tol);
    Ok(ContractionCertificate {
        psd,
        w: psd.then_some(w),
        residual,
        w_norm,
    })
}

pub fn psd_via_contraction(p: &Partition2, tol: Tolerance) -> Result<ContractionCertificate> {
    psd_via_contraction_rcond(p, tol, crate::linalg::DEFAULT_RCOND)
}

/// Independent check: eigenvalue test on the assembled matrix.
pub fn psd_oracle(p: &Partition2, tol: Tolerance) -> Result<bool> {
    is_psd(&p.assemble(), tol)
}
