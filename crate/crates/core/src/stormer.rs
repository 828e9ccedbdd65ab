//! Størmer condition on operator block matrices and the canonical
//! decomposition of 2×2 Gram blocks.
//!
//! A block matrix `X = (x_ij)` satisfies the Størmer condition when both `X`
//! and its index-swapped `(x_ji)` are positive. For a Gram block
//! `[[a₁*a₁, a₁*a₂], [a₂*a₁, a₂*a₂]]` with invertible `a₁` this happens
//! exactly when `T = a₂a₁⁻¹` is normal, and then
//!
//! ```text
//! X = Σ_i α_i² [[1, λ_i], [λ̄_i, |λ_i|²]] ⊗ |φ_i⟩⟨φ_i|
//! ```
//!
//! where `T = Σ λ_i |e_i⟩⟨e_i|`, `α_i = ‖a₁* e_i‖` and `φ_i = a₁* e_i / α_i`.
//! Assembled matrices always use the block index as the first tensor factor.

use rand::Rng;

use crate::block::{psd_via_contraction_rcond, ContractionCertificate, Partition2};
use crate::error::{Error, Result};
use crate::linalg::{
    asymmetry, c64, condition_number, ensure_square, hermitian_part, is_normal, ket_bra, min_eig_and_norm,
    op_norm, orthonormalize_columns, pinv, psd_report, schur, self_commutator, singular_values,
    ComplexMatrix, ComplexVector, PsdReport, Tolerance, DEFAULT_RCOND,
};

/// Condition number of `a₁` above which decompositions are reported as degenerate.
pub const DECOMPOSITION_MAX_CONDITION: f64 = 1e6;

/// Relative gap below which eigenvalues of the ratio operator are merged.
pub const EIGENVALUE_CLUSTER_GAP: f64 = 1e-8;

/// Two square operators of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPair {
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
}

impl OperatorPair {
    pub fn new(a1: ComplexMatrix, a2: ComplexMatrix) -> Result<Self> {
        let d1 = ensure_square(&a1)?;
        let d2 = ensure_square(&a2)?;
        if d1 != d2 {
            return Err(Error::Dimension(format!(
                "operators have dimensions {d1} and {d2}"
            )));
        }
        Ok(OperatorPair { a1, a2 })
    }

    pub fn dim(&self) -> usize {
        self.a1.nrows()
    }

    /// The pair with the roles of `a₁` and `a₂` exchanged.
    pub fn swapped(&self) -> Self {
        OperatorPair {
            a1: self.a2.clone(),
            a2: self.a1.clone(),
        }
    }
}

/// `n × n` array of `d × d` blocks, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlockMatrix {
    n: usize,
    d: usize,
    blocks: Vec<ComplexMatrix>,
}

impl OperatorBlockMatrix {
    pub fn new(n: usize, d: usize, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Dimension(
                "block count and block dimension must be positive".into(),
            ));
        }
        if blocks.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} blocks, got {}",
                n * n,
                blocks.len()
            )));
        }
        if let Some(b) = blocks.iter().find(|b| b.shape() != (d, d)) {
            return Err(Error::Dimension(format!(
                "block is {}x{}, expected {d}x{d}",
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(OperatorBlockMatrix { n, d, blocks })
    }

    /// Cuts an `nd × nd` matrix into `d × d` blocks.
    pub fn from_assembled(n: usize, d: usize, m: &ComplexMatrix) -> Result<Self> {
        if m.shape() != (n * d, n * d) {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                n * d,
                n * d
            )));
        }
        let blocks = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                m.view((i * d, j * d), (d, d)).into_owned()
            })
            .collect();
        OperatorBlockMatrix::new(n, d, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn block(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[i * self.n + j]
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn assembled(&self) -> ComplexMatrix {
        let (n, d) = (self.n, self.d);
        let mut m = ComplexMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                m.view_mut((i * d, j * d), (d, d)).copy_from(self.block(i, j));
            }
        }
        m
    }

    /// Applies `f` to every block.
    pub fn map_blocks<F>(&self, out_dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        OperatorBlockMatrix::new(self.n, out_dim, self.blocks.iter().map(f).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.n, self.d) != (other.n, other.d) {
            return Err(Error::Dimension("block matrices differ in shape".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a + b)
            .collect();
        OperatorBlockMatrix::new(self.n, self.d, blocks)
    }

    pub fn scaled(&self, s: f64) -> Self {
        OperatorBlockMatrix {
            n: self.n,
            d: self.d,
            blocks: self.blocks.iter().map(|b| b * c64(s, 0.0)).collect(),
        }
    }
}

/// Block matrix `(a_i* a_j)` of an operator row.
pub fn gram_block_row(row: &[ComplexMatrix]) -> Result<OperatorBlockMatrix> {
    let first = row
        .first()
        .ok_or_else(|| Error::Dimension("operator row is empty".into()))?;
    let d = ensure_square(first)?;
    for a in row {
        if a.shape() != (d, d) {
            return Err(Error::Dimension(
                "operators in a row must share one square shape".into(),
            ));
        }
    }
    let n = row.len();
    let adjoints: Vec<ComplexMatrix> = row.iter().map(|a| a.adjoint()).collect();
    let blocks = (0..n * n).map(|idx| &adjoints[idx / n] * &row[idx % n]).collect();
    OperatorBlockMatrix::new(n, d, blocks)
}

/// `[[a₁*a₁, a₁*a₂], [a₂*a₁, a₂*a₂]]`.
pub fn gram_block(p: &OperatorPair) -> OperatorBlockMatrix {
    gram_block_row(&[p.a1.clone(), p.a2.clone()]).expect("pair is conformal")
}

/// Index swap `(x_ij) ↦ (x_ji)`; the partial transpose on the block-index factor.
pub fn swap_block(x: &OperatorBlockMatrix) -> OperatorBlockMatrix {
    let n = x.n;
    let blocks = (0..n * n).map(|idx| x.block(idx % n, idx / n).clone()).collect();
    OperatorBlockMatrix { n, d: x.d, blocks }
}

/// Positivity evidence for both orientations of a block matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StormerReport {
    pub holds: bool,
    pub direct: PsdReport,
    pub swapped: PsdReport,
}

pub fn stormer_report(x: &OperatorBlockMatrix, tol: Tolerance) -> Result<StormerReport> {
    let m = x.assembled();
    let norm = op_norm(&m);
    let skew = asymmetry(&m);
    if skew > tol.threshold(norm) {
        return Err(Error::NotHermitian {
            asymmetry: skew,
            allowed: tol.threshold(norm),
        });
    }
    let direct = psd_report(&m, tol)?;
    let swapped = psd_report(&swap_block(x).assembled(), tol)?;
    Ok(StormerReport {
        holds: direct.psd && swapped.psd,
        direct,
        swapped,
    })
}

/// Both `(x_ij)` and `(x_ji)` positive semidefinite.
pub fn stormer_test(x: &OperatorBlockMatrix, tol: Tolerance) -> Result<bool> {
    Ok(stormer_report(x, tol)?.holds)
}

/// One operator row `(v_1, …, v_n)` of a Gram factorization.
pub type OperatorRow = Vec<ComplexMatrix>;

/// Factorization `x_ij = Σ_k (v_i^{(k)})* v_j^{(k)}` of a positive block matrix.
///
/// Eigenvectors of the assembled matrix are packed `d` at a time into the rows
/// of the operators, so the number of operator rows is `⌈rank / d⌉`.
pub fn gram_vectors(x: &OperatorBlockMatrix, tol: Tolerance) -> Result<Vec<OperatorRow>> {
    let m = x.assembled();
    let report = psd_report(&m, tol)?;
    if !report.psd {
        return Err(Error::NotPsd {
            min_eig: report.min_eig,
        });
    }
    let eig = crate::linalg::eig_hermitian_unchecked(&hermitian_part(&m));
    let (n, d) = (x.n, x.d);
    // largest eigenvalues first
    let kept: Vec<ComplexVector> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &w)| w > report.threshold)
        .map(|(k, &w)| eig.eigenvectors.column(k).into_owned() * c64(w.sqrt(), 0.0))
        .collect();
    let rows = kept
        .chunks(d)
        .map(|group| {
            (0..n)
                .map(|i| {
                    let mut v = ComplexMatrix::zeros(d, d);
                    for (r, u) in group.iter().enumerate() {
                        // row r of v_i is (u[i-th segment])*
                        for c in 0..d {
                            v[(r, c)] = u[i * d + c].conj();
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

/// `Σ_k (v_i^{(k)})* v_j^{(k)}` for a list of operator rows.
pub fn reassemble_gram(rows: &[OperatorRow]) -> Result<OperatorBlockMatrix> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Dimension("no operator rows".into()))?;
    let mut total = gram_block_row(first)?;
    for row in &rows[1..] {
        total = total.add(&gram_block_row(row)?)?;
    }
    Ok(total)
}

/// `T = a₂ a₁⁺` together with the conditioning of `a₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioOperator {
    pub t: ComplexMatrix,
    /// Some singular value of `a₁` fell below `rcond·σ_max`.
    pub degenerate: bool,
    pub condition: f64,
}

pub fn ratio_operator(p: &OperatorPair, rcond: f64) -> RatioOperator {
    let s = singular_values(&p.a1);
    let max = s[0];
    let min = *s.last().unwrap();
    RatioOperator {
        t: &p.a2 * pinv(&p.a1, rcond),
        degenerate: max == 0.0 || min < rcond * max,
        condition: condition_number(&p.a1),
    }
}

/// `|a₂|² - a₁*a₂ (a₁*a₁)⁺ a₂*a₁ ⪰ 0`.
///
/// This is the Schur complement of the index-swapped Gram block, so for
/// invertible `a₁` it holds exactly when the swapped block is positive.
pub fn contraction_condition(p: &OperatorPair, tol: Tolerance) -> bool {
    contraction_condition_rcond(p, tol, DEFAULT_RCOND)
}

pub fn contraction_condition_rcond(p: &OperatorPair, tol: Tolerance, rcond: f64) -> bool {
    let (a1, a2) = (&p.a1, &p.a2);
    let abs_a2_sq = a2.adjoint() * a2;
    let abs_a1_sq = a1.adjoint() * a1;
    let subtracted = a1.adjoint() * a2 * pinv(&abs_a1_sq, rcond) * a2.adjoint() * a1;
    let schur_complement = hermitian_part(&(&abs_a2_sq - &subtracted));
    let (min, _) = min_eig_and_norm(&schur_complement);
    let scale = op_norm(&abs_a2_sq).max(op_norm(&subtracted));
    min >= -tol.threshold(scale)
}

/// Factorization test for the index-swapped Gram block
/// `[[a₁*a₁, a₂*a₁], [a₁*a₂, a₂*a₂]]`, whose contraction is
/// `W = |a₁|⁺ a₂*a₁ |a₂|⁺`.
pub fn swapped_contraction(p: &OperatorPair, tol: Tolerance, rcond: f64) -> Result<ContractionCertificate> {
    let partition = Partition2::new(
        p.a1.adjoint() * &p.a1,
        p.a2.adjoint() * &p.a1,
        p.a2.adjoint() * &p.a2,
    )?;
    psd_via_contraction_rcond(&partition, tol, rcond)
}

/// `T = Σ_i λ_i |e_i⟩⟨e_i|` for a normal `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResolution {
    pub lambdas: Vec<num_complex::Complex64>,
    /// Orthonormal eigenvectors `e_i`.
    pub es: Vec<ComplexVector>,
}

impl SpectralResolution {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.es[0].len();
        let mut t = ComplexMatrix::zeros(d, d);
        for (l, e) in self.lambdas.iter().zip(&self.es) {
            t += ket_bra(e, e) * *l;
        }
        t
    }
}

/// Resolution of the identity diagonalizing a normal operator.
///
/// Uses the complex Schur form (diagonal for normal input). Eigenvalues
/// closer than `1e-8·(1 + ‖T‖)` are merged into one cluster sharing their mean
/// and an orthonormalized basis of the cluster's invariant subspace.
pub fn spectral_resolution(t: &ComplexMatrix, tol: Tolerance) -> Result<SpectralResolution> {
    ensure_square(t)?;
    if !is_normal(t, tol)? {
        return Err(Error::NotNormal {
            commutator: op_norm(&self_commutator(t)),
        });
    }
    let (q, s) = schur(t)?;
    let d = t.nrows();
    let gap = EIGENVALUE_CLUSTER_GAP * (1.0 + op_norm(t));
    let raw: Vec<_> = (0..d).map(|i| s[(i, i)]).collect();

    // single-link clustering in Schur order
    let mut cluster_of: Vec<usize> = (0..d).collect();
    for i in 0..d {
        for j in 0..i {
            if (raw[i] - raw[j]).norm() <= gap {
                let (from, to) = (cluster_of[i], cluster_of[j]);
                for c in cluster_of.iter_mut() {
                    if *c == from {
                        *c = to;
                    }
                }
            }
        }
    }

    let mut lambdas = vec![c64(0.0, 0.0); d];
    let mut es = vec![ComplexVector::zeros(d); d];
    let mut seen = vec![false; d];
    for i in 0..d {
        let label = cluster_of[i];
        if seen[label] {
            continue;
        }
        seen[label] = true;
        let members: Vec<usize> = (0..d).filter(|&j| cluster_of[j] == label).collect();
        let mean = members.iter().map(|&j| raw[j]).sum::<num_complex::Complex64>() / members.len() as f64;
        let mut basis = ComplexMatrix::from_columns(
            &members
                .iter()
                .map(|&j| q.column(j).into_owned())
                .collect::<Vec<_>>(),
        );
        orthonormalize_columns(&mut basis);
        for (col, &j) in members.iter().enumerate() {
            lambdas[j] = mean;
            let mut e = basis.column(col).into_owned();
            if let Some(z) = e.iter().copied().find(|z| z.norm() > 1e-10) {
                e *= z.conj() / z.norm();
            }
            es[j] = e;
        }
    }
    Ok(SpectralResolution { lambdas, es })
}

/// `a₂ = Σ_i λ_i |e_i⟩⟨a₁* e_i|`.
pub fn reconstruct_a2(
    a1: &ComplexMatrix,
    lambdas: &[num_complex::Complex64],
    es: &[ComplexVector],
) -> Result<ComplexMatrix> {
    let d = ensure_square(a1)?;
    if lambdas.len() != es.len() {
        return Err(Error::Dimension(format!(
            "{} eigenvalues but {} eigenvectors",
            lambdas.len(),
            es.len()
        )));
    }
    if es.iter().any(|e| e.len() != d) {
        return Err(Error::Dimension(format!("eigenvectors must have length {d}")));
    }
    let mut a2 = ComplexMatrix::zeros(d, d);
    for (l, e) in lambdas.iter().zip(es) {
        let g = a1.adjoint() * e;
        a2 += ket_bra(e, &g) * *l;
    }
    Ok(a2)
}

/// Data `(α_i, λ_i, φ_i, e_i)` of the canonical decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDecomposition {
    pub alphas: Vec<f64>,
    pub lambdas: Vec<num_complex::Complex64>,
    /// Unit vectors, or zero vectors for dropped terms (`α_i` below threshold).
    pub phis: Vec<ComplexVector>,
    pub es: Vec<ComplexVector>,
}

impl CanonicalDecomposition {
    pub fn dim(&self) -> usize {
        self.es.first().map_or(0, |e| e.len())
    }

    /// Indices of terms that enter the reconstruction.
    pub fn active_terms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alphas.len()).filter(|&i| self.phis[i].norm() > 0.0)
    }
}

/// Result of attempting the canonical decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum DecompositionOutcome {
    Canonical(CanonicalDecomposition),
    /// `a₁` is singular or too ill-conditioned; the ratio operator is reported
    /// but no decomposition is claimed.
    Degenerate(RatioOperator),
}

pub fn canonical_decomposition(p: &OperatorPair, tol: Tolerance) -> Result<DecompositionOutcome> {
    canonical_decomposition_rcond(p, tol, DEFAULT_RCOND)
}

pub fn canonical_decomposition_rcond(
    p: &OperatorPair,
    tol: Tolerance,
    rcond: f64,
) -> Result<DecompositionOutcome> {
    if !stormer_test(&gram_block(p), tol)? {
        return Err(Error::ConditionNotSatisfied(
            "Gram block or its index swap is not positive".into(),
        ));
    }
    let ratio = ratio_operator(p, rcond);
    if ratio.degenerate || ratio.condition > DECOMPOSITION_MAX_CONDITION {
        return Ok(DecompositionOutcome::Degenerate(ratio));
    }
    let resolution = spectral_resolution(&ratio.t, tol)?;
    let cutoff = tol.threshold(op_norm(&p.a1));
    let d = p.dim();
    let mut alphas = Vec::with_capacity(d);
    let mut phis = Vec::with_capacity(d);
    for e in &resolution.es {
        let v = p.a1.adjoint() * e;
        let alpha = v.norm();
        alphas.push(alpha);
        if alpha > cutoff {
            phis.push(v / c64(alpha, 0.0));
        } else {
            phis.push(ComplexVector::zeros(d));
        }
    }
    Ok(DecompositionOutcome::Canonical(CanonicalDecomposition {
        alphas,
        lambdas: resolution.lambdas,
        phis,
        es: resolution.es,
    }))
}

/// Decomposition of the role-swapped pair `(a₂, a₁)`.
pub fn dual_decomposition(p: &OperatorPair, tol: Tolerance) -> Result<DecompositionOutcome> {
    canonical_decomposition(&p.swapped(), tol)
}

pub fn dual_decomposition_rcond(
    p: &OperatorPair,
    tol: Tolerance,
    rcond: f64,
) -> Result<DecompositionOutcome> {
    canonical_decomposition_rcond(&p.swapped(), tol, rcond)
}

/// `[[1, λ], [λ̄, |λ|²]]`.
pub fn coefficient_matrix(lambda: num_complex::Complex64) -> ComplexMatrix {
    crate::linalg::complex_matrix(
        2,
        2,
        &[c64(1.0, 0.0), lambda, lambda.conj(), c64(lambda.norm_sqr(), 0.0)],
    )
}

/// `Σ_i α_i² Λ_i ⊗ |φ_i⟩⟨φ_i|` as a 2×2 block matrix.
pub fn reconstruct_block(dec: &CanonicalDecomposition) -> OperatorBlockMatrix {
    let d = dec.dim();
    let mut total = ComplexMatrix::zeros(2 * d, 2 * d);
    for i in dec.active_terms() {
        let projector = ket_bra(&dec.phis[i], &dec.phis[i]);
        let weight = dec.alphas[i] * dec.alphas[i];
        total += coefficient_matrix(dec.lambdas[i]).kronecker(&projector) * c64(weight, 0.0);
    }
    OperatorBlockMatrix::from_assembled(2, d, &total).expect("shape by construction")
}

/// A positive block matrix obeying the Størmer condition although one of its
/// Gram summands does not.
#[derive(Debug, Clone, PartialEq)]
pub struct NontrivialSum {
    pub summands: Vec<OperatorPair>,
    /// Index of a summand whose Gram block violates the condition.
    pub violating: usize,
    pub total: OperatorBlockMatrix,
}

impl NontrivialSum {
    pub fn from_summands(summands: Vec<OperatorPair>) -> Result<Self> {
        let mut total: Option<OperatorBlockMatrix> = None;
        for p in &summands {
            let g = gram_block(p);
            total = Some(match total {
                None => g,
                Some(t) => t.add(&g)?,
            });
        }
        let total = total.ok_or_else(|| Error::Input("no summands".into()))?;
        Ok(NontrivialSum {
            summands,
            violating: 0,
            total,
        })
    }

    /// Re-checks the defining property: the total satisfies the condition
    /// and the recorded summand does not.
    pub fn verify(&self, tol: Tolerance) -> Result<bool> {
        let total_ok = stormer_test(&self.total, tol)?;
        let summand_ok = stormer_test(&gram_block(&self.summands[self.violating]), tol)?;
        Ok(total_ok && !summand_ok)
    }
}

/// Randomized search over `n = 2` Gram sums: a violating pair is diluted by
/// Størmer pairs until the total satisfies the condition.
pub fn search_nontrivial_sum(seed: u64, d: usize, attempts: usize, tol: Tolerance) -> Option<NontrivialSum> {
    const MAX_DILUTERS: usize = 12;
    for attempt in 0..attempts {
        let mut rng = crate::exec::trial_rng(seed, attempt as u64);
        let (bad, _) = crate::random::generic_pair(&mut rng, d);
        let weight = rng.random_range(0.05..0.5);
        let bad = OperatorPair::new(&bad.a1 * c64(weight, 0.0), &bad.a2 * c64(weight, 0.0)).ok()?;
        if stormer_test(&gram_block(&bad), tol).ok()? {
            continue;
        }
        let mut summands = vec![bad];
        let mut total = gram_block(&summands[0]);
        for _ in 0..MAX_DILUTERS {
            let good = crate::random::stormer_pair(&mut rng, d);
            total = total.add(&gram_block(&good)).ok()?;
            summands.push(good);
            if stormer_test(&total, tol).ok()? {
                return Some(NontrivialSum {
                    summands,
                    violating: 0,
                    total,
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        complex_matrix, diag, diag_real, frobenius, identity, is_psd, real_matrix, relative_frobenius,
    };

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn i() -> num_complex::Complex64 {
        c64(0.0, 1.0)
    }

    fn one() -> num_complex::Complex64 {
        c64(1.0, 0.0)
    }

    fn nilpotent() -> ComplexMatrix {
        real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    #[test]
    fn gram_block_examples() {
        let g = gram_block(&OperatorPair::new(identity(2), identity(2)).unwrap());
        for idx in 0..4 {
            assert_eq!(g.blocks()[idx], identity(2));
        }
        let a2 = diag(&[one(), i()]);
        let g = gram_block(&OperatorPair::new(identity(2), a2.clone()).unwrap());
        assert_eq!(g.block(0, 1), &a2);
        assert_eq!(g.block(1, 0), &diag(&[one(), -i()]));
        assert_eq!(g.block(1, 1), &identity(2));
    }

    #[test]
    fn pair_requires_matching_dimensions() {
        assert!(matches!(
            OperatorPair::new(identity(2), identity(3)),
            Err(Error::Dimension(_))
        ));
        assert!(OperatorBlockMatrix::new(2, 2, vec![identity(2); 3]).is_err());
        assert!(OperatorBlockMatrix::new(1, 2, vec![identity(3)]).is_err());
    }

    #[test]
    fn swap_exchanges_off_diagonal_blocks() {
        let a = diag_real(&[1.0, 2.0]);
        let b = complex_matrix(2, 2, &[one(), i(), c64(2.0, 0.0), c64(0.0, -3.0)]);
        let c = diag_real(&[5.0, 7.0]);
        let x = OperatorBlockMatrix::new(2, 2, vec![a.clone(), b.clone(), b.adjoint(), c.clone()]).unwrap();
        let s = swap_block(&x);
        assert_eq!(s.block(0, 1), &b.adjoint());
        assert_eq!(s.block(1, 0), &b);
        assert_eq!(swap_block(&s), x);
    }

    #[test]
    fn stormer_examples() {
        let good = gram_block(&OperatorPair::new(identity(2), diag(&[one(), i()])).unwrap());
        assert!(stormer_test(&good, tol()).unwrap());

        let bad = gram_block(&OperatorPair::new(identity(2), nilpotent()).unwrap());
        let report = stormer_report(&bad, tol()).unwrap();
        assert!(!report.holds);
        assert!(report.direct.psd);
        // swapped block [[I, N*],[N, N*N]] has eigenvalues (1 ± √5)/2 on span{e2, e3}
        assert!((report.swapped.min_eig - (1.0 - 5.0_f64.sqrt()) / 2.0).abs() < 1e-12);

        let a = real_matrix(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let sym = gram_block(&OperatorPair::new(a.clone(), a).unwrap());
        assert_eq!(swap_block(&sym), sym);
        assert!(stormer_test(&sym, tol()).unwrap());
    }

    #[test]
    fn stormer_rejects_non_hermitian_input() {
        let x = OperatorBlockMatrix::new(
            2,
            1,
            vec![
                real_matrix(1, 1, &[1.0]),
                real_matrix(1, 1, &[1.0]),
                real_matrix(1, 1, &[0.0]),
                real_matrix(1, 1, &[1.0]),
            ],
        )
        .unwrap();
        assert!(matches!(stormer_test(&x, tol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn gram_vector_examples() {
        let ones = OperatorBlockMatrix::from_assembled(2, 1, &real_matrix(2, 2, &[1.0; 4])).unwrap();
        let rows = gram_vectors(&ones, tol()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0][0][(0, 0)] - one()).norm() < 1e-12);
        assert!((rows[0][1][(0, 0)] - one()).norm() < 1e-12);

        let id = OperatorBlockMatrix::from_assembled(2, 1, &identity(2)).unwrap();
        let rows = gram_vectors(&id, tol()).unwrap();
        assert_eq!(rows.len(), 2);
        let mut values: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r[0][(0, 0)].norm(), r[1][(0, 0)].norm()))
            .collect();
        values.sort_by(|a, b| b.0.total_cmp(&a.0));
        assert!((values[0].0 - 1.0).abs() < 1e-12 && values[0].1 < 1e-12);
        assert!(values[1].0 < 1e-12 && (values[1].1 - 1.0).abs() < 1e-12);

        let not_psd =
            OperatorBlockMatrix::from_assembled(2, 1, &real_matrix(2, 2, &[1.0, 2.0, 2.0, 1.0])).unwrap();
        assert!(matches!(gram_vectors(&not_psd, tol()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn gram_vectors_reassemble() {
        let mut rng = crate::exec::trial_rng(11, 0);
        let m = crate::random::wishart(&mut rng, 8, 5);
        let x = OperatorBlockMatrix::from_assembled(2, 4, &m).unwrap();
        let rows = gram_vectors(&x, tol()).unwrap();
        assert_eq!(rows.len(), 2);
        let back = reassemble_gram(&rows).unwrap().assembled();
        assert!(frobenius(&(back - &m)) <= 1e-9 * (1.0 + op_norm(&m)));
    }

    #[test]
    fn ratio_operator_examples() {
        let a2 = complex_matrix(2, 2, &[one(), i(), c64(2.0, 0.0), c64(-1.0, 1.0)]);
        let r = ratio_operator(
            &OperatorPair::new(identity(2), a2.clone()).unwrap(),
            DEFAULT_RCOND,
        );
        assert!(frobenius(&(r.t - &a2)) < 1e-14);
        assert!(!r.degenerate);

        let r = ratio_operator(
            &OperatorPair::new(identity(2) * c64(2.0, 0.0), a2.clone()).unwrap(),
            DEFAULT_RCOND,
        );
        assert!(frobenius(&(r.t - &a2 * c64(0.5, 0.0))) < 1e-14);

        let r = ratio_operator(
            &OperatorPair::new(diag_real(&[1.0, 0.0]), identity(2)).unwrap(),
            DEFAULT_RCOND,
        );
        assert!(r.degenerate);
        assert!(frobenius(&(r.t - diag_real(&[1.0, 0.0]))) < 1e-14);
    }

    #[test]
    fn contraction_condition_examples() {
        let s = 0.5_f64.sqrt();
        let u = complex_matrix(2, 2, &[c64(s, 0.0), c64(0.0, s), c64(0.0, s), c64(s, 0.0)]);
        assert!(contraction_condition(
            &OperatorPair::new(identity(2), u).unwrap(),
            tol()
        ));

        // |a₂|² - a₂a₂* = diag(0,1) - diag(1,0)
        let p = OperatorPair::new(identity(2), nilpotent()).unwrap();
        assert!(!contraction_condition(&p, tol()));
        let diff = nilpotent().adjoint() * nilpotent() - nilpotent() * nilpotent().adjoint();
        assert_eq!(diff, diag_real(&[-1.0, 1.0]));
        assert!(!swapped_contraction(&p, tol(), DEFAULT_RCOND).unwrap().psd);
    }

    #[test]
    fn spectral_resolution_examples() {
        let t = diag(&[one(), i()]);
        let r = spectral_resolution(&t, tol()).unwrap();
        assert_eq!(r.lambdas.len(), 2);
        assert!((r.lambdas[0] - one()).norm() < 1e-14);
        assert!((r.lambdas[1] - i()).norm() < 1e-14);
        assert!((r.es[0][0] - one()).norm() < 1e-14);
        assert!((r.es[1][1] - one()).norm() < 1e-14);

        let r = spectral_resolution(&identity(3), tol()).unwrap();
        assert!(r.lambdas.iter().all(|l| (l - one()).norm() < 1e-14));
        assert!(frobenius(&(r.reconstruct() - identity(3))) < 1e-14);

        assert!(matches!(
            spectral_resolution(&nilpotent(), tol()),
            Err(Error::NotNormal { .. })
        ));
    }

    #[test]
    fn near_degenerate_eigenvalues_are_clustered() {
        let t = diag(&[one(), one() + c64(1e-12, 0.0), i()]);
        let r = spectral_resolution(&t, tol()).unwrap();
        assert_eq!(r.lambdas[0], r.lambdas[1]);
        assert!(frobenius(&(r.reconstruct() - &t)) < 1e-11);
    }

    #[test]
    fn reconstruct_a2_examples() {
        let e = vec![
            ComplexVector::from_column_slice(&[one(), c64(0.0, 0.0)]),
            ComplexVector::from_column_slice(&[c64(0.0, 0.0), one()]),
        ];
        let l = [c64(2.0, 1.0), c64(-0.5, 0.0)];
        let a2 = reconstruct_a2(&identity(2), &l, &e).unwrap();
        assert!(frobenius(&(a2 - diag(&l))) < 1e-15);
        let a2 = reconstruct_a2(&(identity(2) * c64(2.0, 0.0)), &l, &e).unwrap();
        assert!(frobenius(&(a2 - diag(&l) * c64(2.0, 0.0))) < 1e-15);
        assert!(matches!(
            reconstruct_a2(&identity(2), &l[..1], &e),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn canonical_decomposition_of_diagonal_pair() {
        let p = OperatorPair::new(identity(2), diag(&[one(), i()])).unwrap();
        let DecompositionOutcome::Canonical(dec) = canonical_decomposition(&p, tol()).unwrap() else {
            panic!("expected a decomposition");
        };
        assert!(dec.alphas.iter().all(|a| (a - 1.0).abs() < 1e-14));
        assert!((dec.lambdas[0] - one()).norm() < 1e-14);
        assert!((dec.lambdas[1] - i()).norm() < 1e-14);
        assert!((dec.phis[0][0] - one()).norm() < 1e-14);
        assert!((dec.phis[1][1] - one()).norm() < 1e-14);
        let back = reconstruct_block(&dec).assembled();
        assert!(relative_frobenius(&back, &gram_block(&p).assembled()) < 1e-14);
    }

    #[test]
    fn canonical_decomposition_of_scaled_diagonal_pair() {
        let (mu1, mu2) = (c64(0.3, -1.2), c64(-2.0, 0.5));
        let a1 = diag_real(&[2.0, 3.0]);
        let a2 = diag(&[mu1 * 2.0, mu2 * 3.0]);
        let DecompositionOutcome::Canonical(dec) =
            canonical_decomposition(&OperatorPair::new(a1, a2).unwrap(), tol()).unwrap()
        else {
            panic!("expected a decomposition");
        };
        assert!((dec.alphas[0] - 2.0).abs() < 1e-13 && (dec.alphas[1] - 3.0).abs() < 1e-13);
        assert!((dec.lambdas[0] - mu1).norm() < 1e-13 && (dec.lambdas[1] - mu2).norm() < 1e-13);
    }

    #[test]
    fn decomposition_errors_and_degeneracy() {
        let p = OperatorPair::new(identity(2), nilpotent()).unwrap();
        assert!(matches!(
            canonical_decomposition(&p, tol()),
            Err(Error::ConditionNotSatisfied(_))
        ));
        let p = OperatorPair::new(diag_real(&[1.0, 0.0]), identity(2)).unwrap();
        assert!(matches!(
            canonical_decomposition(&p, tol()).unwrap(),
            DecompositionOutcome::Degenerate(RatioOperator { degenerate: true, .. })
        ));
    }

    #[test]
    fn dual_decomposition_examples() {
        // roles swapped: T = diag(1, i)·I⁻¹
        let p = OperatorPair::new(diag(&[one(), i()]), identity(2)).unwrap();
        let DecompositionOutcome::Canonical(dec) = dual_decomposition(&p, tol()).unwrap() else {
            panic!("expected a decomposition");
        };
        assert!(dec.alphas.iter().all(|a| (a - 1.0).abs() < 1e-14));
        assert!((dec.lambdas[0] - one()).norm() < 1e-14);
        assert!((dec.lambdas[1] - i()).norm() < 1e-14);
        let back = reconstruct_block(&dec).assembled();
        assert!(relative_frobenius(&back, &gram_block(&p.swapped()).assembled()) < 1e-14);

        let a = real_matrix(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let p = OperatorPair::new(a.clone(), a).unwrap();
        let DecompositionOutcome::Canonical(dec) = dual_decomposition(&p, tol()).unwrap() else {
            panic!("expected a decomposition");
        };
        assert!(dec.lambdas.iter().all(|l| (l - one()).norm() < 1e-12));
    }

    #[test]
    fn reconstruct_block_examples() {
        let e1 = ComplexVector::from_column_slice(&[one(), c64(0.0, 0.0)]);
        let p = ket_bra(&e1, &e1);
        let single = |lambda| CanonicalDecomposition {
            alphas: vec![1.0],
            lambdas: vec![lambda],
            phis: vec![e1.clone()],
            es: vec![e1.clone()],
        };
        let x = reconstruct_block(&single(c64(0.0, 0.0)));
        assert_eq!(x.block(0, 0), &p);
        assert_eq!(
            frobenius(x.block(0, 1)) + frobenius(x.block(1, 0)) + frobenius(x.block(1, 1)),
            0.0
        );
        let x = reconstruct_block(&single(one()));
        assert!((0..4).all(|k| x.blocks()[k] == p));
    }

    #[test]
    fn gram_blocks_are_positive() {
        let mut rng = crate::exec::trial_rng(12, 0);
        let a1 = crate::random::gaussian(&mut rng, 6, 6);
        let a2 = crate::random::gaussian(&mut rng, 6, 6);
        let g = gram_block(&OperatorPair::new(a1, a2).unwrap());
        assert!(is_psd(&g.assembled(), tol()).unwrap());
    }

    #[test]
    fn nontrivial_sum_is_found() {
        let found = search_nontrivial_sum(1, 2, 50, tol()).expect("search succeeds");
        assert!(found.verify(tol()).unwrap());
        let rebuilt = NontrivialSum::from_summands(found.summands.clone()).unwrap();
        assert!(relative_frobenius(&rebuilt.total.assembled(), &found.total.assembled()) < 1e-15);
    }
}
