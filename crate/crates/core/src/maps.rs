//! Positive maps `M_k → M_l` and their entrywise action on block matrices.

use crate::error::{Error, Result};
use crate::linalg::{c64, ensure_square, ComplexMatrix};
use crate::stormer::OperatorBlockMatrix;

/// Fixtures known by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedMap {
    Identity(usize),
    Transpose(usize),
    /// Choi's positive, non-decomposable map on `M_3`:
    /// `Φ(x) = diag(x₁₁+x₃₃, x₂₂+x₁₁, x₃₃+x₂₂)` on the diagonal and `-x_ij`
    /// off the diagonal.
    Choi3,
}

/// Representation tag, mirroring how the map was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    KrausCp,
    KrausCocp,
    Sum,
    ChoiRaw,
    Named,
}

/// A linear map `M_k → M_l`.
#[derive(Debug, Clone, PartialEq)]
pub enum PositiveMap {
    /// `x ↦ Σ K x K* + Σ L xᵀ L*`, decomposable by construction.
    Kraus {
        cp: Vec<ComplexMatrix>,
        cocp: Vec<ComplexMatrix>,
        input_dim: usize,
        output_dim: usize,
    },
    /// Choi matrix `C = Σ_ij E_ij ⊗ Φ(E_ij)` (input index first).
    Choi {
        choi: ComplexMatrix,
        input_dim: usize,
        output_dim: usize,
    },
    Named(NamedMap),
}

/// `Σ K x K* + Σ L xᵀ L*` from conformal `l × k` Kraus families.
pub fn make_decomposable(cp: Vec<ComplexMatrix>, cocp: Vec<ComplexMatrix>) -> Result<PositiveMap> {
    let first = cp
        .first()
        .or_else(|| cocp.first())
        .ok_or_else(|| Error::Input("a decomposable map needs at least one Kraus operator".into()))?;
    let (output_dim, input_dim) = first.shape();
    if input_dim == 0 || output_dim == 0 {
        return Err(Error::Dimension("Kraus operators must be non-empty".into()));
    }
    if let Some(k) = cp
        .iter()
        .chain(&cocp)
        .find(|k| k.shape() != (output_dim, input_dim))
    {
        return Err(Error::Dimension(format!(
            "Kraus operator is {}x{}, expected {output_dim}x{input_dim}",
            k.nrows(),
            k.ncols()
        )));
    }
    for k in cp.iter().chain(&cocp) {
        crate::linalg::ensure_finite(k)?;
    }
    Ok(PositiveMap::Kraus {
        cp,
        cocp,
        input_dim,
        output_dim,
    })
}

/// The 3×3 Choi map.
pub fn choi_fixture() -> PositiveMap {
    PositiveMap::Named(NamedMap::Choi3)
}

pub fn from_choi(choi: ComplexMatrix, input_dim: usize, output_dim: usize) -> Result<PositiveMap> {
    if input_dim == 0 || output_dim == 0 {
        return Err(Error::Dimension("map dimensions must be positive".into()));
    }
    let size = input_dim * output_dim;
    if choi.shape() != (size, size) {
        return Err(Error::Dimension(format!(
            "Choi matrix is {}x{}, expected {size}x{size}",
            choi.nrows(),
            choi.ncols()
        )));
    }
    crate::linalg::ensure_finite(&choi)?;
    Ok(PositiveMap::Choi {
        choi,
        input_dim,
        output_dim,
    })
}

fn choi3(x: &ComplexMatrix) -> ComplexMatrix {
    let mut y = -x.clone();
    y[(0, 0)] = x[(0, 0)] + x[(2, 2)];
    y[(1, 1)] = x[(1, 1)] + x[(0, 0)];
    y[(2, 2)] = x[(2, 2)] + x[(1, 1)];
    y
}

impl PositiveMap {
    pub fn kind(&self) -> MapKind {
        match self {
            PositiveMap::Kraus { cp, cocp, .. } => match (cp.is_empty(), cocp.is_empty()) {
                (false, true) => MapKind::KrausCp,
                (true, false) => MapKind::KrausCocp,
                _ => MapKind::Sum,
            },
            PositiveMap::Choi { .. } => MapKind::ChoiRaw,
            PositiveMap::Named(_) => MapKind::Named,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            PositiveMap::Kraus { input_dim, .. } | PositiveMap::Choi { input_dim, .. } => *input_dim,
            PositiveMap::Named(NamedMap::Identity(k) | NamedMap::Transpose(k)) => *k,
            PositiveMap::Named(NamedMap::Choi3) => 3,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            PositiveMap::Kraus { output_dim, .. } | PositiveMap::Choi { output_dim, .. } => *output_dim,
            PositiveMap::Named(_) => self.input_dim(),
        }
    }

    /// Whether the representation itself certifies decomposability.
    pub fn is_decomposable_by_construction(&self) -> bool {
        matches!(
            self,
            PositiveMap::Kraus { .. } | PositiveMap::Named(NamedMap::Identity(_) | NamedMap::Transpose(_))
        )
    }

    pub fn name(&self) -> String {
        match self {
            PositiveMap::Named(NamedMap::Identity(k)) => format!("identity{k}"),
            PositiveMap::Named(NamedMap::Transpose(k)) => format!("transpose{k}"),
            PositiveMap::Named(NamedMap::Choi3) => "choi3".into(),
            PositiveMap::Kraus { .. } => "kraus".into(),
            PositiveMap::Choi { .. } => "choi".into(),
        }
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let k = self.input_dim();
        if x.shape() != (k, k) {
            return Err(Error::Dimension(format!(
                "map acts on {k}x{k} matrices, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match self {
            PositiveMap::Kraus {
                cp, cocp, output_dim, ..
            } => {
                let mut y = ComplexMatrix::zeros(*output_dim, *output_dim);
                for k in cp {
                    y += k * x * k.adjoint();
                }
                if !cocp.is_empty() {
                    let xt = x.transpose();
                    for l in cocp {
                        y += l * &xt * l.adjoint();
                    }
                }
                y
            }
            PositiveMap::Choi {
                choi,
                input_dim,
                output_dim,
            } => {
                let (k, l) = (*input_dim, *output_dim);
                let mut y = ComplexMatrix::zeros(l, l);
                for i in 0..k {
                    for j in 0..k {
                        let coeff = x[(i, j)];
                        if coeff != c64(0.0, 0.0) {
                            y += choi.view((i * l, j * l), (l, l)) * coeff;
                        }
                    }
                }
                y
            }
            PositiveMap::Named(NamedMap::Identity(_)) => x.clone(),
            PositiveMap::Named(NamedMap::Transpose(_)) => x.transpose(),
            PositiveMap::Named(NamedMap::Choi3) => choi3(x),
        }
    }

    /// `C = Σ_ij E_ij ⊗ Φ(E_ij)`.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        if let PositiveMap::Choi { choi, .. } = self {
            return choi.clone();
        }
        let (k, l) = (self.input_dim(), self.output_dim());
        let mut c = ComplexMatrix::zeros(k * l, k * l);
        for i in 0..k {
            for j in 0..k {
                let mut e = ComplexMatrix::zeros(k, k);
                e[(i, j)] = c64(1.0, 0.0);
                c.view_mut((i * l, j * l), (l, l))
                    .copy_from(&self.apply_unchecked(&e));
            }
        }
        c
    }

    /// Dual map with respect to the trace pairing, as a callable built once
    /// from the Choi matrix: `Φ†(y)_{ji} = tr(Φ(E_ij) y)`.
    pub fn dual(&self) -> DualMap {
        DualMap {
            choi: self.choi_matrix(),
            input_dim: self.input_dim(),
            output_dim: self.output_dim(),
        }
    }
}

/// Adjoint of a map under `⟨x, y⟩ = tr(x* y)`.
#[derive(Debug, Clone)]
pub struct DualMap {
    choi: ComplexMatrix,
    input_dim: usize,
    output_dim: usize,
}

impl DualMap {
    pub fn apply(&self, y: &ComplexMatrix) -> ComplexMatrix {
        let (k, l) = (self.input_dim, self.output_dim);
        let mut out = ComplexMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let block = self.choi.view((i * l, j * l), (l, l));
                let mut acc = c64(0.0, 0.0);
                for r in 0..l {
                    for s in 0..l {
                        acc += block[(r, s)] * y[(s, r)];
                    }
                }
                out[(j, i)] = acc;
            }
        }
        out
    }
}

/// `(φ(x_ij))`: the map applied to every block.
pub fn apply_map_entrywise(phi: &PositiveMap, x: &OperatorBlockMatrix) -> Result<OperatorBlockMatrix> {
    if x.d() != phi.input_dim() {
        return Err(Error::Dimension(format!(
            "block dimension {} does not match map input dimension {}",
            x.d(),
            phi.input_dim()
        )));
    }
    x.map_blocks(phi.output_dim(), |b| phi.apply_unchecked(b))
}

/// Square-shape check shared by file loaders.
pub fn validate_square_input(m: &ComplexMatrix, k: usize) -> Result<()> {
    let n = ensure_square(m)?;
    if n != k {
        return Err(Error::Dimension(format!("expected {k}x{k}, got {n}x{n}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::trial_rng;
    use crate::linalg::{diag_real, frobenius, identity, is_psd, min_eigenvalue, trace, Tolerance};
    use crate::random::{gaussian, wishart};
    use crate::stormer::{gram_block, OperatorPair};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn identity_and_transpose_from_kraus() {
        let id = make_decomposable(vec![identity(2)], vec![]).unwrap();
        let tr = make_decomposable(vec![], vec![identity(2)]).unwrap();
        assert_eq!(id.kind(), MapKind::KrausCp);
        assert_eq!(tr.kind(), MapKind::KrausCocp);
        let mut rng = trial_rng(1, 0);
        let x = gaussian(&mut rng, 2, 2);
        assert!(frobenius(&(id.apply(&x).unwrap() - &x)) < 1e-15);
        assert!(frobenius(&(tr.apply(&x).unwrap() - x.transpose())) < 1e-15);
        let both = make_decomposable(vec![identity(2)], vec![identity(2)]).unwrap();
        assert_eq!(both.kind(), MapKind::Sum);
    }

    #[test]
    fn make_decomposable_validates_shapes() {
        assert!(make_decomposable(vec![], vec![]).is_err());
        let err = make_decomposable(vec![identity(2)], vec![crate::linalg::zeros(3, 2)]).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
        let rect = make_decomposable(vec![crate::linalg::zeros(4, 2)], vec![]).unwrap();
        assert_eq!((rect.input_dim(), rect.output_dim()), (2, 4));
    }

    #[test]
    fn choi_fixture_values() {
        let phi = choi_fixture();
        let y = phi.apply(&identity(3)).unwrap();
        assert!(frobenius(&(y - identity(3) * c64(2.0, 0.0))) < 1e-15);
        let y = phi.apply(&diag_real(&[1.0, 0.0, 0.0])).unwrap();
        assert!(frobenius(&(y - diag_real(&[1.0, 1.0, 0.0]))) < 1e-15);
    }

    #[test]
    fn choi_fixture_is_positive_but_not_cp() {
        let phi = choi_fixture();
        let mut rng = trial_rng(2, 0);
        for trial in 0..1000 {
            let x = wishart(&mut rng, 3, 1 + trial % 3);
            assert!(is_psd(&phi.apply(&x).unwrap(), tol()).unwrap());
        }
        assert!(min_eigenvalue(&phi.choi_matrix()).unwrap() < -0.5);
    }

    #[test]
    fn choi_representation_matches_direct_application() {
        let mut rng = trial_rng(3, 0);
        let k = gaussian(&mut rng, 3, 2);
        let l = gaussian(&mut rng, 3, 2);
        let direct = make_decomposable(vec![k], vec![l]).unwrap();
        let via_choi = from_choi(direct.choi_matrix(), 2, 3).unwrap();
        let x = gaussian(&mut rng, 2, 2);
        let a = direct.apply(&x).unwrap();
        let b = via_choi.apply(&x).unwrap();
        assert!(frobenius(&(a - b)) < 1e-13);
        assert!(from_choi(identity(5), 2, 3).is_err());
    }

    #[test]
    fn dual_satisfies_trace_pairing() {
        let mut rng = trial_rng(4, 0);
        for phi in [
            choi_fixture(),
            make_decomposable(vec![gaussian(&mut rng, 4, 3)], vec![gaussian(&mut rng, 4, 3)]).unwrap(),
        ] {
            let dual = phi.dual();
            let x = gaussian(&mut rng, 3, 3);
            let y = gaussian(&mut rng, phi.output_dim(), phi.output_dim());
            let lhs = trace(&(phi.apply(&x).unwrap() * &y));
            let rhs = trace(&(&x * dual.apply(&y)));
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn entrywise_application() {
        let mut rng = trial_rng(5, 0);
        let p = OperatorPair::new(gaussian(&mut rng, 3, 3), gaussian(&mut rng, 3, 3)).unwrap();
        let x = gram_block(&p);
        let id = PositiveMap::Named(NamedMap::Identity(3));
        assert_eq!(apply_map_entrywise(&id, &x).unwrap(), x);

        // x ↦ tr(x)·I has Kraus operators E_ij
        let mut kraus = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let mut e = crate::linalg::zeros(3, 3);
                e[(i, j)] = c64(1.0, 0.0);
                kraus.push(e);
            }
        }
        let trace_map = make_decomposable(kraus, vec![]).unwrap();
        let y = apply_map_entrywise(&trace_map, &x).unwrap();
        for (b, out) in x.blocks().iter().zip(y.blocks()) {
            assert!(frobenius(&(out - identity(3) * trace(b))) < 1e-12);
        }
        assert!(is_psd(&y.assembled(), tol()).unwrap());

        let wrong = PositiveMap::Named(NamedMap::Identity(2));
        assert!(matches!(
            apply_map_entrywise(&wrong, &x),
            Err(Error::Dimension(_))
        ));
    }
}
