//! Random matrix ensembles used by the trial generators and the test suites.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::block::Partition2;
use crate::linalg::{c64, condition_number, identity, ComplexMatrix};
use crate::stormer::OperatorPair;

/// Largest condition number accepted for generated `a₁`.
pub const GENERATOR_MAX_CONDITION: f64 = 1e3;

/// Matrix with i.i.d. standard complex Gaussian entries (`E|z|² = 1`).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(s * re, s * im)
    })
}

/// Random Hermitian matrix `(G + G*)/2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian(rng, n, n);
    (&g + g.adjoint()) * c64(0.5, 0.0)
}

/// Wishart-type PSD matrix `G G*` with `G` of shape `n × rank`.
pub fn wishart<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
    let g = gaussian(rng, n, rank);
    &g * g.adjoint()
}

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = gaussian(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c64(1.0, 0.0)
        };
        for x in q.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Uniform point in the closed disk of the given radius.
pub fn disk_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> num_complex::Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    c64(r * theta.cos(), r * theta.sin())
}

/// Normal matrix `U diag(λ) U*` with `λ` uniform in a disk.
pub fn normal_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> ComplexMatrix {
    let u = haar_unitary(rng, n);
    let lambdas: Vec<_> = (0..n).map(|_| disk_point(rng, radius)).collect();
    let mut scaled = u.clone();
    for (j, l) in lambdas.iter().enumerate() {
        for x in scaled.column_mut(j).iter_mut() {
            *x *= l;
        }
    }
    scaled * u.adjoint()
}

/// Complex Gaussian matrix conditioned on `cond ≤ max_condition`.
pub fn well_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize, max_condition: f64) -> ComplexMatrix {
    loop {
        let a = gaussian(rng, n, n);
        if condition_number(&a) <= max_condition {
            return a;
        }
    }
}

/// Pair `(a₁, T a₁)` with `a₁` well conditioned and `T` random normal.
///
/// Every invertible-`a₁` pair satisfying the Størmer condition has this form.
pub fn stormer_pair<R: Rng + ?Sized>(rng: &mut R, d: usize) -> OperatorPair {
    let a1 = well_conditioned(rng, d, GENERATOR_MAX_CONDITION);
    let t = normal_matrix(rng, d, 2.0);
    let a2 = &t * &a1;
    OperatorPair::new(a1, a2).expect("conformal by construction")
}

/// Pair `(a₁, T a₁)` with `a₁` well conditioned and `T` a generic Gaussian
/// matrix (almost surely not normal).
pub fn generic_pair<R: Rng + ?Sized>(rng: &mut R, d: usize) -> (OperatorPair, ComplexMatrix) {
    let a1 = well_conditioned(rng, d, GENERATOR_MAX_CONDITION);
    let t = gaussian(rng, d, d);
    let a2 = &t * &a1;
    (OperatorPair::new(a1, a2).expect("conformal by construction"), t)
}

/// Random two-block partition with an `n×n` and a `k×k` diagonal block.
///
/// A quarter of the draws are positive Wishart matrices of random rank (so
/// singular diagonal blocks are common); the rest are perturbed to straddle the
/// boundary: the off-diagonal block is rescaled, replaced, or a diagonal block
/// is shifted down.
pub fn partition<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Partition2 {
    let total = n + k;
    let rank = rng.random_range(1..=total);
    let m = wishart(rng, total, rank) * c64(1.0 / rank as f64, 0.0);
    let mut p = Partition2::split(&m, n).expect("valid split");
    match rng.random_range(0..4) {
        0 => {}
        1 => p.b *= c64(rng.random_range(0.5..2.0), 0.0),
        2 => p.b = gaussian(rng, n, k) * c64(rng.random_range(0.05..1.0), 0.0),
        _ => {
            let shift = rng.random_range(0.0..0.3);
            if rng.random::<bool>() {
                p.a -= identity(n) * c64(shift, 0.0);
            } else {
                p.c -= identity(k) * c64(shift, 0.0);
            }
        }
    }
    p
}

/// Candidate for hyponormality: a normal matrix, perturbed with probability
/// 3/4 by a Gaussian matrix of size `10^u`, `u` uniform in `[-14, 0]`.
pub fn hyponormal_candidate<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let t = normal_matrix(rng, d, 2.0);
    if rng.random_range(0..4) == 0 {
        return t;
    }
    let size = 10f64.powf(rng.random_range(-14.0..0.0));
    t + gaussian(rng, d, d) * c64(size, 0.0)
}
