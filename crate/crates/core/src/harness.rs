//! Testing positive maps on block matrices that satisfy the Størmer condition.
//!
//! A decomposable map sends every such block matrix to a positive one, so
//! [`theorem1_necessity_trial`] should never record a violation for it.
//! For a map that is not decomposable some Størmer block matrix is sent
//! outside the positive cone; [`witness_search`] looks for one.

use rand::Rng;

use crate::exec::{derive_seed, map_indices, trial_rng, Schedule};
use crate::linalg::{
    c64, eig_hermitian_unchecked, hermitian_part, min_eig_and_norm, trace, ComplexMatrix, ComplexVector,
    Tolerance,
};
use crate::maps::{apply_map_entrywise, DualMap, PositiveMap};
use crate::random::{gaussian, stormer_pair, wishart};
use crate::stormer::{gram_block, stormer_report, swap_block, OperatorBlockMatrix};

/// Random trace-one block matrix satisfying the Størmer condition.
///
/// For `n = 2` this is the normalized Gram block of a random Størmer pair.
/// Otherwise a Wishart matrix of random rank is depolarized by the smallest
/// multiple of the identity that makes its index swap positive.
pub fn stormer_sample<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> OperatorBlockMatrix {
    let x = if n == 2 {
        gram_block(&stormer_pair(rng, d))
    } else {
        let dim = n * d;
        let rank = rng.random_range(1..=dim);
        let w = wishart(rng, dim, rank);
        OperatorBlockMatrix::from_assembled(n, d, &depolarize_to_stormer(&w, n, d))
            .expect("shape by construction")
    };
    let tr = trace(&x.assembled()).re;
    x.scaled(1.0 / tr)
}

/// `W + μI` with the least `μ ≥ 0` (up to a relative margin) making the
/// index-swapped matrix positive. `W` must be positive.
pub fn depolarize_to_stormer(w: &ComplexMatrix, n: usize, d: usize) -> ComplexMatrix {
    let blocks = OperatorBlockMatrix::from_assembled(n, d, w).expect("square nd matrix");
    let (min_swapped, norm) = min_eig_and_norm(&hermitian_part(&swap_block(&blocks).assembled()));
    let mu = if min_swapped < 0.0 {
        -min_swapped * (1.0 + 1e-6) + 1e-12 * norm
    } else {
        0.0
    };
    let mut out = hermitian_part(w);
    for i in 0..n * d {
        out[(i, i)] += c64(mu, 0.0);
    }
    out
}

/// Shared settings for randomized map tests.
#[derive(Debug, Clone, Copy)]
pub struct TrialConfig {
    pub seed: u64,
    pub n: usize,
    pub tol: Tolerance,
    pub schedule: Schedule,
}

impl TrialConfig {
    pub fn new(seed: u64, n: usize, tol: Tolerance) -> Self {
        TrialConfig {
            seed,
            n,
            tol,
            schedule: Schedule::default(),
        }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecessityReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest eigenvalue seen over all images (trace-one inputs).
    pub worst_min_eig: f64,
}

/// Minimum eigenvalue of the image of `x` and the threshold it is judged against.
fn image_margin(phi: &PositiveMap, x: &OperatorBlockMatrix, tol: Tolerance) -> (f64, f64) {
    let y = apply_map_entrywise(phi, x).expect("dimensions checked by caller");
    let (min, norm) = min_eig_and_norm(&hermitian_part(&y.assembled()));
    (min, tol.threshold(norm))
}

/// Applies `phi` to `trials` random Størmer block matrices and counts images
/// whose minimum eigenvalue falls below the negative threshold.
pub fn theorem1_necessity_trial(phi: &PositiveMap, trials: usize, cfg: &TrialConfig) -> NecessityReport {
    let d = phi.input_dim();
    let seed = derive_seed(cfg.seed, "necessity");
    let margins = map_indices(trials, cfg.schedule, |idx| {
        let mut rng = trial_rng(seed, idx as u64);
        let x = stormer_sample(&mut rng, cfg.n, d);
        image_margin(phi, &x, cfg.tol)
    });
    let violations = margins.iter().filter(|(min, thr)| *min < -thr).count();
    let worst_min_eig = margins.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    NecessityReport {
        trials,
        violations,
        worst_min_eig,
    }
}

/// A Størmer block matrix whose image under the map is not positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Trace-one block matrix.
    pub x: OperatorBlockMatrix,
    /// Minimum eigenvalue of the image.
    pub min_eig: f64,
    /// Smaller of the minimum eigenvalues of `x` and its index swap.
    pub stormer_margin: f64,
}

/// Re-evaluates a stored witness candidate.
pub fn replay_witness(
    phi: &PositiveMap,
    x: &OperatorBlockMatrix,
    tol: Tolerance,
) -> crate::error::Result<Witness> {
    let report = stormer_report(x, tol)?;
    let y = apply_map_entrywise(phi, x)?;
    let (min_eig, _) = min_eig_and_norm(&hermitian_part(&y.assembled()));
    Ok(Witness {
        x: x.clone(),
        min_eig,
        stormer_margin: report.direct.min_eig.min(report.swapped.min_eig),
    })
}

/// Witness acceptance: Størmer condition verified and image eigenvalue below
/// `-10·threshold`.
pub fn is_witness(phi: &PositiveMap, x: &OperatorBlockMatrix, tol: Tolerance) -> bool {
    match stormer_report(x, tol) {
        Ok(report) if report.holds => {
            let (min, thr) = image_margin(phi, x, tol);
            min < -10.0 * thr
        }
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub witness: Option<Witness>,
    /// Smallest image eigenvalue reached over all restarts.
    pub best_min_eig: f64,
    pub evaluations: usize,
    pub restarts: usize,
}

impl WitnessReport {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

/// Evaluations per restart.
pub const RESTART_BUDGET: usize = 4_000;
/// Restarts run together before checking whether to stop.
const RESTART_BATCH: usize = 8;

/// Randomized search for a witness against `phi` on `n × n` block matrices.
///
/// Each restart starts from the trial generator and hill-climbs over a Gram
/// factor `G` of `X = GG*/tr(GG*)`. After every move `X` is projected back
/// into the Størmer set by depolarizing just enough to make its index swap
/// positive. Moves follow the gradient of the image's smallest eigenvalue
/// through that projection (on all columns of `G` or on one), or kick a random
/// column; only improving moves are kept. Restarts run in fixed batches and
/// the search stops after the first batch containing a witness, keeping the
/// deepest point (ties go to the lower restart index), so the result depends
/// only on `(seed, budget)`.
pub fn witness_search(phi: &PositiveMap, budget: usize, cfg: &TrialConfig) -> WitnessReport {
    let d = phi.input_dim();
    let landscape = Landscape {
        phi,
        dual: phi.dual(),
        image_of_identity: apply_map_entrywise(
            phi,
            &OperatorBlockMatrix::from_assembled(cfg.n, d, &ComplexMatrix::identity(cfg.n * d, cfg.n * d))
                .expect("square"),
        )
        .expect("dimensions match")
        .assembled(),
        n: cfg.n,
        d,
    };
    let seed = derive_seed(cfg.seed, "witness");
    let restarts = budget.div_ceil(RESTART_BUDGET).max(1);
    let mut best: Option<(f64, ComplexMatrix)> = None;
    let mut evaluations = 0;
    let mut completed = 0;
    let mut witness = None;

    let mut start = 0;
    while start < restarts && witness.is_none() {
        let end = (start + RESTART_BATCH).min(restarts);
        let results = map_indices(end - start, cfg.schedule, |offset| {
            let idx = start + offset;
            let share = if idx + 1 == restarts {
                budget - RESTART_BUDGET * (restarts - 1)
            } else {
                RESTART_BUDGET
            };
            let mut rng = trial_rng(seed, idx as u64);
            climb(&landscape, &mut rng, share.max(1))
        });
        for outcome in results {
            evaluations += outcome.evaluations;
            completed += 1;
            if best.as_ref().is_none_or(|(f, _)| outcome.value < *f) {
                best = Some((outcome.value, outcome.x.clone()));
            }
        }
        if let Some((_, x)) = &best {
            let blocks = OperatorBlockMatrix::from_assembled(cfg.n, d, x).expect("shape");
            if is_witness(phi, &blocks, cfg.tol) {
                witness = replay_witness(phi, &blocks, cfg.tol).ok();
            }
        }
        start = end;
    }

    WitnessReport {
        witness,
        best_min_eig: best.map_or(f64::INFINITY, |(f, _)| f),
        evaluations,
        restarts: completed,
    }
}

struct ClimbOutcome {
    x: ComplexMatrix,
    value: f64,
    evaluations: usize,
}

/// Evaluated search point. `x` is the trace-one matrix after projection into
/// the Størmer set, `value` the smallest eigenvalue of its image.
struct Point {
    g: ComplexMatrix,
    x: ComplexMatrix,
    value: f64,
    /// Gradient of `value` with respect to the trace-one `GG*/tr(GG*)`.
    gradient: ComplexMatrix,
}

/// Fixed data for one search.
struct Landscape<'a> {
    phi: &'a PositiveMap,
    dual: DualMap,
    /// `(id ⊗ Φ)(I)`.
    image_of_identity: ComplexMatrix,
    n: usize,
    d: usize,
}

/// Clearance kept from the boundary of the swapped-positive cone.
const PROJECTION_MARGIN: f64 = 1e-13;

impl Landscape<'_> {
    fn dim(&self) -> usize {
        self.n * self.d
    }

    /// `(id ⊗ Φ†)(vv*)`: gradient of `⟨v, (id ⊗ Φ)(X) v⟩` with respect to `X`.
    fn pullback(&self, v: &ComplexVector) -> ComplexMatrix {
        let (n, d, l) = (self.n, self.d, self.phi.output_dim());
        let outer = v * v.adjoint();
        let mut w = ComplexMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                let block = outer.view((i * l, j * l), (l, l)).into_owned();
                w.view_mut((i * d, j * d), (d, d))
                    .copy_from(&self.dual.apply(&block));
            }
        }
        hermitian_part(&w)
    }

    /// Normalizes `GG*`, depolarizes it into the Størmer set when its index
    /// swap is not positive, and evaluates the image.
    ///
    /// With `s = max(0, ε - λ_min(X^Γ))` the projected point is
    /// `(X + sI)/(1 + sN)`, and its value is differentiable almost everywhere
    /// in `X`; the returned gradient accounts for the projection.
    fn evaluate(&self, g: ComplexMatrix) -> Option<Point> {
        let (n, d) = (self.n, self.d);
        let dim = self.dim();
        let raw = &g * g.adjoint();
        let tr = trace(&raw).re;
        if !(tr.is_finite() && tr > 0.0) {
            return None;
        }
        let g = g / c64(tr.sqrt(), 0.0);
        let x = hermitian_part(&(raw / c64(tr, 0.0)));

        let blocks = OperatorBlockMatrix::from_assembled(n, d, &x).ok()?;
        let swapped = eig_hermitian_unchecked(&hermitian_part(&swap_block(&blocks).assembled()));
        let swapped_min = swapped.min_eigenvalue();
        let shift = (PROJECTION_MARGIN - swapped_min).max(0.0);
        let scale = 1.0 + shift * dim as f64;
        let mut projected = x.clone();
        for i in 0..dim {
            projected[(i, i)] += c64(shift, 0.0);
        }
        projected /= c64(scale, 0.0);

        let image = apply_map_entrywise(
            self.phi,
            &OperatorBlockMatrix::from_assembled(n, d, &projected).ok()?,
        )
        .ok()?
        .assembled();
        let eig = eig_hermitian_unchecked(&hermitian_part(&image));
        let value = eig.min_eigenvalue();
        if !value.is_finite() {
            return None;
        }
        let v = eig.eigenvectors.column(0).into_owned();

        let mut gradient = self.pullback(&v);
        if shift > 0.0 {
            // d shift = -tr((uu*)^Γ dX) for the swapped minimum eigenvector u
            let u = swapped.eigenvectors.column(0).into_owned();
            let outer = OperatorBlockMatrix::from_assembled(n, d, &(&u * u.adjoint())).ok()?;
            let swapped_outer = swap_block(&outer).assembled();
            let c = (v.adjoint() * &self.image_of_identity * &v)[(0, 0)].re;
            gradient -= swapped_outer * c64(c - dim as f64 * value, 0.0);
        }
        gradient /= c64(scale, 0.0);

        Some(Point {
            g,
            x: projected,
            value,
            gradient,
        })
    }

    fn fallback(&self) -> ClimbOutcome {
        let dim = self.dim();
        ClimbOutcome {
            x: ComplexMatrix::identity(dim, dim) / c64(dim as f64, 0.0),
            value: f64::INFINITY,
            evaluations: 0,
        }
    }
}

/// Descent direction for `G` from a gradient `M` at trace-one `X = GG*`:
/// `(M - tr(MX)·I) G`, optionally restricted to one column.
fn descent_direction(point: &Point, column: Option<usize>) -> ComplexMatrix {
    let centre = trace(&(&point.gradient * &point.x)).re;
    let mut dir = &point.gradient * &point.g - &point.g * c64(centre, 0.0);
    if let Some(col) = column {
        for j in 0..dir.ncols() {
            if j != col {
                dir.column_mut(j).fill(c64(0.0, 0.0));
            }
        }
    }
    dir
}

fn climb<R: Rng + ?Sized>(landscape: &Landscape<'_>, rng: &mut R, budget: usize) -> ClimbOutcome {
    let dim = landscape.dim();
    let mut evaluations = 0;

    // start from the trial generator: X₀ = W + μI, factored as G = X₀^{1/2}
    let mut current = loop {
        evaluations += 1;
        let rank = rng.random_range(1..=dim);
        let w = wishart(rng, dim, rank);
        let start = depolarize_to_stormer(&w, landscape.n, landscape.d);
        let g = eig_hermitian_unchecked(&start).map_spectrum(|e| e.max(0.0).sqrt());
        if let Some(p) = landscape.evaluate(g) {
            break p;
        }
        if evaluations >= budget {
            return ClimbOutcome {
                evaluations,
                ..landscape.fallback()
            };
        }
    };

    let mut step = 0.1;
    let mut kick = 0.05;
    while evaluations < budget {
        evaluations += 1;
        let roll: f64 = rng.random();
        let gradient_move = roll < 0.8;
        let candidate_g = if gradient_move {
            // all columns most of the time, a single column otherwise
            let column = (roll >= 0.6).then(|| rng.random_range(0..dim));
            let dir = descent_direction(&current, column);
            let norm = dir.norm();
            if norm == 0.0 {
                continue;
            }
            &current.g - dir * c64(step / norm, 0.0)
        } else {
            let col = rng.random_range(0..dim);
            let mut g = current.g.clone();
            let noise = gaussian(rng, dim, 1);
            let mut column = g.column_mut(col);
            column += noise.column(0) * c64(kick / (dim as f64).sqrt(), 0.0);
            g
        };
        match landscape.evaluate(candidate_g) {
            Some(candidate) if candidate.value < current.value => {
                current = candidate;
                if gradient_move {
                    step = (step * 1.3).min(1.0);
                } else {
                    kick = (kick * 1.3).min(0.5);
                }
            }
            _ => {
                if gradient_move {
                    step = (step * 0.6).max(1e-8);
                } else {
                    kick = (kick * 0.6).max(1e-6);
                }
            }
        }
    }

    ClimbOutcome {
        x: current.x,
        value: current.value,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{choi_fixture, make_decomposable, NamedMap};
    use crate::stormer::stormer_test;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn samples_satisfy_the_condition() {
        for (n, d) in [(2, 3), (3, 2), (3, 3), (4, 2)] {
            for idx in 0..20 {
                let mut rng = trial_rng(9, idx);
                let x = stormer_sample(&mut rng, n, d);
                assert!(stormer_test(&x, tol()).unwrap(), "n={n} d={d}");
                assert!((trace(&x.assembled()).re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_and_transpose_never_violate() {
        for n in [2, 3] {
            let cfg = TrialConfig::new(0, n, tol());
            for phi in [
                PositiveMap::Named(NamedMap::Identity(3)),
                PositiveMap::Named(NamedMap::Transpose(3)),
            ] {
                let report = theorem1_necessity_trial(&phi, 200, &cfg);
                assert_eq!(report.violations, 0);
                assert_eq!(report.trials, 200);
            }
        }
    }

    #[test]
    fn trials_are_schedule_independent() {
        let phi = choi_fixture();
        let cfg = TrialConfig::new(5, 3, tol());
        let a = theorem1_necessity_trial(&phi, 64, &cfg.with_schedule(Schedule::Sequential));
        let b = theorem1_necessity_trial(&phi, 64, &cfg.with_schedule(Schedule::Parallel));
        assert_eq!(a, b);
    }

    #[test]
    fn no_witness_against_identity() {
        let phi = PositiveMap::Named(NamedMap::Identity(2));
        let report = witness_search(&phi, 2_000, &TrialConfig::new(1, 2, tol()));
        assert!(!report.found());
        assert!(report.best_min_eig > -1e-9);
    }

    #[test]
    fn no_witness_against_decomposable_map() {
        let mut rng = trial_rng(3, 0);
        let phi = make_decomposable(
            vec![gaussian(&mut rng, 3, 2), gaussian(&mut rng, 3, 2)],
            vec![gaussian(&mut rng, 3, 2)],
        )
        .unwrap();
        let report = witness_search(&phi, 4_000, &TrialConfig::new(2, 2, tol()));
        assert!(!report.found());
    }

    #[test]
    fn witness_search_is_schedule_independent() {
        let phi = choi_fixture();
        let cfg = TrialConfig::new(7, 3, tol());
        let a = witness_search(&phi, 3_000, &cfg.with_schedule(Schedule::Sequential));
        let b = witness_search(&phi, 3_000, &cfg.with_schedule(Schedule::Parallel));
        assert_eq!(a, b);
    }
}
