//! Invariant suites shared by `stormer-kit selftest` and the acceptance tests.
//!
//! Every suite draws its inputs from per-trial streams derived from one seed
//! and compares the library against an independent oracle, usually a direct
//! eigenvalue computation.

use rand::Rng;

use crate::block::{psd_oracle, psd_via_contraction};
use crate::exec::{derive_seed, map_indices, trial_rng, Schedule};
use crate::harness::{theorem1_necessity_trial, witness_search, TrialConfig};
use crate::linalg::{
    c64, is_hyponormal, is_normal, min_eigenvalue, op_norm, psd_report, relative_frobenius, ComplexMatrix,
    Tolerance,
};
use crate::maps::{choi_fixture, make_decomposable, NamedMap, PositiveMap};
use crate::random::{gaussian, generic_pair, hyponormal_candidate, partition, stormer_pair};
use crate::states::{
    is_ppt, partial_transpose, separable_decomposition, separable_residual, state_from_block, DensityState,
    Factor,
};
use crate::stormer::{
    canonical_decomposition, dual_decomposition, gram_block, ratio_operator, reconstruct_block,
    search_nontrivial_sum, stormer_test, DecompositionOutcome, OperatorPair,
};

/// Largest operator dimension drawn by the randomized suites.
pub const MAX_DIM: usize = 8;

/// Bound on reconstruction residuals.
pub const RECONSTRUCTION_BOUND: f64 = 1e-8;

/// Image eigenvalues below this count as positivity violations.
pub const VIOLATION_FLOOR: f64 = -1e-8;

/// `(n, k)` shapes exercised by the partition suite.
pub const PARTITION_SHAPES: [(usize, usize); 3] = [(2, 3), (3, 5), (4, 2)];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub trials: usize,
    pub failures: usize,
    /// Suite-specific figures, in a fixed order.
    pub metrics: Vec<(&'static str, f64)>,
}

impl SuiteOutcome {
    fn tally(name: &'static str, trials: usize, failures: usize, metrics: Vec<(&'static str, f64)>) -> Self {
        SuiteOutcome {
            name,
            passed: failures == 0,
            trials,
            failures,
            metrics,
        }
    }
}

/// Trial counts for one run of all suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSizes {
    pub gram: usize,
    pub partitions: usize,
    pub characterization: usize,
    pub reconstruction: usize,
    pub separability: usize,
    pub maps_per_family: usize,
    pub map_trials: usize,
    pub hyponormal: usize,
    pub nontrivial_attempts: usize,
    pub witness_budget: usize,
}

impl SuiteSizes {
    /// Counts small enough for an interactive self-check.
    pub fn reduced() -> Self {
        SuiteSizes {
            gram: 100,
            partitions: 100,
            characterization: 100,
            reconstruction: 50,
            separability: 50,
            maps_per_family: 3,
            map_trials: 100,
            hyponormal: 100,
            nontrivial_attempts: 200,
            witness_budget: 64_000,
        }
    }
}

fn stream(seed: u64, label: &str, idx: usize) -> rand_chacha::ChaCha8Rng {
    trial_rng(derive_seed(seed, label), idx as u64)
}

fn dim_for<R: Rng + ?Sized>(rng: &mut R, min: usize) -> usize {
    rng.random_range(min..=MAX_DIM)
}

/// Gram blocks of arbitrary pairs are positive.
pub fn gram_positivity(seed: u64, trials: usize, schedule: Schedule) -> SuiteOutcome {
    let margins = map_indices(trials, schedule, |idx| {
        let mut rng = stream(seed, "gram", idx);
        let d = dim_for(&mut rng, 1);
        let p = OperatorPair::new(gaussian(&mut rng, d, d), gaussian(&mut rng, d, d)).expect("square");
        let m = gram_block(&p).assembled();
        let min = min_eigenvalue(&m).expect("Hermitian by construction");
        min / (1.0 + op_norm(&m))
    });
    let failures = margins.iter().filter(|&&r| r < -1e-9).count();
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    SuiteOutcome::tally(
        "gram-positivity",
        trials,
        failures,
        vec![("worst_relative_min_eig", worst)],
    )
}

/// The contraction test agrees with the eigenvalue oracle away from the
/// boundary band `|λ_min| ≤ 2·threshold`.
pub fn contraction_equivalence(seed: u64, trials: usize, tol: Tolerance, schedule: Schedule) -> SuiteOutcome {
    let results = map_indices(trials, schedule, |idx| {
        let mut rng = stream(seed, "partition", idx);
        let (n, k) = PARTITION_SHAPES[idx % PARTITION_SHAPES.len()];
        let p = partition(&mut rng, n, k);
        let cert = psd_via_contraction(&p, tol).expect("valid partition");
        let oracle = psd_oracle(&p, tol).expect("valid partition");
        let report = psd_report(&p.assemble(), tol).expect("Hermitian partition");
        let in_band = report.min_eig.abs() <= 2.0 * report.threshold;
        (cert.psd == oracle, in_band, oracle)
    });
    let failures = results.iter().filter(|(agree, band, _)| !agree && !band).count();
    let band_disagreements = results.iter().filter(|(agree, band, _)| !agree && *band).count();
    let positives = results.iter().filter(|r| r.2).count();
    SuiteOutcome::tally(
        "contraction-equivalence",
        trials,
        failures,
        vec![
            ("band_disagreements", band_disagreements as f64),
            ("oracle_positive", positives as f64),
        ],
    )
}

/// `stormer_test(gram_block(a₁, a₂))` agrees with normality of `a₂a₁⁻¹`, on
/// `trials` normal and `trials` generic ratio operators.
pub fn characterization(seed: u64, trials: usize, tol: Tolerance, schedule: Schedule) -> SuiteOutcome {
    let mismatches = map_indices(2 * trials, schedule, |idx| {
        let mut rng = stream(seed, "characterization", idx);
        let (p, expect_normal) = if idx < trials {
            let d = dim_for(&mut rng, 1);
            (stormer_pair(&mut rng, d), true)
        } else {
            let d = dim_for(&mut rng, 2);
            (generic_pair(&mut rng, d).0, false)
        };
        let holds = stormer_test(&gram_block(&p), tol).expect("Hermitian by construction");
        let normal = is_normal(&ratio_operator(&p, crate::linalg::DEFAULT_RCOND).t, tol).expect("square");
        (holds != normal, normal != expect_normal)
    });
    let failures = mismatches.iter().filter(|m| m.0).count();
    let generator_misses = mismatches.iter().filter(|m| m.1).count();
    SuiteOutcome::tally(
        "characterization",
        2 * trials,
        failures,
        vec![("generator_misses", generator_misses as f64)],
    )
}

fn canonical(outcome: DecompositionOutcome) -> Option<crate::stormer::CanonicalDecomposition> {
    match outcome {
        DecompositionOutcome::Canonical(dec) => Some(dec),
        DecompositionOutcome::Degenerate(_) => None,
    }
}

/// Canonical and dual decompositions reassemble the Gram block.
pub fn reconstruction(seed: u64, trials: usize, tol: Tolerance, schedule: Schedule) -> SuiteOutcome {
    let residuals = map_indices(trials, schedule, |idx| {
        let mut rng = stream(seed, "reconstruction", idx);
        let d = dim_for(&mut rng, 1);
        let p = stormer_pair(&mut rng, d);
        let direct = canonical_decomposition(&p, tol)
            .ok()
            .and_then(canonical)
            .map(|dec| relative_frobenius(&reconstruct_block(&dec).assembled(), &gram_block(&p).assembled()));
        let dual = dual_decomposition(&p, tol).ok().and_then(canonical).map(|dec| {
            relative_frobenius(
                &reconstruct_block(&dec).assembled(),
                &gram_block(&p.swapped()).assembled(),
            )
        });
        (direct.unwrap_or(f64::INFINITY), dual.unwrap_or(f64::INFINITY))
    });
    let failures = residuals
        .iter()
        .filter(|(a, b)| !(*a <= RECONSTRUCTION_BOUND && *b <= RECONSTRUCTION_BOUND))
        .count();
    let worst = residuals.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_dual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    SuiteOutcome::tally(
        "reconstruction",
        trials,
        failures,
        vec![("worst_residual", worst), ("worst_dual_residual", worst_dual)],
    )
}

/// States built from Størmer Gram blocks are PPT and explicitly separable.
pub fn separability(seed: u64, trials: usize, tol: Tolerance, schedule: Schedule) -> SuiteOutcome {
    let residuals = map_indices(trials, schedule, |idx| {
        let mut rng = stream(seed, "separability", idx);
        let d = dim_for(&mut rng, 1);
        let p = stormer_pair(&mut rng, d);
        let rho = state_from_block(&gram_block(&p)).ok()?;
        if !is_ppt(&rho, tol) {
            return None;
        }
        let dec = canonical(canonical_decomposition(&p, tol).ok()?)?;
        let sep = separable_decomposition(&dec).ok()?;
        if !sep.check_invariants(1e-10) {
            return None;
        }
        Some(separable_residual(&sep, &rho))
    });
    let failures = residuals
        .iter()
        .filter(|r| !matches!(r, Some(x) if *x <= RECONSTRUCTION_BOUND))
        .count();
    let worst = residuals
        .iter()
        .map(|r| r.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    SuiteOutcome::tally("separability", trials, failures, vec![("worst_residual", worst)])
}

/// Random decomposable map with input dimension `d`. `kind` 0 is CP, 1 co-CP,
/// anything else a sum of both. Kraus operators are scaled so `‖Φ(I)‖ ≈ 1`.
pub fn random_decomposable_map<R: Rng + ?Sized>(rng: &mut R, d: usize, kind: usize) -> PositiveMap {
    let out = rng.random_range(1..=4);
    let mut draw = |count: usize| -> Vec<ComplexMatrix> {
        (0..count)
            .map(|_| gaussian(rng, out, d) * c64(1.0 / ((count * d) as f64).sqrt(), 0.0))
            .collect()
    };
    let (cp, cocp) = match kind {
        0 => (draw(3), Vec::new()),
        1 => (Vec::new(), draw(3)),
        _ => (draw(2), draw(2)),
    };
    make_decomposable(cp, cocp).expect("conformal Kraus operators")
}

/// Decomposable maps never send a Størmer block matrix outside the positive
/// cone, for `n = 2` and `n = 3`.
pub fn necessity(
    seed: u64,
    maps_per_family: usize,
    trials: usize,
    tol: Tolerance,
    schedule: Schedule,
) -> SuiteOutcome {
    let mut maps: Vec<PositiveMap> = Vec::new();
    for d in 1..=4 {
        maps.push(PositiveMap::Named(NamedMap::Identity(d)));
        maps.push(PositiveMap::Named(NamedMap::Transpose(d)));
    }
    for kind in 0..3 {
        for j in 0..maps_per_family {
            let mut rng = stream(seed, "decomposable-map", kind * 1000 + j);
            let d = rng.random_range(1..=4);
            maps.push(random_decomposable_map(&mut rng, d, kind));
        }
    }
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    let mut total = 0;
    for (m, phi) in maps.iter().enumerate() {
        for n in [2, 3] {
            let cfg =
                TrialConfig::new(derive_seed(seed, &format!("map-{m}-{n}")), n, tol).with_schedule(schedule);
            let report = theorem1_necessity_trial(phi, trials, &cfg);
            total += report.trials;
            worst = worst.min(report.worst_min_eig);
            if report.violations > 0 || report.worst_min_eig < VIOLATION_FLOOR {
                failures += 1;
            }
        }
    }
    SuiteOutcome::tally(
        "necessity",
        total,
        failures,
        vec![("maps", maps.len() as f64), ("worst_min_eig", worst)],
    )
}

/// Matrices accepted as hyponormal are normal.
///
/// Candidates are drawn until `samples` of them pass the hyponormality test;
/// `tried` records how many draws that took.
pub fn hyponormal_normal(seed: u64, samples: usize, tol: Tolerance) -> SuiteOutcome {
    let mut rng = stream(seed, "hyponormal", 0);
    let mut accepted = 0;
    let mut tried = 0;
    let mut failures = 0;
    while accepted < samples {
        tried += 1;
        let d = dim_for(&mut rng, 1);
        let t = hyponormal_candidate(&mut rng, d);
        if !is_hyponormal(&t, tol).expect("square") {
            continue;
        }
        accepted += 1;
        if !is_normal(&t, tol).expect("square") {
            failures += 1;
        }
    }
    SuiteOutcome::tally(
        "hyponormal-normal",
        samples,
        failures,
        vec![("candidates", tried as f64)],
    )
}

/// A Størmer Gram sum with a violating summand exists and replays.
pub fn nontriviality(seed: u64, attempts: usize, tol: Tolerance) -> SuiteOutcome {
    let found = search_nontrivial_sum(derive_seed(seed, "nontrivial"), 2, attempts, tol);
    let verified = found.as_ref().is_some_and(|s| s.verify(tol).unwrap_or(false));
    let summands = found.as_ref().map_or(0.0, |s| s.summands.len() as f64);
    SuiteOutcome::tally(
        "nontriviality",
        1,
        usize::from(!verified),
        vec![("summands", summands)],
    )
}

/// The Choi map admits a witness on 3×3 block matrices.
pub fn choi_witness(seed: u64, budget: usize, tol: Tolerance, schedule: Schedule) -> SuiteOutcome {
    let cfg = TrialConfig::new(seed, 3, tol).with_schedule(schedule);
    let report = witness_search(&choi_fixture(), budget, &cfg);
    let failures = usize::from(!report.found());
    SuiteOutcome::tally(
        "choi-witness",
        report.evaluations,
        failures,
        vec![
            ("best_min_eig", report.best_min_eig),
            ("restarts", report.restarts as f64),
        ],
    )
}

/// Products are PPT, the Bell state is not, and the partial transpose is an
/// involution on both factors.
pub fn partial_transpose_checks(seed: u64, tol: Tolerance) -> SuiteOutcome {
    let mut rng = stream(seed, "partial-transpose", 0);
    let mut failures = 0;
    let bell = DensityState::bell();
    if is_ppt(&bell, tol) {
        failures += 1;
    }
    for _ in 0..10 {
        let (a, b) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let sigma = crate::random::wishart(&mut rng, a, a);
        let tau = crate::random::wishart(&mut rng, b, b);
        let sigma = &sigma / crate::linalg::trace(&sigma);
        let tau = &tau / crate::linalg::trace(&tau);
        let rho = DensityState::product(&sigma, &tau).expect("valid states");
        if !is_ppt(&rho, tol) {
            failures += 1;
        }
        for factor in [Factor::First, Factor::Second] {
            let once = partial_transpose(&rho, factor);
            let twice = crate::states::partial_transpose_matrix(&once, rho.dims(), factor);
            if relative_frobenius(&twice, rho.matrix()) > 1e-14 {
                failures += 1;
            }
        }
    }
    SuiteOutcome::tally("partial-transpose", 11, failures, Vec::new())
}

/// All suites at the given sizes, in a fixed order.
pub fn run_all(seed: u64, sizes: SuiteSizes, tol: Tolerance) -> Vec<SuiteOutcome> {
    let schedule = Schedule::default();
    vec![
        gram_positivity(seed, sizes.gram, schedule),
        contraction_equivalence(seed, sizes.partitions, tol, schedule),
        characterization(seed, sizes.characterization, tol, schedule),
        reconstruction(seed, sizes.reconstruction, tol, schedule),
        separability(seed, sizes.separability, tol, schedule),
        necessity(seed, sizes.maps_per_family, sizes.map_trials, tol, schedule),
        hyponormal_normal(seed, sizes.hyponormal, tol),
        nontriviality(seed, sizes.nontrivial_attempts, tol),
        choi_witness(seed, sizes.witness_budget, tol, schedule),
        partial_transpose_checks(seed, tol),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_suites_pass() {
        for outcome in run_all(0, SuiteSizes::reduced(), Tolerance::default()) {
            assert!(outcome.passed, "{outcome:?}");
        }
    }
}
