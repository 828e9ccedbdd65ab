//! Command-line front end.
//!
//! Every subcommand produces one [`Report`] on the output stream; diagnostics
//! go to the error stream. Exit codes: 0 when the tested condition holds (or
//! the command succeeded), 1 when it fails or the result is degenerate, 2 on
//! input errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::block::{psd_via_contraction_rcond, Partition2};
use crate::error::{Error, Result};
use crate::harness::{theorem1_necessity_trial, witness_search, TrialConfig};
use crate::io::{read_blocks, read_map, read_matrix, BlockFile, MatrixFile, Report, ToleranceEcho, Verdict};
use crate::linalg::{psd_report, relative_frobenius, ComplexMatrix, ComplexVector, Tolerance};
use crate::selftest::{run_all, SuiteSizes};
use crate::states::{
    is_ppt, partial_transpose, ppt_margin, separable_decomposition, separable_residual, state_from_block,
    DensityState, Factor,
};
use crate::stormer::{
    canonical_decomposition_rcond, dual_decomposition_rcond, gram_block, reconstruct_block, stormer_report,
    CanonicalDecomposition, DecompositionOutcome, OperatorPair,
};

#[derive(Debug, Parser)]
#[command(
    name = "stormer-kit",
    version,
    about = "Størmer condition and positive-map toolkit"
)]
struct Cli {
    /// Absolute tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_abs: f64,
    /// Norm-relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_rel: f64,
    /// Relative cutoff for pseudoinverses.
    #[arg(long, global = true, default_value_t = 1e-12)]
    rcond: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a matrix file for positive semidefiniteness.
    CheckPsd { file: PathBuf },
    /// Test positivity of a 2×2 partition through its contraction factorization.
    BlockCheck {
        file: PathBuf,
        /// Size of the upper-left block.
        #[arg(long)]
        split: usize,
    },
    /// Test the Størmer condition of a Gram pair or of a block file.
    StormerCheck {
        a1: Option<PathBuf>,
        a2: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["a1", "a2"])]
        block: Option<PathBuf>,
    },
    /// Canonical decomposition of the Gram block of a pair.
    Decompose {
        a1: PathBuf,
        a2: PathBuf,
        /// Decompose the role-swapped pair instead.
        #[arg(long)]
        dual: bool,
    },
    /// Normalized state of a Gram block with its separable decomposition.
    MakeState { a1: PathBuf, a2: PathBuf },
    /// PPT test of a bipartite density matrix.
    PptCheck {
        file: PathBuf,
        /// Factor dimensions, e.g. `2,2`.
        #[arg(long, value_parser = parse_dims)]
        dims: (usize, usize),
    },
    /// Randomized necessity trials and optional witness search for a map.
    MapTest {
        map: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Block count of the trial matrices.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Evaluation budget of the witness search (0 skips it).
        #[arg(long, default_value_t = 0)]
        witness_budget: usize,
        /// Block count used by the witness search.
        #[arg(long, default_value_t = 3)]
        witness_n: usize,
    },
    /// Run every invariant suite at reduced size.
    Selftest,
}

fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or("expected two comma-separated dimensions")?;
    let a: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a == 0 || b == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok((a, b))
}

struct Context {
    tol: Tolerance,
    rcond: f64,
    seed: u64,
}

impl Context {
    fn report(&self, command: &str, verdict: Verdict) -> Report {
        let echo = ToleranceEcho {
            abs: self.tol.abs_eps,
            rel: self.tol.rel_eps,
            rcond: self.rcond,
        };
        Report::new(command, verdict, self.seed, echo)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let tol = match Tolerance::new(cli.tol_abs, cli.tol_rel) {
        Ok(t) => t,
        Err(e) => return input_error(err, &e),
    };
    if !(cli.rcond.is_finite() && cli.rcond >= 0.0) {
        return input_error(
            err,
            &Error::Input(format!(
                "rcond must be finite and non-negative, got {}",
                cli.rcond
            )),
        );
    }
    let ctx = Context {
        tol,
        rcond: cli.rcond,
        seed: cli.seed,
    };
    match dispatch(&cli.command, &ctx, err) {
        Ok(report) => {
            let text = if cli.json {
                report.to_json()
            } else {
                report.to_text()
            };
            if out.write_all(text.as_bytes()).is_err() {
                return 2;
            }
            exit_code(report.verdict)
        }
        Err(e) => input_error(err, &e),
    }
}

fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::True | Verdict::Inconclusive => 0,
        Verdict::False | Verdict::Degenerate => 1,
    }
}

fn input_error(err: &mut dyn Write, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {e}");
    2
}

fn dispatch(command: &Command, ctx: &Context, err: &mut dyn Write) -> Result<Report> {
    match command {
        Command::CheckPsd { file } => check_psd(ctx, &read_matrix(file)?),
        Command::BlockCheck { file, split } => block_check(ctx, &read_matrix(file)?, *split),
        Command::StormerCheck { a1, a2, block } => {
            let x = match (a1, a2, block) {
                (_, _, Some(path)) => read_blocks(path)?,
                (Some(a1), Some(a2), None) => gram_block(&read_pair(a1, a2)?),
                _ => return Err(Error::Input("give two operator files or --block FILE".into())),
            };
            stormer_check(ctx, &x)
        }
        Command::Decompose { a1, a2, dual } => decompose(ctx, &read_pair(a1, a2)?, *dual),
        Command::MakeState { a1, a2 } => make_state(ctx, &read_pair(a1, a2)?),
        Command::PptCheck { file, dims } => ppt_check(ctx, read_matrix(file)?, *dims),
        Command::MapTest {
            map,
            trials,
            n,
            witness_budget,
            witness_n,
        } => map_test(ctx, map, *trials, *n, *witness_budget, *witness_n),
        Command::Selftest => Ok(selftest(ctx, err)),
    }
}

fn read_pair(a1: &Path, a2: &Path) -> Result<OperatorPair> {
    OperatorPair::new(read_matrix(a1)?, read_matrix(a2)?)
}

fn check_psd(ctx: &Context, m: &ComplexMatrix) -> Result<Report> {
    let r = psd_report(m, ctx.tol)?;
    let mut report = ctx.report("check-psd", Verdict::from_bool(r.psd));
    report
        .metric("min_eig", r.min_eig)
        .metric("threshold", r.threshold);
    Ok(report)
}

fn block_check(ctx: &Context, m: &ComplexMatrix, split: usize) -> Result<Report> {
    let p = Partition2::split(m, split).map_err(|e| Error::Input(e.to_string()))?;
    let r = psd_report(&p.assemble(), ctx.tol)?;
    let cert = psd_via_contraction_rcond(&p, ctx.tol, ctx.rcond)?;
    let mut report = ctx.report("block-check", Verdict::from_bool(cert.psd));
    report
        .metric("min_eig", r.min_eig)
        .metric("range_residual", cert.residual)
        .metric("contraction_norm", cert.w_norm)
        .metric("oracle_agrees", f64::from(u8::from(cert.psd == r.psd)));
    if let Some(w) = &cert.w {
        report.artifact("contraction", &MatrixFile::from_matrix(w));
    }
    Ok(report)
}

fn stormer_check(ctx: &Context, x: &crate::stormer::OperatorBlockMatrix) -> Result<Report> {
    let r = stormer_report(x, ctx.tol)?;
    let mut report = ctx.report("stormer-check", Verdict::from_bool(r.holds));
    report
        .metric("min_eig", r.direct.min_eig)
        .metric("min_eig_swapped", r.swapped.min_eig)
        .metric("threshold", r.direct.threshold);
    Ok(report)
}

#[derive(serde::Serialize)]
struct DecompositionArtifact {
    alphas: Vec<f64>,
    lambdas: Vec<[f64; 2]>,
    phis: Vec<MatrixFile>,
    es: Vec<MatrixFile>,
}

impl DecompositionArtifact {
    fn new(dec: &CanonicalDecomposition) -> Self {
        let vectors = |vs: &[ComplexVector]| vs.iter().map(MatrixFile::from_vector).collect();
        DecompositionArtifact {
            alphas: dec.alphas.clone(),
            lambdas: dec.lambdas.iter().map(|l| [l.re, l.im]).collect(),
            phis: vectors(&dec.phis),
            es: vectors(&dec.es),
        }
    }
}

fn decompose(ctx: &Context, p: &OperatorPair, dual: bool) -> Result<Report> {
    let command = "decompose";
    let outcome = if dual {
        dual_decomposition_rcond(p, ctx.tol, ctx.rcond)
    } else {
        canonical_decomposition_rcond(p, ctx.tol, ctx.rcond)
    };
    let target = if dual {
        gram_block(&p.swapped())
    } else {
        gram_block(p)
    };
    match outcome {
        Err(Error::ConditionNotSatisfied(_)) => {
            let r = stormer_report(&target, ctx.tol)?;
            let mut report = ctx.report(command, Verdict::False);
            report
                .metric("min_eig", r.direct.min_eig)
                .metric("min_eig_swapped", r.swapped.min_eig);
            Ok(report)
        }
        Err(e) => Err(e),
        Ok(DecompositionOutcome::Degenerate(ratio)) => {
            let mut report = ctx.report(command, Verdict::Degenerate);
            report.metric("condition", ratio.condition);
            report.artifact("ratio_operator", &MatrixFile::from_matrix(&ratio.t));
            Ok(report)
        }
        Ok(DecompositionOutcome::Canonical(dec)) => {
            let residual = relative_frobenius(&reconstruct_block(&dec).assembled(), &target.assembled());
            let mut report = ctx.report(command, Verdict::True);
            report
                .metric("residual", residual)
                .metric("terms", dec.active_terms().count() as f64);
            report.artifact("decomposition", &DecompositionArtifact::new(&dec));
            Ok(report)
        }
    }
}

#[derive(serde::Serialize)]
struct SeparableArtifact {
    weights: Vec<f64>,
    factor1: Vec<MatrixFile>,
    factor2: Vec<MatrixFile>,
}

fn make_state(ctx: &Context, p: &OperatorPair) -> Result<Report> {
    let rho = state_from_block(&gram_block(p))?;
    let ppt = is_ppt(&rho, ctx.tol);
    let mut report = ctx.report("make-state", Verdict::from_bool(ppt));
    report.metric("ppt_min_eig", ppt_margin(&rho));
    report.artifact("state", &MatrixFile::from_matrix(rho.matrix()));
    match canonical_decomposition_rcond(p, ctx.tol, ctx.rcond) {
        Ok(DecompositionOutcome::Canonical(dec)) => {
            let sep = separable_decomposition(&dec)?;
            report.metric("separable_residual", separable_residual(&sep, &rho));
            report.artifact(
                "separable",
                &SeparableArtifact {
                    weights: sep.weights.clone(),
                    factor1: sep.factor1.iter().map(MatrixFile::from_vector).collect(),
                    factor2: sep.factor2.iter().map(MatrixFile::from_vector).collect(),
                },
            );
        }
        Ok(DecompositionOutcome::Degenerate(ratio)) => {
            report.metric("condition", ratio.condition);
        }
        Err(Error::ConditionNotSatisfied(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(report)
}

fn ppt_check(ctx: &Context, m: ComplexMatrix, dims: (usize, usize)) -> Result<Report> {
    let rho = DensityState::new(dims, m)?;
    let ppt = is_ppt(&rho, ctx.tol);
    let mut report = ctx.report("ppt-check", Verdict::from_bool(ppt));
    report.metric("ppt_min_eig", ppt_margin(&rho));
    report.artifact(
        "partial_transpose",
        &MatrixFile::from_matrix(&partial_transpose(&rho, Factor::First)),
    );
    Ok(report)
}

fn map_test(
    ctx: &Context,
    path: &Path,
    trials: usize,
    n: usize,
    budget: usize,
    witness_n: usize,
) -> Result<Report> {
    if n == 0 || witness_n == 0 {
        return Err(Error::Input("block counts must be positive".into()));
    }
    let phi = read_map(path)?;
    let cfg = TrialConfig::new(ctx.seed, n, ctx.tol);
    let necessity = theorem1_necessity_trial(&phi, trials, &cfg);
    let search =
        (budget > 0).then(|| witness_search(&phi, budget, &TrialConfig::new(ctx.seed, witness_n, ctx.tol)));
    let found = search.as_ref().is_some_and(|s| s.found());
    let verdict = if necessity.violations > 0 || found {
        Verdict::False
    } else if phi.is_decomposable_by_construction() {
        Verdict::True
    } else {
        Verdict::Inconclusive
    };
    let mut report = ctx.report("map-test", verdict);
    report
        .metric("trials", necessity.trials as f64)
        .metric("violations", necessity.violations as f64)
        .metric("worst_min_eig", necessity.worst_min_eig);
    if let Some(s) = &search {
        report
            .metric("witness_evaluations", s.evaluations as f64)
            .metric("witness_restarts", s.restarts as f64)
            .metric("witness_best_min_eig", s.best_min_eig);
        if let Some(w) = &s.witness {
            report.metric("witness_min_eig", w.min_eig);
            report.metric("witness_stormer_margin", w.stormer_margin);
            report.artifact("witness", &BlockFile::from_blocks(&w.x));
        }
    }
    Ok(report)
}

fn selftest(ctx: &Context, err: &mut dyn Write) -> Report {
    let outcomes = run_all(ctx.seed, SuiteSizes::reduced(), ctx.tol);
    let all = outcomes.iter().all(|o| o.passed);
    let mut report = ctx.report("selftest", Verdict::from_bool(all));
    for o in &outcomes {
        if !o.passed {
            let _ = writeln!(err, "suite {} failed: {} of {}", o.name, o.failures, o.trials);
        }
        report.metric(&format!("{}.passed", o.name), f64::from(u8::from(o.passed)));
        report.metric(&format!("{}.failures", o.name), o.failures as f64);
        for (k, v) in &o.metrics {
            report.metric(&format!("{}.{k}", o.name), *v);
        }
    }
    report
}
