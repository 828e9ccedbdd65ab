//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PathBuf {
    manifest_dir().join("tests/fixtures").join(name)
}

/// Set to regenerate golden files and frozen fixtures instead of comparing.
pub const BLESS_VAR: &str = "STORMER_KIT_BLESS";

pub fn blessing() -> bool {
    std::env::var_os(BLESS_VAR).is_some()
}

/// One CLI invocation with its expected exit code. Paths in `args` that start
/// with `@` are resolved against `tests/fixtures/cli`.
pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub code: i32,
}

pub const GOLDEN_CASES: &[GoldenCase] = &[
    GoldenCase {
        name: "check-psd-identity",
        args: &["check-psd", "@identity2.json", "--json"],
        code: 0,
    },
    GoldenCase {
        name: "check-psd-identity-text",
        args: &["check-psd", "@identity2.json"],
        code: 0,
    },
    GoldenCase {
        name: "check-psd-indefinite",
        args: &["check-psd", "@indefinite.json", "--json"],
        code: 1,
    },
    GoldenCase {
        name: "check-psd-truncated",
        args: &["check-psd", "@truncated.json", "--json"],
        code: 2,
    },
    GoldenCase {
        name: "block-check",
        args: &["block-check", "@partition.json", "--split", "1", "--json"],
        code: 0,
    },
    GoldenCase {
        name: "block-check-indefinite",
        args: &["block-check", "@indefinite.json", "--split", "1", "--json"],
        code: 1,
    },
    GoldenCase {
        name: "stormer-check-normal",
        args: &["stormer-check", "@identity2.json", "@diag_1_i.json", "--json"],
        code: 0,
    },
    GoldenCase {
        name: "stormer-check-nilpotent",
        args: &["stormer-check", "@identity2.json", "@nilpotent.json", "--json"],
        code: 1,
    },
    GoldenCase {
        name: "stormer-check-non-hermitian",
        args: &["stormer-check", "--block", "@non_hermitian_block.json", "--json"],
        code: 2,
    },
    GoldenCase {
        name: "stormer-check-mismatch",
        args: &["stormer-check", "@identity2.json", "@bell.json", "--json"],
        code: 2,
    },
    GoldenCase {
        name: "decompose",
        args: &["decompose", "@identity2.json", "@diag_1_i.json", "--json"],
        code: 0,
    },
    GoldenCase {
        name: "decompose-dual",
        args: &[
            "decompose",
            "@identity2.json",
            "@diag_1_i.json",
            "--dual",
            "--json",
        ],
        code: 0,
    },
    GoldenCase {
        name: "decompose-nilpotent",
        args: &["decompose", "@identity2.json", "@nilpotent.json", "--json"],
        code: 1,
    },
    GoldenCase {
        name: "decompose-singular",
        args: &["decompose", "@singular.json", "@singular.json", "--json"],
        code: 1,
    },
    GoldenCase {
        name: "make-state",
        args: &["make-state", "@identity2.json", "@identity2.json", "--json"],
        code: 0,
    },
    GoldenCase {
        name: "ppt-check-bell",
        args: &["ppt-check", "@bell.json", "--dims", "2,2", "--json"],
        code: 1,
    },
    GoldenCase {
        name: "map-test-identity",
        args: &["map-test", "@map_identity.json", "--json"],
        code: 0,
    },
    GoldenCase {
        name: "map-test-transpose",
        args: &["map-test", "@map_transpose.json", "--json"],
        code: 0,
    },
    GoldenCase {
        name: "map-test-choi3",
        args: &[
            "map-test",
            "@map_choi3.json",
            "--trials",
            "200",
            "--witness-budget",
            "40000",
            "--json",
        ],
        code: 1,
    },
    GoldenCase {
        name: "map-test-malformed",
        args: &["map-test", "@map_malformed.json", "--json"],
        code: 2,
    },
    GoldenCase {
        name: "selftest",
        args: &["selftest", "--json"],
        code: 0,
    },
];

fn resolve(arg: &str) -> String {
    match arg.strip_prefix('@') {
        Some(file) => fixture("cli").join(file).display().to_string(),
        None => arg.to_string(),
    }
}

pub fn golden_path(name: &str) -> PathBuf {
    manifest_dir().join("tests/golden").join(format!("{name}.out"))
}

/// Runs one case with `--seed 0`. Returns a description of the mismatch, if any.
pub fn check_golden(binary: &Path, case: &GoldenCase) -> Result<(), String> {
    let output = Command::new(binary)
        .args(case.args.iter().map(|a| resolve(a)))
        .args(["--seed", "0"])
        .output()
        .map_err(|e| format!("{}: cannot run binary: {e}", case.name))?;
    let code = output.status.code().unwrap_or(-1);
    if code != case.code {
        return Err(format!(
            "{}: exit code {code}, expected {} (stderr: {})",
            case.name,
            case.code,
            String::from_utf8_lossy(&output.stderr).trim()
        ));
    }
    if code == 2 && output.stderr.is_empty() {
        return Err(format!("{}: input error without a diagnostic", case.name));
    }
    let path = golden_path(case.name);
    if blessing() {
        std::fs::write(&path, &output.stdout).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != output.stdout {
        return Err(format!("{}: output differs from {}", case.name, path.display()));
    }
    Ok(())
}
