mod common;

use std::path::Path;

use common::{check_golden, GOLDEN_CASES};

#[test]
fn every_subcommand_matches_its_golden_report() {
    let binary = Path::new(env!("CARGO_BIN_EXE_stormer-kit"));
    let failures: Vec<String> = GOLDEN_CASES
        .iter()
        .filter_map(|case| check_golden(binary, case).err())
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let binary = Path::new(env!("CARGO_BIN_EXE_stormer-kit"));
    let args = [
        "map-test",
        &common::fixture("cli/map_transpose.json").display().to_string(),
        "--trials",
        "300",
        "--seed",
        "42",
        "--json",
    ]
    .map(String::from);
    let run = || std::process::Command::new(binary).args(&args).output().unwrap();
    let (first, second) = (run(), run());
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn every_subcommand_is_covered() {
    for sub in [
        "check-psd",
        "block-check",
        "stormer-check",
        "decompose",
        "make-state",
        "ppt-check",
        "map-test",
        "selftest",
    ] {
        assert!(GOLDEN_CASES.iter().any(|c| c.args[0] == sub), "{sub}");
    }
}
