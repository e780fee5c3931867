use std::path::Path;
use std::process::{Command, Output};

use pabisim::harness::fixtures::{COIN, FIG1};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pabisim")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fig1.pa"), FIG1).unwrap();
    std::fs::write(dir.path().join("coin.pa"), COIN).unwrap();
    dir
}

#[test]
fn parse_reports_size() {
    let dir = workspace();
    let o = run(&["parse", "fig1.pa"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5 states"), "{}", stdout(&o));
}

#[test]
fn relate_exit_codes_follow_the_verdict() {
    let dir = workspace();
    let o = run(&["relate", "fig1.pa", "--relation", "strong-prob-bisim", "--pair", "s,r"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["relate", "fig1.pa", "--relation", "strong-1", "--pair", "s,r"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["relate", "fig1.pa", "--relation", "strong-branching-i", "--depth", "3", "--pair", "s,r"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn compose_then_check_the_product() {
    let dir = workspace();
    let o = run(&["compose", "fig1.pa", "coin.pa", "-o", "prod.pa"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("prod.pa").exists());

    let path = "((top@1 & c@2) | (a1@1 & c@2) | (a3@1 & c@2)) U<=2 ((a1@1 & c2@2) | (a3@1 & c1@2))";
    let formula = format!("P<=0.34 [ {path} ]");
    let o = run(&["mc", "prod.pa", "--formula", &formula, "--state", "(s,t)"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sup 17/50"), "{}", stdout(&o));
    let o = run(&["mc", "prod.pa", "--formula", &formula, "--state", "(r,t)"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("sup 9/25"), "{}", stdout(&o));

    let o = run(&["relate", "prod.pa", "--relation", "strong-branching-i", "--depth", "2", "--pair", "(s,t),(r,t)"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let dir = workspace();
    assert_eq!(run(&["parse", "missing.pa"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["relate", "fig1.pa", "--relation", "nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["relate", "fig1.pa", "--relation", "strong-1", "--pair", "s"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["mc", "fig1.pa", "--formula", "P>= [ X a1 ]"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.pa"), "pa bad\nstate p\ntrans p -> 1:q\n").unwrap();
    let o = run(&["parse", "bad.pa"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.pa"));
}

#[test]
fn random_is_deterministic_and_parses() {
    let dir = workspace();
    let a = run(&["random", "--seed", "7", "--states", "4"], dir.path());
    let b = run(&["random", "--seed", "7", "--states", "4", "-o", "r.pa"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(stdout(&a), std::fs::read_to_string(dir.path().join("r.pa")).unwrap());
    assert_eq!(run(&["parse", "r.pa"], dir.path()).status.code(), Some(0));
    assert_eq!(run(&["random", "--grid", "0,1/2"], dir.path()).status.code(), Some(2));
}

#[test]
fn taxonomy_of_fig1_is_clean() {
    let dir = workspace();
    let o = run(&["taxonomy", "fig1.pa"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("violations: 0"));
}

#[test]
fn regress_runs_one_fixture_and_a_small_suite() {
    let dir = workspace();
    let o = run(&["regress", "--fixture", "fig1", "--suites", "inclusion", "--samples", "6", "--witness-dir", "w"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("fixtures: 18/18 passed"), "{out}");
}
