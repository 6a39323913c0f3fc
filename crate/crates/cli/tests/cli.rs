use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eventb_alloy::corpus;

fn eb2alloy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eb2alloy"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn mutex_file(dir: &Path) -> String {
    write(dir, "mutex.ebm", corpus::source("mutex").unwrap())
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SCOPE: [&str; 4] = ["--scope", "Process=2", "--scope", "Mutex=2"];

#[test]
fn translate_writes_module_with_paper_check_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = mutex_file(dir.path());
    let out = dir.path().join("mutex.als");
    let o = eb2alloy(
        &[
            &["translate", &input, "-o", out.to_str().unwrap(), "--states", "6"][..],
            &SCOPE,
            &["--assert-name", "NoDeadlock"],
        ]
        .concat(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let als = std::fs::read_to_string(&out).unwrap();
    assert!(als.contains(
        "check NoDeadlock for exactly 6 State, exactly 2 Process, exactly 2 Mutex, exactly 6 HoldsRel, exactly 6 WaitsRel"
    ));
    let summary = stdout(&o);
    assert!(
        summary.contains("preds: HoldOnMutex, WaitOnMutex, ReleaseMutex"),
        "{summary}"
    );
    assert!(stderr(&o).is_empty());
}

#[test]
fn translate_without_output_prints_module() {
    let dir = tempfile::tempdir().unwrap();
    let input = mutex_file(dir.path());
    let o = eb2alloy(&[&["translate", &input, "--states", "3"][..], &SCOPE].concat());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("module Dijkstra"), "{text}");
    assert!(text.contains("assert DijkstraInvariants"));
}

#[test]
fn translate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.ebm");
    let o = eb2alloy(&["translate", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.ebm"));
    assert!(stdout(&o).is_empty());

    let input = mutex_file(dir.path());
    let o = eb2alloy(&[&["translate", &input, "--states", "1"][..], &SCOPE].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at least 2 states"), "{}", stderr(&o));

    let o = eb2alloy(&["translate", &input, "--states", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Process"), "{}", stderr(&o));

    let o = eb2alloy(&["translate", &input, "--scope", "Process"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn syntax_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.ebm",
        "MACHINE M\nVARIABLES\n  x\nINVARIANTS\n  x : \nEND\n",
    );
    let o = eb2alloy(&["check", bad.to_str().unwrap(), "--depth", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.ebm"), "{}", stderr(&o));
}

#[test]
fn check_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let input = mutex_file(dir.path());
    let o = eb2alloy(&[&["check", &input, "--depth", "6"][..], &SCOPE].concat());
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("violated at depth 4"), "{text}");
    assert!(text.contains("step 4: WaitOnMutex"), "{text}");

    let o = eb2alloy(&[&["check", &input, "--depth", "3"][..], &SCOPE].concat());
    assert_eq!(o.status.code(), Some(0));

    let o = eb2alloy(&[
        "check",
        &input,
        "--depth",
        "6",
        "--scope",
        "Process=1",
        "--scope",
        "Mutex=1",
    ]);
    assert_eq!(o.status.code(), Some(0));

    let o = eb2alloy(&[&["check", &input, "--depth", "6", "--node-budget", "5"][..], &SCOPE].concat());
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).is_empty());

    let o = eb2alloy(&[&["check", &input][..], &SCOPE].concat());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn structured_output_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let input = mutex_file(dir.path());
    let args = [
        &["check", &input, "--depth", "6", "--trace-format", "structured"][..],
        &SCOPE,
    ]
    .concat();
    let a = eb2alloy(&args);
    let b = eb2alloy(&args);
    assert_eq!(a.status.code(), Some(2));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["machine"], "Dijkstra");
    assert_eq!(doc["verdict"], "violation");
    assert_eq!(doc["depth"], 4);
    assert_eq!(doc["trace"].as_array().unwrap().len(), 5);
    assert_eq!(doc["trace"][0]["event"], "Undef");
}

#[test]
fn companion_context_is_found_next_to_the_machine() {
    let dir = tempfile::tempdir().unwrap();
    let src = corpus::source("mutex").unwrap();
    let split = src.find("MACHINE").unwrap();
    write(dir.path(), "Mutexes.ebm", &src[..split]);
    let machine = write(dir.path(), "dijkstra.ebm", &src[split..]);
    let o = eb2alloy(&[&["check", machine.to_str().unwrap(), "--depth", "4"][..], &SCOPE].concat());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let ctx = write(dir.path(), "other.ebm", &src[..split]);
    std::fs::remove_file(dir.path().join("Mutexes.ebm")).unwrap();
    let o = eb2alloy(
        &[
            &[
                "check",
                machine.to_str().unwrap(),
                ctx.to_str().unwrap(),
                "--depth",
                "4",
            ][..],
            &SCOPE,
        ]
        .concat(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = eb2alloy(&[&["check", machine.to_str().unwrap(), "--depth", "4"][..], &SCOPE].concat());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let o = eb2alloy(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("translate"));
}
