//! The `feta` binary: exit statuses, outputs and report formats.

use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "models", name].iter().collect();
    path.to_string_lossy().into_owned()
}

fn bundled() -> Vec<String> {
    let mut all: Vec<String> = std::fs::read_dir(model(""))
        .unwrap()
        .map(|e| e.unwrap().path().to_string_lossy().into_owned())
        .filter(|p| p.ends_with(".feta"))
        .collect();
    all.sort();
    assert_eq!(all.len(), feta::corpus::ALL.len());
    all
}

fn feta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feta")).args(args).env_remove("FETA_BACKEND").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const AM: &str = "access_management.feta";

#[test]
fn weak_check_of_the_running_example_holds() {
    let o = feta(&["check", "--weak", &model(AM)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("featured weakly receptive"));
}

#[test]
fn strict_check_of_the_running_example_fails_at_the_locked_state() {
    let o = feta(&["check", "--strict", &model(AM)]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("[lock && !unlock] rcp({u1}, join) @ (0,1,1): VIOLATED"), "{out}");
    assert!(out.contains("not featured receptive"));
}

#[test]
fn product_checks() {
    assert_eq!(feta(&["check", "--strict", "-p", "unlock", &model(AM)]).status.code(), Some(0));
    let o = feta(&["check", "--strict", "-p", "{lock}", &model(AM)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("rcp({u2}, join) @ (1,0,1): VIOLATED"));
    let o = feta(&["check", "--weak", "-p", "lock", &model(AM)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(1,0,1) {s} confirm {u1} (2,0,0)"));
}

#[test]
fn compose_counts() {
    let o = feta(&["compose", &model(AM)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("states: 18\n") && out.contains("transitions: 142\n"), "{out}");
    assert!(out.contains("features: 2\n") && out.contains("products: 2\n"));
}

#[test]
fn products_listing() {
    let o = feta(&["products", &model(AM)]);
    assert_eq!(stdout(&o), "2 valid product(s):\n  {lock}\n  {unlock}\n");
}

#[test]
fn featured_requirements_grouped_by_state() {
    let o = feta(&["reqs", &model(AM)]);
    let out = stdout(&o);
    let expected = "(0,0,0)\n  [lock xor unlock] rcp({u1}, join) @ (0,0,0)\n  [lock xor unlock] rcp({u2}, join) @ (0,0,0)\n  [unlock && !lock] rcp({u1,u2}, join) @ (0,0,0)\n(0,1,1)\n";
    assert!(out.starts_with(expected), "{out}");
}

#[test]
fn verify_passes_on_every_bundled_model() {
    for path in bundled() {
        let o = feta(&["verify", &path]);
        assert_eq!(o.status.code(), Some(0), "{path}: {}", stdout(&o));
        assert!(stdout(&o).contains("backend mismatches: 0"));
    }
}

#[test]
fn exit_codes_on_every_bundled_model() {
    for path in bundled() {
        for args in [
            vec!["products"],
            vec!["compose"],
            vec!["feta"],
            vec!["reqs"],
            vec!["check", "--strict"],
            vec!["check", "--weak"],
        ] {
            let mut full = args.clone();
            full.push(&path);
            let o = feta(&full);
            let json = feta(&[&["--format", "json"], &full[..]].concat());
            let report: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
            let expected = if report["holds"].as_bool().unwrap() { 0 } else { 1 };
            assert_eq!(o.status.code(), Some(expected), "{full:?}");
            assert_eq!(json.status.code(), Some(expected), "{full:?}");
        }
    }
}

#[test]
fn faulty_handshake_is_not_weakly_receptive() {
    let o = feta(&["check", "--weak", &model("faulty_handshake.feta")]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(feta(&["check", "--weak", "-p", "{}", &model("faulty_handshake.feta")]).status.code(), Some(0));
}

#[test]
fn projection_commutes() {
    for p in ["lock", "unlock"] {
        let o = feta(&["project", "-p", p, &model(AM)]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("commutes with the product team"));
    }
    let dot = stdout(&feta(&["--format", "dot", "project", "-p", "unlock", &model(AM)]));
    assert!(dot.starts_with("digraph"));
}

fn node_statements(dot: &str) -> usize {
    dot.lines().filter(|l| l.starts_with("  \"") && !l.contains("->")).count()
}

#[test]
fn dot_of_the_pruned_team() {
    let run = || stdout(&feta(&["feta", "--format", "dot", &model(AM)]));
    let dot = run();
    assert_eq!(node_statements(&dot), 8);
    assert_eq!(dot.lines().filter(|l| l.starts_with("  \"") && l.contains("->")).count(), 18);
    assert!(dot.contains("__init0 -> \"0,0,0\";"));
    assert_eq!(dot, run());

    let full = stdout(&feta(&["feta", "--format", "dot", "--full", &model(AM)]));
    assert_eq!(node_statements(&full), 18);
    let annotated = stdout(&feta(&["feta", "--format", "dot", "--annotate", &model(AM)]));
    assert_eq!(annotated.matches("shape=note, style=dashed").count(), 18);
    assert!(annotated.contains("[lock && !unlock] rcp({u1}, join) @ (0,1,1)"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("feta-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.feta");
    std::fs::write(&bad, "features a;\nfeature_model b;\n").unwrap();
    let o = feta(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[missing-section]"));

    assert_eq!(feta(&["check", dir.join("absent.feta").to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(feta(&["project", "-p", "lock,unlock", &model(AM)]).status.code(), Some(2));
    assert_eq!(feta(&["project", "-p", "nope", &model(AM)]).status.code(), Some(2));
    assert_eq!(feta(&["check", "--strict", "--weak", &model(AM)]).status.code(), Some(2));
    assert_eq!(feta(&["--format", "dot", "compose", &model(AM)]).status.code(), Some(2));
    assert_eq!(feta(&["--max-states", "10", "compose", &model(AM)]).status.code(), Some(2));
    assert_eq!(feta(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(feta(&["--help"]).status.code(), Some(0));
}

#[test]
fn backend_flag_overrides_the_environment() {
    let with_env = |value: &str, args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_feta")).args(args).env("FETA_BACKEND", value).output().unwrap()
    };
    assert_eq!(with_env("nonsense", &["products", &model(AM)]).status.code(), Some(2));
    assert_eq!(with_env("nonsense", &["--backend", "sat", "products", &model(AM)]).status.code(), Some(0));
    let sat = with_env("sat", &["check", "--strict", &model(AM)]);
    assert_eq!(sat.status.code(), Some(1));
    assert_eq!(stdout(&sat), stdout(&feta(&["--backend", "enumerative", "check", "--strict", &model(AM)])));
}

#[test]
fn json_reports_follow_the_schema() {
    let schema: serde_json::Value = serde_json::from_str(feta::report::SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let mut runs: Vec<Vec<String>> = Vec::new();
    for path in bundled() {
        for args in [
            &["products"][..],
            &["compose"],
            &["feta"],
            &["reqs"],
            &["reqs", "--factors", "--raw"],
            &["check", "--strict"],
            &["check", "--weak"],
            &["verify"],
        ] {
            runs.push(args.iter().map(|s| s.to_string()).chain([path.clone()]).collect());
        }
    }
    runs.push(vec!["project".into(), "-p".into(), "lock".into(), model(AM)]);
    runs.push(vec!["reqs".into(), "-p".into(), "lock".into(), model(AM)]);
    runs.push(vec!["check".into(), "-p".into(), "lock".into(), "--strict".into(), model(AM)]);
    runs.push(vec!["check".into(), model("missing.feta")]);
    let bad = std::env::temp_dir().join(format!("feta-json-{}.feta", std::process::id()));
    std::fs::write(&bad, "features a;").unwrap();
    runs.push(vec!["check".into(), bad.to_string_lossy().into_owned()]);

    let mut validated = 0;
    for run in runs {
        let mut args = vec!["--format", "json"];
        args.extend(run.iter().map(String::as_str));
        let o = feta(&args);
        if o.stdout.is_empty() {
            assert_eq!(o.status.code(), Some(2), "{run:?}");
            continue;
        }
        let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{run:?}: {errors:?}");
        assert_eq!(report["schema"], "report-v1");
        validated += 1;
    }
    assert!(validated >= 50);
}
