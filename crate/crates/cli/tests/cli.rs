use std::path::Path;
use std::process::{Command, Output};

use mmot::fixtures::example_one;
use mmot::measures::instance_to_json;
use mmot::{verify_coupling, Coupling, IndexTuple};
use serde_json::Value;

fn mmot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmot"))
        .args(args)
        .env_remove("MMOT_THREADS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const IDENTICAL: &str = r#"{"d":2,"N":3,"m":2,"marginals":[[[0,0],[1,1]],[[0,0],[1,1]],[[0,0],[1,1]]]}"#;

#[test]
fn truncated_json_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", r#"{"d":2,"N":3,"m":3,"marginals":[[[0,"#);
    let out = mmot(&["solve", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn header_mismatch_and_bad_flags_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "hdr.json", &IDENTICAL.replace("\"m\":2", "\"m\":3"));
    assert_eq!(mmot(&["solve", &path]).status.code(), Some(1));
    assert_eq!(mmot(&["solve", "--no-such-flag", &path]).status.code(), Some(1));
    assert_eq!(mmot(&["search", "--trials", "0"]).status.code(), Some(1));
}

#[test]
fn identical_marginals_are_monge() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "same.json", IDENTICAL);
    let report = json(&mmot(&["solve", &path]));
    assert_eq!(report["classification"], "Monge");
    assert_eq!(report["lp_value"], 0.0);
    assert_eq!(report["relative_gap_percent"], 0.0);
    assert_eq!(report["certificate"]["status"], "verified");
}

#[test]
fn solve_coupling_round_trips_through_verification() {
    let dir = tempfile::tempdir().unwrap();
    let inst = example_one();
    let path = write(dir.path(), "ex1.json", &instance_to_json(&inst));
    for extra in [&[][..], &["--exact"][..]] {
        let mut args = vec!["solve", path.as_str(), "--with-barycenter"];
        args.extend_from_slice(extra);
        let report = json(&mmot(&args));
        assert_eq!(report["classification"], "NonMonge");
        let entries = report["optimal_coupling"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| {
                let tuple: IndexTuple = serde_json::from_value(e["tuple"].clone()).unwrap();
                (tuple, e["weight"].as_f64().unwrap())
            })
            .collect();
        let check = verify_coupling(&inst, &Coupling::new(entries));
        assert!(check.max_violation <= 1e-12, "{check:?}");
        assert_eq!(report["barycenter"]["atoms"].as_array().unwrap().len(), 6);
    }
    let exact = json(&mmot(&["solve", &path, "--exact"]));
    assert_eq!(exact["mode"], "ExactRational");
    assert!(exact["gap_exact"].as_str().unwrap().contains('/'));
    assert_eq!(exact["optimal_coupling"][0]["weight_exact"], "1/6");
}

#[test]
fn default_output_uses_six_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ex1.json", &instance_to_json(&example_one()));
    let short = json(&mmot(&["solve", &path]));
    let full = json(&mmot(&["--full-precision", "solve", &path]));
    assert_eq!(short["lp_value"].as_f64().unwrap(), 68.0275);
    assert!((full["lp_value"].as_f64().unwrap() - 68.02752695933).abs() < 1e-9);
    assert_ne!(full["lp_value"], short["lp_value"]);
}

#[test]
fn conventions_and_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "ex1.json", &instance_to_json(&example_one()));
    let pair = json(&mmot(&["--full-precision", "solve", &path]))["lp_value"].as_f64().unwrap();
    let ordered = json(&mmot(&["--full-precision", "solve", &path, "--convention", "ordered"]))["lp_value"]
        .as_f64()
        .unwrap();
    assert!((ordered - 2.0 * pair).abs() < 1e-9);

    let monge = json(&mmot(&["monge", &path]));
    assert_eq!(monge["enumerated"], 36);
    assert_eq!(monge["best_monge_support"], serde_json::json!([[1, 1, 3], [2, 2, 2], [3, 3, 1]]));

    let bary = json(&mmot(&["--full-precision", "barycenter", &path]));
    assert!(bary["equivalence_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(bary["atoms"].as_array().unwrap().len(), 6);

    // The fixture is not two-point data.
    assert_eq!(mmot(&["two-point", &path]).status.code(), Some(1));
    let two = write(dir.path(), "two.json", IDENTICAL);
    let report = json(&mmot(&["two-point", &two, "--exact"]));
    assert_eq!(report["classification"], "Monge");
    assert_eq!(report["value_exact"], "0");
}

#[test]
fn verify_command_passes_and_detects_perturbation() {
    let out = mmot(&["verify-paper-example"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("strict gap certified"));
    assert!(!text.contains("[FAIL]"));

    let mut points = example_one().to_points();
    points[0][0][0] += 1.0;
    let perturbed = mmot::Instance::from_points(points).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "perturbed.json", &instance_to_json(&perturbed));
    let out = mmot(&["verify-paper-example", "--instance", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("[FAIL] lp_value"));
}

#[test]
fn search_writes_histograms_and_failure_log() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let svg = dir.path().join("h.svg");
    let log = dir.path().join("f.jsonl");
    let out = mmot(&[
        "search",
        "--trials",
        "200",
        "--N",
        "2",
        "--hist-out",
        csv.to_str().unwrap(),
        "--hist-out",
        svg.to_str().unwrap(),
        "--failures-out",
        log.to_str().unwrap(),
    ]);
    let summary = json(&out);
    assert_eq!(summary["failures"], 0);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "bin_lower,bin_upper,count\n");
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert_eq!(std::fs::read_to_string(&log).unwrap(), "");
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty histogram"));
}

#[test]
fn search_honours_thread_env_and_is_deterministic() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_mmot"))
            .args(["search", "--trials", "3000", "--seed", "5"])
            .env("MMOT_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("3");
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}
