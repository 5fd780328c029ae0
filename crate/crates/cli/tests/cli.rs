use std::process::{Command, Output};

use einstein_lab::potential;
use einstein_lab::{lattice_box, BallSpec};
use einstein_lab_cli::output::round_sig;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_einstein-lab"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "0")
        .env_remove("EINSTEIN_LAB_THREADS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const Z2: [&str; 6] = ["--family", "lattice", "--dim", "2", "--side", "41"];

fn with(base: &[&str], rest: &[&str]) -> Vec<String> {
    base.iter().chain(rest).map(|s| s.to_string()).collect()
}

fn run_owned(args: Vec<String>) -> Output {
    run(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn generate_reports_counts_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z2.txt");
    let out = run(&[
        "generate",
        "--family",
        "lattice",
        "--dim",
        "2",
        "--side",
        "41",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "vertices 1681 edges 3280\n");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# center 840\n"));

    let out = run(&[
        "generate",
        "--family",
        "sierpinski",
        "--level",
        "2",
        "--out",
        dir.path().join("s.txt").to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("vertices 15 "));

    assert_eq!(
        run(&["generate", "--family", "lattice", "--side", "40"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["generate", "--family", "warp"]).status.code(), Some(2));
}

#[test]
fn compute_matches_library() {
    let out = run_owned(with(
        &["compute", "exit"],
        &[&Z2[..], &["--x", "840", "--R", "1"]].concat(),
    ));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["value"], 1.0);

    let out = run_owned(with(
        &["compute", "resistance"],
        &[&Z2[..], &["--A-ball", "840,4", "--B-ball", "840,8"]].concat(),
    ));
    let fx = lattice_box(2, 41).unwrap();
    let g = &fx.graph;
    let direct = potential::resistance(
        g,
        &g.ball(BallSpec::new(840, 4)).unwrap(),
        &g.ball(BallSpec::new(840, 8)).unwrap(),
    )
    .unwrap()
    .finite()
    .unwrap();
    assert_eq!(json(&out)["result"]["value"].as_f64().unwrap(), round_sig(direct));

    let out = run_owned(with(&["compute", "lambda"], &[&Z2[..], &["--ball", "840,4"]].concat()));
    let lambda = json(&out)["result"]["lambda"].as_f64().unwrap();
    assert!(lambda > 0.0 && lambda <= 1.0);
}

#[test]
fn compute_margin_and_usage_errors() {
    let margin = run_owned(with(
        &["compute", "exit"],
        &[&Z2[..], &["--x", "center", "--R", "30"]].concat(),
    ));
    assert_eq!(margin.status.code(), Some(3));
    let missing = run_owned(with(&["compute", "exit"], &Z2));
    assert_eq!(missing.status.code(), Some(2));
    let bad_vertex = run_owned(with(
        &["compute", "harnack"],
        &[&Z2[..], &["--x", "99999", "--R", "2"]].concat(),
    ));
    assert_eq!(bad_vertex.status.code(), Some(2));
}

#[test]
fn verify_plane_fixture_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_owned(with(
        &["verify"],
        &[&Z2[..], &["--out-dir", dir.path().to_str().unwrap()]].concat(),
    ));
    for f in ["verify.json", "inequalities.csv", "conditions.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn verify_flags_injected_asymmetry_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "verify",
        "--family",
        "lattice",
        "--side",
        "21",
        "--inject-asymmetry",
        "0,1,3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("violation reversibility: x=0"), "{text}");
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["manifest"]["graph"]["inject_asymmetry"][2], 3.0);
}

#[test]
fn verify_empty_grid_is_margin_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "verify",
        "--family",
        "lattice",
        "--side",
        "5",
        "--radii",
        "4",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mc_is_reproducible() {
    let args = with(
        &["mc"],
        &[&Z2[..], &["--x", "center", "--R", "6", "--n", "10000", "--seed", "7"]].concat(),
    );
    let a = run_owned(args.clone());
    let b = run_owned(args.clone());
    assert_eq!(a.stdout, b.stdout);
    let mut threaded = args;
    threaded.extend(["--threads".to_string(), "3".to_string()]);
    assert_eq!(a.stdout, run_owned(threaded).stdout);
    let est = &json(&a)["estimate"];
    assert_eq!(est["n"], 10000);
    assert_eq!(json(&a)["manifest"]["seed"], 7);
}

#[test]
fn fit_on_plane_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_owned(with(
        &["fit"],
        &[
            &Z2[..],
            &[
                "--x",
                "center",
                "--radii",
                "2..16",
                "--csv-dir",
                dir.path().to_str().unwrap(),
            ],
        ]
        .concat(),
    ));
    assert_eq!(out.status.code(), Some(0));
    let beta = json(&out)["report"]["beta"]["exponent"].as_f64().unwrap();
    assert!((beta - 2.0).abs() <= 0.15, "{beta}");
    let csv = std::fs::read_to_string(dir.path().join("beta.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("ln_R,ln_value"));
    assert_eq!(csv.lines().count(), 16);
}

#[test]
fn einstein_summary() {
    let out = run_owned(with(
        &["einstein"],
        &[&Z2[..], &["--radii", "2,4,8", "--centers", "auto5"]].concat(),
    ));
    let v = json(&out);
    assert_eq!(v["manifest"]["grid"]["centers"].as_array().unwrap().len(), 5);
    assert!(v["report"]["spread"].as_f64().unwrap() >= 1.0);
    assert_eq!(v["manifest"]["timestamp"], "1970-01-01T00:00:00Z");
}

#[test]
fn thread_count_from_environment() {
    let args = with(&["compute", "hg"], &[&Z2[..], &["--x", "center", "--R", "3"]].concat());
    let plain = run_owned(args.clone());
    let env = Command::new(env!("CARGO_BIN_EXE_einstein-lab"))
        .args(&args)
        .env("SOURCE_DATE_EPOCH", "0")
        .env("EINSTEIN_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(plain.stdout, env.stdout);
    let zero = Command::new(env!("CARGO_BIN_EXE_einstein-lab"))
        .args(&args)
        .env("EINSTEIN_LAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(zero.status.code(), Some(2));
}
