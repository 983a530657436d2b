use std::path::Path;
use std::process::{Command, Output};

fn twshield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twshield"))
        .args(args)
        .env_remove("TWSHIELD_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn compile_fig2_formula_has_one_accepting_and_one_trash_state() {
    let dot = twshield(&["compile", "[H^1 B]^[0,2]", "--props", "B"]);
    assert!(dot.status.success(), "{}", stderr(&dot));
    let text = stdout(&dot);
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("doublecircle").count(), 1);
    assert_eq!(text.matches("label=\"trash\"").count(), 1);

    let out = twshield(&[
        "compile",
        "[H^1 B]^[0,2]",
        "--props",
        "B",
        "--format",
        "json",
    ]);
    let doc = json(&out);
    assert_eq!(doc["accepting"].as_array().unwrap().len(), 1);
    assert!(doc["trash"].is_number());
}

#[test]
fn compile_trivial_hold_has_two_states() {
    let out = twshield(&["compile", "H^0 TRUE", "--props", "B", "--format", "json"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["states"].as_array().unwrap().len(), 2);
}

#[test]
fn compile_writes_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = twshield(&[
        "compile",
        "[H^1 P]^[0,8] . [H^1 Base]^[0,4]",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("automaton.dot").exists());
    assert!(dir.path().join("automaton.json").exists());
}

#[test]
fn malformed_formula_exits_with_config_error() {
    let out = twshield(&["compile", "[H^1 B", "--props", "B"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("syntax error"), "{}", stderr(&out));
    let out = twshield(&["compile", "H^1 Q", "--props", "B"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_threshold_exits_with_code_three_and_lists_states() {
    let out = twshield(&["prune", "--pr-des", "1.0"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(
        err.contains("check_initial") && err.contains("r0c0"),
        "{err}"
    );

    let out = twshield(&["prune", "--pr-des", "1.0", "--allow-unsafe"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["initial_check_passed"], false);
}

#[test]
fn build_reports_product_layers() {
    let out = twshield(&["build"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = json(&out);
    assert_eq!(summary["horizon"], 35);
    assert_eq!(summary["layer_sizes"].as_array().unwrap().len(), 36);
    assert_eq!(summary["initial"], 36);
}

fn run_small(dir: &Path) -> Output {
    twshield(&[
        "run",
        "--episodes",
        "200",
        "--eval-episodes",
        "100",
        "--mode",
        "multi-shot",
        "--pr-des",
        "0.7",
        "--output-dir",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn run_writes_reports_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let out = run_small(a.path());
    assert!(out.status.success(), "{}", stderr(&out));
    for file in [
        "summary.json",
        "episodes.csv",
        "automaton.dot",
        "automaton.json",
        "product.json",
    ] {
        assert!(a.path().join(file).exists(), "{file}");
    }
    let sa = std::fs::read(a.path().join("summary.json")).unwrap();
    run_small(a.path());
    let sb = std::fs::read(a.path().join("summary.json")).unwrap();
    assert_eq!(sa, sb);
    let summary: serde_json::Value = serde_json::from_slice(&sa).unwrap();
    assert_eq!(summary["config"]["learner"]["episodes"], 200);
    assert_eq!(summary["timestamps"], serde_json::json!([0, 8, 15, 22, 35]));
    assert!(summary["version"].is_string());
    let csv = std::fs::read_to_string(a.path().join("episodes.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("episode,satisfied,cum_reward,shield_entry_t,steps_shielded")
    );
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn config_file_fields_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"pr_des": 0.5, "mode": "one_shot", "learner": {"episodes": 50, "seed": 7}, "eval_episodes": 10}"#,
    )
    .unwrap();
    let out = twshield(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--pr-des",
        "0.7",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = json(&out);
    assert_eq!(summary["pr_des"], 0.7);
    assert_eq!(summary["config"]["learner"]["seed"], 7);
    assert_eq!(summary["learning"]["episodes"], 50);

    std::fs::write(&cfg, r#"{"pr_dez": 0.5}"#).unwrap();
    let out = twshield(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_dir_defaults_to_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_twshield"))
        .args(["learn", "--episodes", "20"])
        .env("TWSHIELD_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("policy.json").exists());
    assert!(dir.path().join("episodes.csv").exists());
}

#[test]
fn learn_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = twshield(&[
        "learn",
        "--episodes",
        "300",
        "--pr-des",
        "0.9",
        "--epsilon",
        "0.08",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json(&out)["audit_violations"], 0);
    let policy = dir.path().join("policy.json");
    let out = twshield(&[
        "eval",
        "--policy",
        policy.to_str().unwrap(),
        "--episodes",
        "500",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["episodes"], 500);
    let rate = report["satisfaction_rate"].as_f64().unwrap();
    assert_eq!(rate, report["satisfied"].as_f64().unwrap() / 500.0);
    assert!(rate >= 0.9 - 3.0 * (0.9f64 * 0.1 / 500.0).sqrt(), "{rate}");
}

#[test]
fn sweep_emits_two_by_nine_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = twshield(&[
        "sweep",
        "--episodes",
        "10",
        "--eval-episodes",
        "10",
        "--allow-unsafe",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0].matches('(').count(), 10, "{table}");
    assert!(lines[1].starts_with("one_shot"));
    assert!(lines[2].starts_with("multi_shot"));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 19);

    // Without the override the multi-shot (0.13, 0.9) config fails its
    // initial check.
    let out = twshield(&[
        "sweep",
        "--episodes",
        "10",
        "--eval-episodes",
        "10",
        "--epsilons",
        "0.13",
        "--pr-values",
        "0.9",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stderr(&out).contains("multi_shot (0.13, 0.9)"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn verify_passes_reproducibly_and_catches_corruption() {
    let small = [
        "verify",
        "--instances",
        "60",
        "--lp-instances",
        "60",
        "--formulas",
        "20",
        "--seed",
        "3",
    ];
    let a = twshield(&small);
    assert!(a.status.success(), "{}", stdout(&a));
    assert_eq!(
        stdout(&a).lines().filter(|l| l.starts_with("PASS")).count(),
        6
    );
    let b = twshield(&small);
    assert_eq!(a.stdout, b.stdout);

    let mut corrupted = small.to_vec();
    corrupted.extend(["--corrupt-f", "0.5"]);
    let out = twshield(&corrupted);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("FAIL pi_c_dominates_f"));
}

#[test]
fn start_cell_flag_takes_row_comma_col() {
    let dir = tempfile::tempdir().unwrap();
    let out = twshield(&[
        "run",
        "--start",
        "1,4",
        "--episodes",
        "5",
        "--eval-episodes",
        "5",
        "--pr-des",
        "0.5",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        json(&out)["config"]["start"],
        serde_json::json!({"row": 1, "col": 4})
    );
    assert_eq!(twshield(&["build", "--start", "1"]).status.code(), Some(2));
}
