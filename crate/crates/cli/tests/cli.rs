use std::path::Path;
use std::process::{Command, Output};

fn cmc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmc-scri"))
        .current_dir(dir)
        .env_remove("CMC_SCRI_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A small but diagnosable run: 16 × 128 grid, four stages.
const SMALL: [&str; 6] = [
    "--override",
    "solver.n_theta=16",
    "--override",
    "solver.n_s=128",
    "--override",
    "solver.stages=4",
];

#[test]
fn default_foliation_check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cmc(tmp.path(), &["foliation-check", "--out", "fc"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("fc/foliation_check.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(tmp.path().join("fc/foliation_sweep.csv").exists());
}

#[test]
fn oversized_slab_lists_non_spacelike_points() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cmc(
        tmp.path(),
        &[
            "foliation-check",
            "--override",
            "s0=0.4",
            "--override",
            "cut={\"kind\":\"cos_theta\",\"amplitude\":2.0}",
        ],
    );
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("L ≤ 0"), "{err}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/foliation_check.json")).unwrap()).unwrap();
    assert!(report["slab"]["nonspacelike_count"].as_u64().unwrap() > 0);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), "{ \"schema_version\": 1, \"mass\": ").unwrap();
    let o = cmc(tmp.path(), &["solve", "--config", "bad.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("config error"), "{}", stderr(&o));

    std::fs::write(tmp.path().join("typo.json"), "{ \"schema_version\": 1, \"h_0\": 1 }").unwrap();
    assert_eq!(code(&cmc(tmp.path(), &["solve", "--config", "typo.json"])), 2);
    assert_eq!(code(&cmc(tmp.path(), &["solve", "--config", "missing.json"])), 2);
    assert_eq!(code(&cmc(tmp.path(), &["no-such-command"])), 2);
}

#[test]
fn absurd_guard_fails_with_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["solve", "--override", "solver.kappa=10"];
    args.extend(SMALL);
    let o = cmc(tmp.path(), &args);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("stage 1") && err.contains("guard starvation"), "{err}");
}

#[test]
fn solve_is_deterministic_and_refits() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        let mut args = vec!["solve", "--out", out];
        args.extend(SMALL);
        let o = cmc(tmp.path(), &args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        String::from_utf8(o.stdout).unwrap()
    };
    let stdout = run("a");
    assert!(stdout.contains("c1 ≈ 0.5"), "{stdout}");
    run("b");
    for name in ["solution.csv", "fit_residuals.csv", "diagnostics.json", "plot.py"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs between reruns");
    }
    let head = std::fs::read_to_string(tmp.path().join("a/solution.csv")).unwrap();
    assert_eq!(head.lines().next().unwrap(), "theta,s,Q,u,L,nu_tilde,nu");

    let o = cmc(tmp.path(), &["asymptotics", "a", "--out", "refit"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        std::fs::read(tmp.path().join("a/fit_residuals.csv")).unwrap(),
        std::fs::read(tmp.path().join("refit/fit_residuals.csv")).unwrap()
    );

    let o = cmc(tmp.path(), &["report", "a", "b", "--out", "merged"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let md = std::fs::read_to_string(tmp.path().join("merged/report.md")).unwrap();
    assert!(md.contains("asymptotics.c1_rel_err"));
}

#[test]
fn barriers_subcommand_writes_its_report() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["barriers", "--override", "cut={\"kind\":\"legendre2\",\"amplitude\":0.2}", "--override", "h0=2"];
    args.extend(SMALL);
    let o = cmc(tmp.path(), &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/barriers.json")).unwrap()).unwrap();
    assert!(r["pair"]["beta1"].as_f64().unwrap() < 0.0);
    assert_eq!(r["obstruction"].as_array().unwrap().len(), 4);
}

#[test]
fn tabulated_cut_resolves_relative_to_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("cfg");
    std::fs::create_dir(&dir).unwrap();
    let mut csv = String::from("theta,value\n");
    for j in 0..32 {
        let t = (j as f64 + 0.5) * std::f64::consts::PI / 32.0;
        csv.push_str(&format!("{t},{}\n", 0.2 * t.cos()));
    }
    std::fs::write(dir.join("cut.csv"), csv).unwrap();
    std::fs::write(
        dir.join("run.json"),
        r#"{ "schema_version": 1, "cut": { "kind": "tabulated", "path": "cut.csv" } }"#,
    )
    .unwrap();
    let o = cmc(tmp.path(), &["foliation-check", "--config", "cfg/run.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cmc-scri"))
        .current_dir(tmp.path())
        .env("CMC_SCRI_THREADS", "zero")
        .arg("foliation-check")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn default_solve_reports_c1_of_one_half() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cmc(tmp.path(), &["solve"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/diagnostics.json")).unwrap()).unwrap();
    for c in d["fit"]["c1"].as_array().unwrap() {
        assert!((c.as_f64().unwrap() - 0.5).abs() < 0.01);
    }
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["sandwich_ok"], true);
    assert_eq!(m["all_claims_pass"], true);
}
