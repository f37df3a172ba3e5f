//! The `oneway` binary: presets, sweeps, determinism and the verify table.

use std::process::Command;

fn oneway() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oneway"))
}

#[test]
fn presets_are_listed() {
    let out = oneway().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig1", "fig2", "fig4", "dj", "ancilla"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
    let one = oneway().args(["presets", "fig1"]).output().unwrap();
    assert!(String::from_utf8(one.stdout).unwrap().contains("\"protocol\": \"rsp\""));
}

#[test]
fn run_is_deterministic_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"protocol": "ancilla", "angles": [0.3],
            "channels": [{"kind": "white", "label": "w", "gamma": 0.5},
                         {"kind": "general", "label": "g", "B": 1.0, "C": 0.8, "S": 0.9}],
            "sweep": {"t_min": 0, "t_max": 1, "steps": 4},
            "measures": ["fidelity", "bound"], "seed": 3}"#,
    )
    .unwrap();
    let mut csvs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let st = oneway().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
        assert!(st.success());
        csvs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    assert!(text.starts_with("t,F_w,F_g,B_w,B_g\n"));
    assert_eq!(text.lines().count(), 5);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["seed"], 3);

    let other = dir.path().join("c.csv");
    assert!(oneway().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&other).args(["--seed", "4"]).status().unwrap().success());
    assert_ne!(std::fs::read(&other).unwrap(), csvs[0]);
}

#[test]
fn preset_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let st = oneway().args(["run", "--preset", "fig1", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,F_pf,F_w,C_pf,C_w\n"));
}

#[test]
fn bad_configs_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"protocol": "simon", "channels": [{"kind": "pf", "label": "pf", "gamma": 1}],
        "sweep": {"t_min": 0, "t_max": 1, "steps": 3}, "measures": ["fidelity"]}"#).unwrap();
    let out = oneway().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown protocol"));

    std::fs::write(&cfg, "{\n  \"protocol\": \"rsp\",\n  \"measures\": [\"entropy\"]\n}").unwrap();
    let out = oneway().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");

    let out = oneway().args(["run", "--preset", "fig1", "--out", "/nonexistent-dir/\0/x.csv"]).output();
    assert!(out.map(|o| !o.status.success()).unwrap_or(true));
}

#[test]
fn verify_filter_and_perturbed_tolerance() {
    let out = oneway().args(["verify", "--filter", "rotation"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);

    let out = oneway().args(["verify", "--filter", "channels", "--tolerance-scale", "0"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL 11"));

    let out = oneway().args(["verify", "--filter", "nothing-matches"]).output().unwrap();
    assert!(!out.status.success());
}
