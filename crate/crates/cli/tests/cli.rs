use std::fs;
use std::process::{Command, Output};

use dphase::fem::GapReport;
use dphase::regime::{PhaseCell, RegimeReport, Verdict};

fn dphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dphase"))
        .args(args)
        .output()
        .expect("spawn dphase")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn error_code(o: &Output) -> String {
    let line = stderr(o);
    let line = line.lines().last().unwrap_or_default().to_string();
    assert!(line.starts_with("error code="), "stderr: {line}");
    assert!(line.contains(" message=\""), "stderr: {line}");
    line["error code=".len()..].split(' ').next().unwrap().to_string()
}

#[test]
fn classify_reports_gap() {
    let o = dphase(&["classify", "--alpha", "2", "--beta", "2"]);
    assert!(o.status.success());
    let r: RegimeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.verdict, Verdict::Gap);
}

#[test]
fn flux_prints_one() {
    let o = dphase(&["flux", "--nquad", "1024"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-6);
}

#[test]
fn g_mode_outside_gap_regime_exits_2() {
    let o = dphase(&["gap", "--alpha", "2", "--beta", "0.5", "--mode", "G"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "GAP_PRECONDITION_B_NOT_DUAL_INTEGRABLE");
    assert!(o.stdout.is_empty());
}

#[test]
fn invalid_parameters_exit_2() {
    let o = dphase(&["cutoff", "--kind", "loglog", "--eps", "2"]);
    assert_eq!(o.status.code(), Some(2));
    error_code(&o);
    let o = dphase(&["flux", "--nquad", "8"]);
    assert_eq!(o.status.code(), Some(2));
    error_code(&o);
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("report.json");
    let o = dphase(&["flux", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_code(&o), "IO_ERROR");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"command":"flux","nquad":1024,"bogus":1}"#).unwrap();
    let o = dphase(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "CONFIG_INVALID");
}

#[test]
fn config_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"command":"classify","alpha":0.5,"beta":3}"#).unwrap();
    let from_cfg = dphase(&["--config", cfg.to_str().unwrap()]);
    let from_flags = dphase(&["classify", "--alpha", "0.5", "--beta", "3"]);
    assert!(from_cfg.status.success());
    assert_eq!(from_cfg.stdout, from_flags.stdout);
}

#[test]
fn reports_round_trip() {
    let o = dphase(&["classify", "--alpha", "1", "--beta", "3"]);
    let text = stdout(&o);
    let r: RegimeReport = serde_json::from_str(&text).unwrap();
    assert_eq!(dphase::json::to_string(&r).unwrap(), text.trim_end());

    let o = dphase(&["phase-diagram", "--format", "json"]);
    let text = stdout(&o);
    let cells: Vec<PhaseCell> = serde_json::from_str(&text).unwrap();
    assert_eq!(cells.len(), 36);
    assert_eq!(dphase::json::to_string(&cells).unwrap(), text.trim_end());

    let o = dphase(&["gap", "--alpha", "2", "--beta", "2", "--levels", "8,16"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let g: GapReport = serde_json::from_str(&text).unwrap();
    assert_eq!(g.levels.len(), 2);
    assert!(g.levels.iter().all(|l| l.e1 <= l.e2));
    assert_eq!(dphase::json::to_string(&g).unwrap(), text.trim_end());
}

#[test]
fn csv_headers_are_fixed() {
    let cases: [(&[&str], &str); 4] = [
        (&["phase-diagram", "--alphas", "2", "--betas", "2"], "alpha,beta,verdict,rule"),
        (&["fields", "--n", "4", "--format", "csv"], "x1,x2,a,u2,grad_u2,b2"),
        (&["conjugate", "--gamma", "1", "--format", "csv"], "s,numeric,closed_form,ratio"),
        (
            &["gap", "--alpha", "2", "--beta", "2", "--levels", "8", "--format", "csv"],
            "n,h_min,E1,E2,s_opt,sep_value,iters_conforming,iters_enriched,converged",
        ),
    ];
    for (args, header) in cases {
        let o = dphase(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        assert_eq!(stdout(&o).lines().next().unwrap(), header);
    }
}

#[test]
fn side_files_carry_headers() {
    let dir = tempfile::tempdir().unwrap();
    let nodal = dir.path().join("nodal.csv");
    let o = dphase(&[
        "gap", "--alpha", "2", "--beta", "2", "--levels", "8", "--nodal-csv",
        nodal.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&nodal).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x1,x2,conforming,enriched_nodal,enriched_total");

    let profile = dir.path().join("profile.csv");
    let o = dphase(&[
        "cutoff", "--kind", "loglog", "--eps", "1e-3", "--profile-csv",
        profile.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&profile).unwrap();
    assert_eq!(text.lines().next().unwrap(), "u,r,eta,eta_prime");
    assert!(text.lines().count() > 100);
}

#[test]
fn rerunning_a_config_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"command":"gap","alpha":2,"beta":2,"levels":[8,16],"out":{:?},"format":"json"}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let run = || {
        let o = dphase(&["--config", cfg.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(&out).unwrap()
    };
    let first = run();
    fs::write(&out, b"stale").unwrap();
    let second = run();
    assert_eq!(first, second);
    assert!(!first.is_empty());
}
