use std::fs;
use std::process::{Command, Output};

fn cuntz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuntz")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_passes_at_grade_six() {
    let o = cuntz(&["verify", "--n", "2", "--max-grade", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("verified")));
    assert!(text.contains("toracle.positivity"));
}

#[test]
fn adjudicate_reports_the_named_verdicts() {
    let o = cuntz(&["adjudicate", "--n", "3", "--max-grade", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let verdicts = v["verdicts"].as_array().unwrap();
    for id in ["lemmab.case3", "bigtcomp.diagonal"] {
        let found = verdicts.iter().find(|x| x["id"] == id).unwrap_or_else(|| panic!("{id} missing"));
        assert!(!found["witnesses"].as_array().unwrap().is_empty());
    }
    let c3 = verdicts.iter().find(|x| x["id"] == "lemmab.case3").unwrap();
    assert!(c3["witnesses"].as_array().unwrap().iter().any(|w| w["paper"] == "4/3" && w["oracle"] == "1/3"));
}

#[test]
fn adjudicate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = cuntz(&["adjudicate", "--n", "2", "--max-grade", "4", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn fit_suite_writes_a_sibling_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = cuntz(&["adjudicate", "--n", "2", "--max-grade", "3", "--suite", "paper,fit", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.fit.json")).unwrap()).unwrap();
    assert_eq!(fit["residual"], "0");
}

#[test]
fn exit_codes() {
    assert_eq!(cuntz(&["verify", "--n", "1"]).status.code(), Some(2));
    assert_eq!(cuntz(&["verify", "--exact-cap", "0"]).status.code(), Some(2));
    assert_eq!(cuntz(&["heat-trace", "--t", "1,-0.5"]).status.code(), Some(2));
    assert_eq!(cuntz(&["spectrum", "--variant", "d_nothing"]).status.code(), Some(2));
    assert_eq!(cuntz(&["spectrum", "--config", "/nonexistent/run.conf"]).status.code(), Some(2));
    let o = cuntz(&["spectrum", "--n", "3", "--max-grade", "4", "--variant", "d_oracle", "--max-dim", "50"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "N = 3\nmax_grade = 9\nvariant = d_kappa\n").unwrap();
    let o = cuntz(&["spectrum", "--config", conf.to_str().unwrap(), "--max-grade", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    // grade (2,0) at N = 3 has 9 labels with eigenvalue 2
    assert!(text.lines().any(|l| l == "2,0,2.0000000000000000e0,9"), "{text}");
    assert!(!text.lines().any(|l| l.starts_with("3,")));
}

#[test]
fn heat_trace_csv_schema() {
    let o = cuntz(&["heat-trace", "--variant", "d_tilde", "--t", "1.0,0.5,0.25", "--n", "2", "--max-grade", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,partial_trace,tail_bound,monotone"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with(",true") && r.split(',').count() == 4));
}

#[test]
fn frohlich_and_spectrum_headers() {
    let o = cuntz(&["frohlich", "--n", "2", "--max-grade", "3", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("variant,t,rho,sigma,value,error_bound\n"));
    let o = cuntz(&["spectrum", "--n", "2", "--max-grade", "2", "--variant", "d_paper"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("n,k,eigenvalue,multiplicity\n"));
}

#[test]
fn second_run_hits_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--n", "3", "--max-grade", "3", "--variant", "d_oracle", "--cache-dir", dir.path().to_str().unwrap()];
    let run = || Command::new(env!("CARGO_BIN_EXE_cuntz")).args(args).env("RUST_LOG", "info").output().unwrap();
    let first = run();
    let second = run();
    let (e1, e2) = (String::from_utf8_lossy(&first.stderr), String::from_utf8_lossy(&second.stderr));
    assert!(e1.contains("cache=miss") && !e1.contains("cache=hit"));
    assert!(e2.contains("cache=hit") && !e2.contains("cache=miss"));
    assert!(e2.contains("elapsed_ms="));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn report_is_human_readable() {
    let o = cuntz(&["report", "--n", "2", "--max-grade", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# cuntz report"));
    assert!(text.contains("## Heat traces"));
    assert!(text.contains("lemmab.case3"));
}
