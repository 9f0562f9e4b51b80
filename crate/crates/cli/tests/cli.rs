use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn netslice(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netslice"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// The single-host fixture with its only demand replaced.
fn single_host_with_cpu(dir: &Path, cpu: f64) -> PathBuf {
    let mut inst: Value = serde_json::from_str(&fs::read_to_string(data("single_host.json")).unwrap()).unwrap();
    inst["slices"][0]["sfcs"][0]["nfs"][0]["demand"]["cpu"] = cpu.into();
    let path = dir.join(format!("cpu{cpu}.json"));
    fs::write(&path, inst.to_string()).unwrap();
    path
}

#[test]
fn solve_writes_json_and_lp() {
    let dir = tempfile::tempdir().unwrap();
    let (sol, lp) = (dir.path().join("sol.json"), dir.path().join("m.lp"));
    let out = netslice(&[&"solve", &data("two_hosts.json"), &"--export-lp", &lp, &"-o", &sol]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(json["status"], "OPTIMAL");
    assert_eq!(json["objective"], 2);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/two_hosts.lp");
    assert_eq!(fs::read(&lp).unwrap(), fs::read(golden).unwrap());
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let infeasible = single_host_with_cpu(dir.path(), 30.0);
    assert_eq!(netslice(&[&"solve", &infeasible]).status.code(), Some(2));
    let invalid = single_host_with_cpu(dir.path(), -3.0);
    let out = netslice(&[&"solve", &invalid]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(netslice(&[&"solve", &dir.path().join("missing.json")]).status.code(), Some(1));
}

#[test]
fn verify_accepts_solutions_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let inst = data("six_dc.json");
    let sol = dir.path().join("sol.json");
    assert!(netslice(&[&"solve", &inst, &"-o", &sol]).status.success());
    let out = netslice(&[&"verify", &inst, &sol]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS"));

    let mut json: Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    json["objective"] = 1.into();
    fs::write(&sol, json.to_string()).unwrap();
    let out = netslice(&[&"verify", &inst, &sol]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn verify_reads_external_dump() {
    let dir = tempfile::tempdir().unwrap();
    let inst = data("single_host.json");
    let dump = dir.path().join("sol.txt");
    fs::write(&dump, "# status OPTIMAL\n# objective 1\nrho[v1] 1\nY[s1,f1,j1,v1] 1\n").unwrap();
    let out = netslice(&[&"verify", &inst, &dump]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_produces_a_solvable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("gen.json");
    let out = netslice(&[&"gen", &data("gen_spec.json"), &"-o", &inst]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(json["slices"].as_array().unwrap().len(), 2);
    let code = netslice(&[&"solve", &inst, &"--time-limit", &"5"]).status.code();
    assert!(matches!(code, Some(0 | 2 | 3)));
}

#[test]
fn orchestrate_logs_acceptance_then_placement() {
    let out = netslice(&[&"orchestrate", &data("six_dc_sequence.json"), &"--mode", &"incremental"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let events: Vec<Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let kinds: Vec<(&str, &str)> = events
        .iter()
        .map(|e| (e["kind"].as_str().unwrap(), e["slice_id"].as_str().unwrap()))
        .collect();
    assert_eq!(
        kinds,
        [("REQUEST_ACCEPTED", "S1"), ("PLACED", "S1"), ("REQUEST_ACCEPTED", "S2"), ("PLACED", "S2")]
    );
    assert_eq!(events[3]["active_nodes"], 5);
}

#[test]
fn experiment_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let out = netslice(&[
        &"experiment", &"VARY_SLICES", &"--reps", &"2", &"--limit-x", &"3", &"--time-limit", &"2", &"-o", &csv,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("preset,slices,sfcs,nfs,nodes,seed,active_nodes,solve_time_s,status")
    );
    assert_eq!(lines.count(), 6);
    assert!(dir.path().join("runs.VARY_SLICES.summary.csv").is_file());

    let out = netslice(&[&"stats", &csv]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("series VARY_SLICES"));
    let out = netslice(&[&"stats", &csv, &"--json"]);
    let json: Value = serde_json::from_str(stdout(&out).lines().next().unwrap()).unwrap();
    assert_eq!(json["series"], "VARY_SLICES");
}

#[test]
fn unknown_preset_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = netslice(&[&"experiment", &"NOPE", &"-o", &dir.path().join("x.csv")]);
    assert_eq!(out.status.code(), Some(1));
}
