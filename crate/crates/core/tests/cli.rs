use std::path::Path;
use std::process::Command;

use slackstitch::cli;

const DEVICES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/devices");

fn run(args: &[&str]) -> Result<String, slackstitch::Error> {
    let mut out = Vec::new();
    cli::run(std::iter::once("slackstitch").chain(args.iter().copied()), &mut out)?;
    Ok(String::from_utf8(out).expect("utf-8 report"))
}

fn device(name: &str) -> String {
    format!("{DEVICES}/{name}.toml")
}

fn field(line: &str, col: usize) -> &str {
    line.split_whitespace().nth(col).unwrap()
}

#[test]
fn compare_table_has_every_policy() {
    let text = run(&["compare", "--bench", "ghz", "--n", "5", "--device", &device("reference"), "--seed", "7"]).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    let labels: Vec<&str> = rows.iter().map(|l| field(l, 0)).collect();
    assert_eq!(labels, ["ALAP", "ASAP", "Middle", "TS-SI", "TS-SI+C", "DD", "DD(H)", "TS+DD", "TS+DD(H)"]);
    assert!(text.lines().nth(1).unwrap().contains("rel_pos"));
    let alap_duration = field(rows[0], 1);
    for r in &rows {
        assert_eq!(field(r, 1), alap_duration, "{r}");
    }
}

#[test]
fn tune_then_run_keeps_duration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tuned");
    let tuned = run(&[
        "tune", "--bench", "qft", "--mode", "ts-si-c", "--seed", "4", "--budget", "200",
        "--out", out.to_str().unwrap(),
    ])
    .unwrap();
    let header = tuned.lines().next().unwrap();
    let base = header.split("baseline_duration=").nth(1).unwrap().split(' ').next().unwrap();
    let schedule = out.join("schedule.json");
    assert!(out.join("report.json").exists() && out.join("report.txt").exists());
    let ran = run(&["run", "--schedule", schedule.to_str().unwrap(), "--eval-shots", "500"]).unwrap();
    assert!(ran.starts_with(&format!("# run name=qft-4 total_duration={base} ")), "{ran}");
}

#[test]
fn noise_free_ghz_always_succeeds() {
    let text = run(&["run", "--bench", "ghz", "--n", "5", "--device", &device("noise_free")]).unwrap();
    assert!(text.contains("pos\t1.000000"), "{text}");
    assert!(text.contains("hellinger\t1.000000"), "{text}");
}

#[test]
fn bench_writes_circuits_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    run(&["bench", "--out", dir.path().to_str().unwrap()]).unwrap();
    for name in ["ghz-5", "qft-4", "qaoa-4", "adder-6", "rep-5"] {
        let qasm = std::fs::read_to_string(dir.path().join(format!("{name}.qasm"))).unwrap();
        slackstitch::qasm::parse(&qasm).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{name}.accepted.json"))).unwrap())
                .unwrap();
        assert!(!manifest["accepted"].as_array().unwrap().is_empty());
    }
}

#[test]
fn qasm_file_input_round_trips_through_schedule() {
    let dir = tempfile::tempdir().unwrap();
    run(&["bench", "--bench", "ghz", "--n", "4", "--out", dir.path().to_str().unwrap()]).unwrap();
    let qasm = dir.path().join("ghz-4.qasm");
    let from_file = run(&["schedule", "--input", qasm.to_str().unwrap()]).unwrap();
    let from_bench = run(&["schedule", "--bench", "ghz", "--n", "4"]).unwrap();
    // Same body; only the name in the header differs.
    assert_eq!(from_file.lines().skip(1).collect::<Vec<_>>(), from_bench.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn slice_manifest_lists_every_window() {
    let dir = tempfile::tempdir().unwrap();
    let text = run(&["slice", "--bench", "qft", "--out", dir.path().to_str().unwrap()]).unwrap();
    let manifest: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.len(), text.lines().count() - 2);
    for m in &manifest {
        let id = m["window_id"].as_u64().unwrap();
        assert!(Path::new(&dir.path().join(format!("qft-4_w{id}.qasm"))).exists());
        assert_eq!(m["si_cx_depth"].as_u64(), m["slice_cx_depth"].as_u64().map(|d| 2 * d));
    }
}

#[test]
fn reports_are_reproducible() {
    let args = ["tune", "--bench", "ghz", "--mode", "ts-si", "--seed", "3", "--budget", "120"];
    assert_eq!(run(&args).unwrap(), run(&args).unwrap());
}

#[test]
fn dd_flags_insert_gates_without_changing_duration() {
    let plain = run(&["run", "--bench", "ghz", "--n", "5", "--dd", "on"]).unwrap();
    let heur = run(&["run", "--bench", "ghz", "--n", "5", "--dd", "heuristic", "--dd-factor", "4"]).unwrap();
    let base = run(&["run", "--bench", "ghz", "--n", "5"]).unwrap();
    let dur = |s: &str| s.split("total_duration=").nth(1).unwrap().split(' ').next().unwrap().to_string();
    let inserted = |s: &str| s.split("dd_inserted=").nth(1).unwrap().split(' ').next().unwrap().parse::<usize>().unwrap();
    assert_eq!(dur(&plain), dur(&base));
    assert_eq!(dur(&heur), dur(&base));
    assert!(inserted(&plain) >= inserted(&heur));
    assert_eq!(inserted(&base), 0);
    assert!(run(&["run", "--bench", "ghz", "--dd", "on", "--dd-factor", "0"]).is_err());
}

#[test]
fn binary_reports_errors_with_nonzero_exit() {
    let bin = env!("CARGO_BIN_EXE_slackstitch");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qasm");
    std::fs::write(&bad, "OPENQASM 2.0;\nqreg q[1];\nt q[0];\n").unwrap();
    let out = Command::new(bin).args(["schedule", "--input", bad.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.qasm") && err.contains("3:1") && err.contains("\"t\""), "{err}");

    let out = Command::new(bin).args(["run", "--input", "/nonexistent.qasm"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent.qasm"));

    let out = Command::new(bin).args(["schedule", "--bench", "qft", "--n", "9"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn device_comes_from_environment() {
    let bin = env!("CARGO_BIN_EXE_slackstitch");
    let out = Command::new(bin)
        .args(["run", "--bench", "ghz", "--n", "5"])
        .env(cli::DEVICE_ENV, device("noise_free"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("pos\t1.000000"));
}

#[test]
fn device_too_small_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.toml");
    let mut d = slackstitch::ir::DeviceModel::ideal_line(2, 160, 1600, 4480);
    d.dt = 2.2222e-10;
    std::fs::write(&path, d.to_toml_string().unwrap()).unwrap();
    let err = run(&["schedule", "--bench", "ghz", "--n", "5", "--device", path.to_str().unwrap()]).unwrap_err();
    assert!(matches!(err, slackstitch::Error::Validation(_)), "{err}");
}
