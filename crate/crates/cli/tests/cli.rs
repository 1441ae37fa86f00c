use std::path::Path;
use std::process::{Command, Output};

use qdepth_core::problems::{InstanceFile, ProblemInstance};
use serde::Deserialize;
use tempfile::TempDir;

fn qdepth(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdepth"))
        .args(args)
        .env("QDEPTH_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_is_byte_identical_per_seed() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = qdepth(&["gen", "--problem", "scs", "--n", "4", "--d", "2", "--seed", "7", "--out", p.to_str().unwrap()], dir.path());
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = dir.path().join("c.json");
    qdepth(&["gen", "--problem", "scs", "--n", "4", "--d", "2", "--seed", "8", "--out", other.to_str().unwrap()], dir.path());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&other).unwrap());
}

#[test]
fn gen_serial_passes_the_gate_check() {
    let dir = TempDir::new().unwrap();
    let o = qdepth(&["gen", "--problem", "serial", "--n", "3", "--d", "2", "--seed", "1"], dir.path());
    assert!(o.status.success());
    let path = dir.path().join("instance-serial-n3-d2-s1.json");
    assert_eq!(stdout(&o).trim(), path.to_str().unwrap());
    let file = InstanceFile::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    match file.instance {
        ProblemInstance::Serial(s) => {
            s.gate_check().unwrap();
            assert_eq!((s.n, s.c), (3, 2));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn oversized_instances_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let o = qdepth(&["gen", "--problem", "ss", "--n", "40", "--d", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside the supported range"));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(qdepth(&["verify", "--suite", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(qdepth(&["solve", "--problem", "scs", "--model", "qnc", "--n", "4", "--trials", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(qdepth(&["solve", "--model", "cq", "--trials", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(qdepth(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn threshold_miss_exits_one() {
    let dir = TempDir::new().unwrap();
    // At n = 2 a single round of six rows sometimes leaves the period undetermined.
    let o = qdepth(&["solve", "--problem", "simon", "--model", "qnc", "--n", "2", "--trials", "200", "--threshold", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve-simon-qnc-b1-n2-d0-s0.json")).unwrap()).unwrap();
    assert!(report["aggregate"]["rate"].as_f64().unwrap() < 1.0);
    assert_eq!(report["aggregate"]["pass"], false);
    let o = qdepth(&["solve", "--problem", "simon", "--model", "qnc", "--n", "3", "--trials", "5", "--threshold", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn instance_file_fixes_the_instance() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("inst.json");
    qdepth(&["gen", "--problem", "ss", "--n", "3", "--d", "1", "--seed", "4", "--out", inst.to_str().unwrap()], dir.path());
    let o = qdepth(&["solve", "--instance-file", inst.to_str().unwrap(), "--model", "cq", "--trials", "5", "--seed", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve-ss-cq-b3-n3-d1-s2.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["instance_seed"], 4);
    let expected: Vec<_> = report["rows"].as_array().unwrap().iter().map(|r| r["expected"].clone()).collect();
    assert!(expected.windows(2).all(|w| w[0] == w[1]));
    let o = qdepth(&["solve", "--instance-file", inst.to_str().unwrap(), "--problem", "scs", "--model", "cq"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_rows_are_recomputable_and_csv_matches() {
    let dir = TempDir::new().unwrap();
    assert!(qdepth(&["solve", "--problem", "serial", "--model", "cq", "--depth", "1", "--n", "3", "--d", "1", "--trials", "12", "--seed", "1"], dir.path()).status.success());
    assert!(qdepth(&["solve", "--problem", "serial", "--model", "qc", "--n", "3", "--d", "1", "--trials", "12", "--seed", "1"], dir.path()).status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve-serial-cq-b1-n3-d1-s1.json")).unwrap()).unwrap();
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    let successes = rows.iter().filter(|r| r["success"] == true).count() as u64;
    assert_eq!(json["aggregate"]["successes"].as_u64(), Some(successes));
    let per_trial = std::fs::read_to_string(dir.path().join("solve-serial-cq-b1-n3-d1-s1.csv")).unwrap();
    assert_eq!(per_trial.lines().count(), 13);

    let o = qdepth(&["report"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("serial   cq        1") && text.contains("serial   qc        4"), "{text}");
    assert!(text.contains("missing rows: simon/qnc, ss/cq, scs/qc, scs/cq"));

    #[derive(Deserialize)]
    struct Row {
        problem: String,
        model: String,
        depth: usize,
        trials: usize,
        successes: usize,
        rate: f64,
        wilson_lo: f64,
        wilson_hi: f64,
        source: String,
    }
    let mut reader = csv::Reader::from_path(dir.path().join("table.csv")).unwrap();
    let table: Vec<Row> = reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(table.len(), 2);
    for row in &table {
        let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(&row.source)).unwrap()).unwrap();
        let agg = &r["aggregate"];
        assert_eq!(row.problem, "serial");
        assert_eq!(row.model, r["config"]["model"].as_str().unwrap());
        assert_eq!(row.depth as u64, r["config"]["depth_budget"].as_u64().unwrap());
        assert_eq!((row.trials as u64, row.successes as u64), (agg["trials"].as_u64().unwrap(), agg["successes"].as_u64().unwrap()));
        assert_eq!(row.rate, agg["rate"].as_f64().unwrap());
        assert_eq!((row.wilson_lo, row.wilson_hi), (agg["wilson_lo"].as_f64().unwrap(), agg["wilson_hi"].as_f64().unwrap()));
    }
}

#[test]
fn empty_report_dir_says_so() {
    let dir = TempDir::new().unwrap();
    let o = qdepth(&["report"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no reports"));
}

#[test]
fn out_flag_overrides_the_environment() {
    let (env_dir, flag_dir) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let o = qdepth(&["verify", "--suite", "combinatorics", "--out", flag_dir.path().to_str().unwrap()], env_dir.path());
    assert!(o.status.success());
    assert!(flag_dir.path().join("verify-combinatorics-s0.json").exists());
    assert!(std::fs::read_dir(env_dir.path()).unwrap().next().is_none());
}
