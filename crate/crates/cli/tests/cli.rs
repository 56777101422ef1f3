use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ruin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruin")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_model(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn compute_csv_has_table_layout() {
    let o = ruin(&["compute", "--builtin", "first", "--u-max", "20", "--t-max", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 22);
    let header: Vec<String> = std::iter::once("u".to_string()).chain((0..=20).map(|u| u.to_string())).collect();
    assert_eq!(lines[0], header.join(","));
    assert!(lines[1].starts_with("1,0.5,0.25,"));
    assert!(lines[21].starts_with("inf,0.877"));
}

#[test]
fn point_mass_at_zero_gives_single_zero_cell() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "zero.json", r#"{"seasons":[{"weights":[1]},{"weights":[1]},{"weights":[1]}]}"#);
    let o = ruin(&["compute", "--model", &model, "--u-max", "0", "--t-max", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "u,0\n1,0\ninf,0\n");
}

#[test]
fn exact_and_float_modes_round_identically() {
    let float = ruin(&["compute", "--builtin", "first", "--format", "pretty"]);
    let exact = ruin(&["compute", "--builtin", "first", "--mode", "exact", "--format", "pretty"]);
    assert!(float.status.success() && exact.status.success());
    assert_eq!(stdout(&float), stdout(&exact));
}

#[test]
fn csv_rerounds_to_pretty_table() {
    for model in ["first", "poisson", "geometric"] {
        let csv_out = stdout(&ruin(&["compute", "--builtin", model, "--u-max", "12", "--t-max", "9"]));
        let pretty = stdout(&ruin(&["compute", "--builtin", model, "--u-max", "12", "--t-max", "9", "--format", "pretty"]));
        let mut reader = csv::Reader::from_reader(csv_out.as_bytes());
        let pretty_rows: Vec<Vec<&str>> = pretty.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
        for (record, pretty_row) in reader.records().zip(&pretty_rows) {
            let record = record.unwrap();
            assert_eq!(&record[0], pretty_row[0]);
            for (cell, shown) in record.iter().skip(1).zip(&pretty_row[1..]) {
                let x: f64 = cell.parse().unwrap();
                let third = format!("{:.3}", x);
                // Both forms come from the same double; re-rounding must agree
                // except at exact ties, where half-away-from-zero applies.
                if third != *shown {
                    let tie = (x * 1000.0).fract();
                    assert!((tie - 0.5).abs() < 1e-9, "{model}: {cell} shown as {shown}");
                }
            }
        }
    }
}

#[test]
fn tables_reproduce_published_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = ruin(&["tables", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("all cells within 5e-4"));
    for i in 1..=3 {
        assert!(out.join(format!("table{i}.csv")).exists());
    }
    let poisson = fs::read_to_string(out.join("table2.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(poisson.as_bytes());
    let row20 = reader.records().map(Result::unwrap).find(|r| &r[0] == "20").unwrap();
    let cell: f64 = row20[10].parse().unwrap();
    assert_eq!(format!("{cell:.4}"), "0.0003");
}

#[test]
fn corrupted_golden_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("golden");
    fs::create_dir(&golden).unwrap();
    for i in 1..=3 {
        let text = ruin_core::golden::TABLE_CSV[i - 1];
        let text = if i == 1 { text.replacen("inf,0.877", "inf,0.900", 1) } else { text.to_string() };
        fs::write(golden.join(format!("table{i}.csv")), text).unwrap();
    }
    let out = dir.path().join("out");
    let o = ruin(&["tables", "--out-dir", out.to_str().unwrap(), "--golden", golden.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("table1: T=inf u=0 printed 0.900"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("table1[T=inf, u=0]"));
}

#[test]
fn mc_check_passes_and_is_deterministic() {
    let args = ["mc-check", "--builtin", "first", "--seed", "42", "--paths", "100000", "--format", "csv"];
    let a = ruin(&args);
    assert!(a.status.success(), "{}", stdout(&a));
    let b = Command::new(env!("CARGO_BIN_EXE_ruin")).args(args).env("RUIN_NUM_THREADS", "1").output().unwrap();
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 26);
}

#[test]
fn mc_check_with_one_path_passes() {
    let o = ruin(&["mc-check", "--builtin", "first", "--paths", "1"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn mc_check_on_supercritical_model_approaches_one() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "sup.json", r#"{"seasons":[{"weights":[0.1,0,0.9]},{"weights":[0,0,1]},{"weights":[0,0,1]}]}"#);
    let o = ruin(&["mc-check", "--model", &model, "--paths", "20000", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for cell in v["cells"].as_array().unwrap() {
        if cell["T"] == 20 {
            assert!(cell["p_hat"].as_f64().unwrap() > 0.99);
        }
    }
}

#[test]
fn classify_reports() {
    let o = ruin(&["classify", "--builtin", "first"]);
    assert_eq!(stdout(&o).trim(), "Subcritical, E S=2.7, branch 1 (s0≠0), leading atom s0");
    let dir = tempfile::tempdir().unwrap();
    let deg = write_model(dir.path(), "deg.json", r#"{"seasons":[{"weights":[0,0,0,1]},{"weights":[1]},{"weights":[1]}]}"#);
    assert_eq!(stdout(&ruin(&["classify", "--model", &deg])).trim(), "CriticalDegenerate, E S=3, ψ=(1,1,1,0,0,…)");
    let sup = write_model(dir.path(), "sup.json", r#"{"seasons":[{"weights":[0,0,1]},{"weights":[0,0,1]},{"weights":[0,1]}]}"#);
    assert_eq!(stdout(&ruin(&["classify", "--model", &sup])).trim(), "Supercritical, E S=5, ψ≡1");
    let json: serde_json::Value = serde_json::from_str(&stdout(&ruin(&["classify", "--builtin", "first", "--format", "json"]))).unwrap();
    assert_eq!(json["branch"]["number"], 1);
    assert_eq!(json["leading_atom"], 0);
}

#[test]
fn json_output_carries_solver_metadata() {
    let o = ruin(&["compute", "--builtin", "first", "--u-max", "2", "--t-max", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ultimate"]["source"], "solver");
    assert_eq!(v["ultimate"]["meta"]["branch"], 1);
    assert!(v["ultimate"]["boundary_index"].as_u64().unwrap() >= 250);
    assert!(v["ultimate"]["meta"]["escalations"].is_u64());
    assert_eq!(v["rows"].as_array().unwrap().last().unwrap()["horizon"], "inf");
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = ruin(&["compute", "--builtin", "geometric", "--u-max", "3", "--t-max", "2", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(path).unwrap().starts_with("u,0,1,2,3\n"));
}

#[test]
fn exit_codes_separate_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(ruin(&["compute", "--model", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(ruin(&["compute", "--bogus"]).status.code(), Some(2));
    assert_eq!(ruin(&["compute", "--builtin", "first", "--solver", "nope"]).status.code(), Some(2));
    let bad = write_model(dir.path(), "bad.json", r#"{"seasons":[{"weights":[-1, 2]}]}"#);
    assert_eq!(ruin(&["compute", "--model", &bad]).status.code(), Some(3));
    let junk = write_model(dir.path(), "junk.json", "not json");
    assert_eq!(ruin(&["classify", "--model", &junk]).status.code(), Some(3));
    assert_eq!(ruin(&["compute", "--builtin", "poisson", "--mode", "exact"]).status.code(), Some(3));
    assert_eq!(ruin(&["compute", "--builtin", "first", "--boundary", "2000", "--no-escalation"]).status.code(), Some(4));
    assert_eq!(ruin(&["--help"]).status.code(), Some(0));
}
