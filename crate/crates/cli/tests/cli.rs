use std::process::{Command, Output};

use persistency::states::{load_state_file, stabilizer_defect, Graph, State};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_persistency")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = run(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn nonzero(v: &Value) -> Vec<(f64, f64)> {
    v["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
        .filter(|(re, im)| re.hypot(*im) > 1e-12)
        .collect()
}

#[test]
fn build_w4() {
    let v = json(&["build", "w:4"]);
    assert_eq!(v["amplitudes"].as_array().unwrap().len(), 16);
    let nz = nonzero(&v);
    assert_eq!(nz.len(), 4);
    assert!(nz.iter().all(|(re, im)| (re - 0.5).abs() < 1e-12 && im.abs() < 1e-12));
}

#[test]
fn build_psi4_term_count() {
    let v = json(&["build", "psi4"]);
    assert_eq!(v["dims"], serde_json::json!([4, 4, 4, 4]));
    assert_eq!(nonzero(&v).len(), 10);
}

#[test]
fn build_ring6_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ring6.json");
    let o = run(&["build", "ring:6", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let State::Pure(psi) = load_state_file(&path).unwrap() else { panic!("expected a pure state") };
    assert_eq!(psi.amplitudes().len(), 64);
    assert!(stabilizer_defect(&Graph::cycle(6).unwrap(), &psi).unwrap() < 1e-12);
}

#[test]
fn analyze_is_deterministic_and_keeps_schema() {
    let args = ["analyze", "w:3", "--seed", "11"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    for key in ["spec", "n", "pe", "pnl", "pnl_star", "strength", "budget", "seed", "elapsed_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["lo", "hi", "sep_subset", "ent_witnesses"] {
        assert!(v["pe"].get(key).is_some(), "missing pe.{key}");
    }
    for key in ["w", "bracket", "k_remove"] {
        assert!(v["strength"].get(key).is_some(), "missing strength.{key}");
    }
    assert!(v["elapsed_ms"].is_null());
    assert_eq!(v["pe"]["lo"], 2);
    assert_eq!(v["pnl"]["lb"], 1);

    let timed = json(&["analyze", "w:3", "--seed", "11", "--timing", "--no-strength", "--no-hidden"]);
    assert!(timed["elapsed_ms"].is_u64());
}

#[test]
fn analyze_ghz4_pe() {
    let v = json(&["analyze", "ghz:4", "--seed", "0", "--no-strength", "--no-hidden"]);
    assert_eq!((v["pe"]["lo"].as_u64(), v["pe"]["hi"].as_u64()), (Some(1), Some(1)));
}

#[test]
fn analyze_ti4_strength() {
    let v = json(&["analyze", "ti:4:2", "--seed", "0", "--k-remove", "1", "--no-hidden", "--no-entanglement"]);
    let w = v["strength"]["w"].as_f64().unwrap();
    assert!((w - 0.707).abs() < 0.02, "w = {w}");
}

#[test]
fn analyze_csv_and_errors() {
    let o = run(&["analyze", "w:3", "--seed", "0", "--format", "csv", "--no-strength"]);
    let text = stdout(&o);
    assert!(text.starts_with("state,n,pe_lo,pe_hi,pnl,pnl_star,w\nw:3,3,2,2,1,"));

    let bad = run(&["analyze", "bogus:3", "--seed", "0"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("position 0"));
    // the seed is mandatory
    assert!(!run(&["analyze", "w:3"]).status.success());
}

#[test]
fn table_empty_range_is_header_only() {
    let o = run(&["table", "--families", "w", "--n", "5..4", "--seed", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "state,n,pe_lo,pe_hi,pnl,w\n");
    let o = run(&["table", "--n", "9..8", "--seed", "0", "--compare"]);
    assert_eq!(
        stdout(&o),
        "state,n,pe_lo,pe_hi,pnl,w,paper_pe,paper_pnl,paper_w,delta_pe_lo,delta_pe_hi,delta_pnl,delta_w\n"
    );
}

#[test]
fn table_w_block_with_compare() {
    let o = run(&["table", "--families", "w", "--n", "3..4", "--seed", "0", "--compare"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "W3");
    assert_eq!(&rows[1][0], "W4");
    for r in &rows {
        let f = |i: usize| r[i].parse::<f64>().unwrap();
        // deltas are recomputed from the printed columns
        assert_eq!(f(9), f(2) - f(6));
        assert_eq!(f(11), f(4) - f(7));
        assert!((f(12) - (f(5) - f(8))).abs() <= 1.5e-3);
        assert!(f(12).abs() < 0.01);
    }
    assert_eq!((&rows[0][2], &rows[0][4]), ("2", "1"));
    assert_eq!((&rows[1][2], &rows[1][4]), ("3", "2"));
}

#[test]
fn table_json_rows() {
    let v = json(&["table", "--families", "ghz", "--n", "3", "--seed", "0", "--format", "json"]);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["state"], "ghz:3");
    assert_eq!(rows[0]["pe_lo"], 1);
}

#[test]
fn headline_passes() {
    let v = json(&["headline", "--seed", "0", "--format", "json"]);
    let items = v["items"].as_array().unwrap();
    assert!(items.len() >= 7);
    for i in items {
        assert_eq!(i["pass"], true, "{}", i["name"]);
    }
    let heralded = &items[0];
    assert!((heralded["computed"].as_f64().unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-4);
}

#[test]
fn asymmetry_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("op.json");
    // ||diag(2, -1)|| = 2, complex entries as pairs
    std::fs::write(&path, "[[2, [0, 0]], [0, [-1, 0]]]").unwrap();
    let p = path.to_str().unwrap();
    let o = run(&["asymmetry", "--s", "3", "--l", "2", "--operator", p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((stdout(&o).trim().parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
    let o = run(&["asymmetry", "--s", "1", "--l", "2", "--operator", p]);
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);

    std::fs::write(&path, "[[0, 1], [0, 0]]").unwrap();
    let o = run(&["asymmetry", "--s", "3", "--l", "2", "--operator", p]);
    assert_eq!(o.status.code(), Some(1));
}
