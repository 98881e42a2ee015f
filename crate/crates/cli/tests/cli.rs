use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wavebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavebench"))
        .args(args)
        .output()
        .expect("spawn wavebench")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV output, metadata and header removed.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_alpha_two_is_smooth() {
    let out = wavebench(&["verify", "--kind", "alpha-half-sine", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], "alpha-half-sine");
    assert_eq!(r[0][2], "true");
    assert_eq!(r[0][6], "Smooth");
}

#[test]
fn verify_half_sine_has_corner() {
    let out = wavebench(&["verify", "--kind", "half-sine"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&stdout(&out));
    assert_eq!(r[0][2], "true");
    assert_eq!(r[0][4], "0");
    assert_eq!(r[0][6], "CornerAtEdge");
}

#[test]
fn verify_custom_third_pi_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let mut table = String::from("t,g\n");
    for i in 0..=400 {
        let t = i as f64 / 400.0;
        table.push_str(&format!("{t},{}\n", std::f64::consts::PI * t / 3.0));
    }
    std::fs::write(&path, table).unwrap();
    let out = wavebench(&["verify", "--custom-g", path_str(&path), "--parity", "odd"]);
    assert_eq!(out.status.code(), Some(1));
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], "custom");
    assert_eq!(r[0][2], "false");
    let dev: f64 = r[0][3].parse().unwrap();
    assert!(dev >= 0.49, "{dev}");
}

#[test]
fn spectrum_rows_and_dc_value() {
    let out = wavebench(&["spectrum", "--kind", "half-sine,sfsk", "--fmax", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 2 * 401);
    assert_eq!(r[0][2], "0.000000");
    let expected = 10.0 * (4.0 / std::f64::consts::PI).powi(2).log10();
    assert_eq!(r[0][3], format!("{expected:.6}"));
    assert_eq!(r[400][2], "2.000000");
    assert_eq!(r[401][0], "sfsk");
}

#[test]
fn spectrum_rejects_coarse_dt() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    let out = wavebench(&["spectrum", "--dt", "0.02", "--out", path_str(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--dt"));
    assert!(!out_path.exists());
}

#[test]
fn leakage_bounds_and_endpoint() {
    let out = wavebench(&["leakage", "--kind", "sfsk", "--wmax", "20", "--wstep", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# w_max=20.000000"));
    assert!(text.contains("# max_snap_distance="));
    let r = rows(&text);
    assert_eq!(r.len(), 201);
    for row in &r {
        let v: f64 = row[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    assert_eq!(r[0][3].parse::<f64>().unwrap(), 1.0);
    assert_eq!(r.last().unwrap()[2], "20.000000");
    assert_eq!(r.last().unwrap()[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn papr_sweep_default_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(wavebench(&["papr-sweep", "--out", path_str(&a)]).status.code(), Some(0));
    assert_eq!(wavebench(&["papr-sweep", "--out", path_str(&b)]).status.code(), Some(0));
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let r = rows(&String::from_utf8(ta).unwrap());
    assert_eq!(r.len(), 28);
    assert!(r.iter().all(|row| row[6] == "42" && row[5] == "8192"));
}

#[test]
fn papr_sweep_rejects_odd_n() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("p.csv");
    let out = wavebench(&["papr-sweep", "--n", "4,7", "--out", path_str(&out_path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N/2"));
    assert!(!out_path.exists());
    assert!(out.stdout.is_empty());
}

#[test]
fn bits_round_trip_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let bits = dir.path().join("bits.txt");
    let first = wavebench(&["papr-sweep", "--n", "8", "--export-bits", path_str(&bits)]);
    assert_eq!(first.status.code(), Some(0));
    let second = wavebench(&["papr-sweep", "--n", "8", "--bits-file", path_str(&bits)]);
    assert_eq!(second.status.code(), Some(0));
    let a = rows(&stdout(&first));
    let b = rows(&stdout(&second));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x[7], y[7]);
        assert_eq!(y[6], "");
    }
}

#[test]
fn json_matches_csv() {
    let args = ["leakage", "--kind", "half-sine", "--wmax", "10", "--wstep", "0.5"];
    let csv = stdout(&wavebench(&args));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let json: Value = serde_json::from_str(&stdout(&wavebench(&json_args))).unwrap();
    let json_rows = json["rows"].as_array().unwrap();
    let csv_rows = rows(&csv);
    assert_eq!(json_rows.len(), csv_rows.len());
    for (j, c) in json_rows.iter().zip(&csv_rows) {
        assert_eq!(j["W_normalized"].as_f64().unwrap(), c[2].parse::<f64>().unwrap());
        assert_eq!(j["R_o"].as_f64().unwrap(), c[3].parse::<f64>().unwrap());
    }
    assert_eq!(json["metadata"]["w_max"], 10.0);

    let csv = stdout(&wavebench(&["papr-sweep", "--n", "8,16"]));
    let json: Value = serde_json::from_str(&stdout(&wavebench(&["papr-sweep", "--n", "8,16", "--format", "json"]))).unwrap();
    for (j, c) in json["rows"].as_array().unwrap().iter().zip(rows(&csv)) {
        assert_eq!(j["papr_db"].as_f64().unwrap(), c[7].parse::<f64>().unwrap());
        assert_eq!(j["N"].as_u64().unwrap(), c[2].parse::<u64>().unwrap());
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "kind = [\"sfsk\"]\nn = [8]\nseed = 7\nbits = 4096\n").unwrap();
    let out = wavebench(&["papr-sweep", "--config", path_str(&cfg), "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], "sfsk");
    assert_eq!(r[0][5], "4096");
    assert_eq!(r[0][6], "11");

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(wavebench(&["papr-sweep", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(wavebench(&["spectrum", "--bogus"]).status.code(), Some(2));
    assert_eq!(wavebench(&["spectrum", "--format", "xml"]).status.code(), Some(2));
}
