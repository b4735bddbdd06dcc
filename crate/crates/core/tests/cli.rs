use std::path::Path;
use std::process::{Command, Output};

use gaugewave::snapshot::write_fields;
use gaugewave::{Grid, Reality, SpectralField};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaugewave"))
        .args(args)
        .env("GAUGEWAVE_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn mcsh_config(out: &Path, t_final: f64, snapshots: &str) -> String {
    format!(
        "# small MCSH run
[system]
name = mcsh
e = 1.0
kappa = 1.0
v = 1.0

[grid]
n = 16
box_length = 20.0

[integrator]
scheme = leapfrog
dt = 0.01
t_final = {t_final}
snapshot_every = 1
formulation = raw
regauge_every = none
support_diameter = none

[data]
kind = random
seed = 7
xi0 = 0.3
amplitude = 0.1

[output]
directory = {}
formats = csv,json
snapshots = {snapshots}
",
        out.display()
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn evolve_zero_final_time_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(dir.path(), "run.cfg", &mcsh_config(&out, 0.0, "final"));
    let o = bin(&["evolve", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("run.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# schema=1");
    assert!(lines[1].starts_with("t,E,gauss_l2"));
    assert_eq!(lines.len(), 3);
    assert!(out.join("run.json").exists());
    assert!(out.join("final.gw").exists());
}

#[test]
fn evolve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let cfg = write(dir.path(), &format!("run{k}.cfg"), &mcsh_config(&out, 0.05, "rows"));
        let o = bin(&["evolve", &cfg]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(std::fs::read(out.join("run.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 2 + 6);
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = mcsh_config(&dir.path().join("out"), 0.0, "none").replace("n = 16", "n = sixteen");
    let cfg = write(dir.path(), "bad.cfg", &text);
    let o = bin(&["evolve", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 9"), "{err}");
}

#[test]
fn missing_config_is_a_config_error() {
    let o = bin(&["evolve", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn weights_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(dir.path(), "run.cfg", &mcsh_config(&out, 0.0, "none"));
    let o = bin(&["check", "weights", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "weights");
    assert_eq!(v["passed"], true);
    assert!(out.join("check_weights.json").exists());
}

#[test]
fn identities_suite_reports_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(dir.path(), "run.cfg", &mcsh_config(&out, 0.0, "none"));
    let o = bin(&["check", "identities", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["details"]["alpha18"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn unknown_suite_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", &mcsh_config(&dir.path().join("out"), 0.0, "none"));
    let o = bin(&["check", "nonsense", &cfg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn norms_of_zero_snapshot_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(2, 8, 6.0).unwrap();
    let z = SpectralField::zeros(g, Reality::Complex);
    let path = dir.path().join("zero.gw");
    write_fields(&path, &[("phi", &z), ("dphi", &z)]).unwrap();
    let o = bin(&["norms", path.to_str().unwrap(), "--s", "0,1,-0.5", "--b", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let fields = v["fields"].as_array().unwrap();
    assert_eq!(fields.len(), 2);
    for f in fields {
        assert_eq!(f["l2"], 0.0);
        assert_eq!(f["h1dot"], 0.0);
        for e in f["hs"].as_array().unwrap() {
            assert_eq!(e["value"], 0.0);
        }
    }
    assert!(v["xsb"].as_array().unwrap().is_empty());
}

#[test]
fn norms_rejects_unreadable_file() {
    let o = bin(&["norms", "/nonexistent/snap.gw", "--s", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn norms_at_s_zero_match_csv_l2_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(dir.path(), "run.cfg", &mcsh_config(&out, 0.07, "rows"));
    assert_eq!(bin(&["evolve", &cfg]).status.code(), Some(0));
    let snap = out.join("snapshots.gw");
    let o = bin(&["norms", snap.to_str().unwrap(), "--s", "0", "--b", "0.5,-0.5", "--dt", "0.01"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let phis: Vec<f64> = v["fields"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["name"] == "phi")
        .map(|f| f["hs"][0]["value"].as_f64().unwrap())
        .collect();
    let csv = std::fs::read_to_string(out.join("run.csv")).unwrap();
    let header: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "l2_phi").unwrap();
    let l2: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    assert_eq!(phis.len(), l2.len());
    for (a, b) in phis.iter().zip(&l2) {
        assert!((a - b).abs() <= 1e-14 * b.max(1.0), "{a} vs {b}");
    }
    // Eight records per field give a space-time block.
    let xsb = v["xsb"].as_array().unwrap();
    assert_eq!(xsb.len(), 8 * 2);
    assert!(xsb.iter().all(|e| e["value"].as_f64().unwrap() > 0.0));
}
