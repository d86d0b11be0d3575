use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use vga_core::dataset::{example_dataset, write_csv};

fn vga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vga")).args(args).output().expect("run vga")
}

fn example_csv(dir: &tempfile::TempDir) -> PathBuf {
    let path = dir.path().join("example.csv");
    write_csv(&example_dataset(), &path).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn assess_pte_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = example_csv(&dir);
    let out = vga(&["assess", "--data", data.to_str().unwrap(), "--dmu", "K", "--program", "pte"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["efficiency"].as_f64().unwrap() - 0.589).abs() < 2e-3);
    assert_eq!(v["schema_version"], "1.0");
    assert_eq!(v["program"], "pte");
}

#[test]
fn assess_ste_to_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = example_csv(&dir);
    let out_path = dir.path().join("r.json");
    let out = vga(&[
        "assess", "--data", data.to_str().unwrap(), "--dmu", "K", "--program", "ste", "--kappa", "1",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!((v["efficiency"].as_f64().unwrap() - 0.508).abs() < 2e-3);

    let out = vga(&[
        "assess", "--data", data.to_str().unwrap(), "--dmu", "K", "--program", "ste", "--kappa", "1", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("program,kappa,1.0000\n"));
    assert!(text.contains("score,E,0.5078\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = example_csv(&dir);
    let d = data.to_str().unwrap();
    assert_eq!(vga(&["assess", "--data", d, "--dmu", "K", "--program", "ste"]).status.code(), Some(2));
    assert_eq!(vga(&["assess", "--data", d, "--dmu", "Z", "--program", "pte"]).status.code(), Some(2));
    assert_eq!(vga(&["assess", "--data", d, "--dmu", "K", "--program", "ste", "--kappa", "-1"]).status.code(), Some(2));
    let missing = dir.path().join("missing.csv");
    assert_eq!(vga(&["assess", "--data", missing.to_str().unwrap(), "--dmu", "K", "--program", "pte"]).status.code(), Some(2));

    let small = dir.path().join("small.csv");
    std::fs::write(&small, "id,x:a,y:b\nP,1,1\nR,2,1\n").unwrap();
    let out = vga(&["assess", "--data", small.to_str().unwrap(), "--dmu", "P", "--program", "pte"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must exceed m+s"));

    // κ far beyond what B and D can supply makes the STE program infeasible.
    assert_eq!(vga(&["assess", "--data", d, "--dmu", "K", "--program", "ste", "--kappa", "50"]).status.code(), Some(3));
}

#[test]
fn phases_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let data = example_csv(&dir);
    let d = data.to_str().unwrap();
    let out = vga(&["phases", "--data", d, "--dmu", "K"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["kappa1"].as_f64().unwrap() - 1.5153).abs() < 2e-3);
    assert!((v["kappa2"].as_f64().unwrap() - 0.5150).abs() < 2e-3);
    assert!(v["final"].is_null());

    let out = vga(&["phases", "--data", d, "--dmu", "K", "--kappa-target", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let report = &v["final"]["report"];
    assert!((report["efficiency"].as_f64().unwrap() - 0.508).abs() < 2e-3);
    assert!((report["decomposition"]["scale"].as_f64().unwrap() - 0.552).abs() < 2e-3);

    let out = vga(&["phases", "--data", d, "--dmu", "K", "--kappa-target", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside feasible interval"));

    let out = vga(&["phases", "--data", d, "--dmu", "K", "--exclude", "D"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["excluded"], serde_json::json!(["D"]));
    assert_eq!(vga(&["phases", "--data", d, "--dmu", "K", "--exclude", "A"]).status.code(), Some(2));
}

#[test]
fn sbm_and_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let data = example_csv(&dir);
    let d = data.to_str().unwrap();
    let v = json(&vga(&["sbm", "--data", d, "--dmu", "K"]));
    assert_eq!(v["flagged"], true);
    assert!((v["rho"].as_f64().unwrap() - 0.3893).abs() < 2e-3);
    let g = json(&vga(&["geometry", "--data", d, "--dmu", "K", "--program", "ste", "--kappa", "1.5153064952144368"]));
    assert_eq!(g["frame"], "ste");
    assert_eq!(g["boundary"], "diagonal");
}
