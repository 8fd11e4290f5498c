mod common;

use std::path::Path;
use std::process::{Command, Output};

use beamnet::verify::CrossSolution;
use beamnet::verify::ExactSolution;
use beamnet::Vec3;
use common::data_dir;
use serde_json::Value;

fn beamnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamnet")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    data_dir().join(name).display().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn vec3(v: &Value) -> Vec3 {
    Vec3::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap(), v[2].as_f64().unwrap())
}

#[test]
fn validate_reports_cross_summary() {
    let out = beamnet(&["validate", &data("cross.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("5 nodes, 4 edges, connected, 4 Dirichlet"));
    assert!(stdout(&out).contains("lambda_min"));
}

#[test]
fn validate_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = beamnet(&["validate", &data("ladder.json"), "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(&path);
    assert_eq!(report["nodes"], 12);
    assert_eq!(report["edges"], 15);
    assert!(report["lambda_min"].as_f64().unwrap() > 0.0);
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    let out = beamnet(&["validate", &data("invalid_disconnected.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("node 2"), "{}", stderr(&out));

    let out = beamnet(&["validate", &data("invalid_empty.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("parse error"));

    for file in ["invalid_no_dirichlet.json", "invalid_material.json", "does_not_exist.json"] {
        assert_eq!(beamnet(&["validate", &data(file)]).status.code(), Some(2), "{file}");
    }
    assert_eq!(beamnet(&["solve", &data("cross.json"), "--s", "2"]).status.code(), Some(2));
    assert_eq!(beamnet(&["solve", &data("cross.json"), "--grid", "2,2"]).status.code(), Some(2));
    assert_eq!(beamnet(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn zero_data_gives_zero_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamnet(&["solve", &data("cross.json"), "--p", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let nodal = read_json(&dir.path().join("nodal.json"));
    for node in nodal.as_array().unwrap() {
        assert_eq!(vec3(&node["displacement"]), Vec3::zeros());
        assert_eq!(vec3(&node["rotation"]), Vec3::zeros());
    }
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["details"]["iterations"], 0);
    assert_eq!(manifest["command"], "solve");
}

#[test]
fn manufactured_tips_are_exact_and_solvers_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut nodal = Vec::new();
    for precond in ["none", "schwarz"] {
        let out_dir = dir.path().join(precond);
        let out = beamnet(&[
            "solve", &data("cross.json"), "--manufactured", "--refine", "3", "--p", "2",
            "--precond", precond, "--out", out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        nodal.push(read_json(&out_dir.join("nodal.json")));
        let edges = read_json(&out_dir.join("edges.json"));
        assert_eq!(edges.as_array().unwrap().len(), 32);
        assert_eq!(edges[0]["u"][0].as_array().unwrap().len(), 3);
    }
    for node in nodal[0].as_array().unwrap().iter().filter(|n| n["dirichlet"] == true) {
        let x = vec3(&node["position"]);
        assert!((vec3(&node["displacement"]) - CrossSolution.u(&x)).norm() < 1e-14);
        assert!((vec3(&node["rotation"]) - CrossSolution.r(&x)).norm() < 1e-14);
    }
    let (a, b) = (nodal[0].as_array().unwrap(), nodal[1].as_array().unwrap());
    let mut diff: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        for key in ["displacement", "rotation"] {
            diff = diff.max((vec3(&x[key]) - vec3(&y[key])).amax());
            norm = norm.max(vec3(&y[key]).amax());
        }
    }
    assert!(diff <= 1e-8 * norm, "{diff}");
}

#[test]
fn non_convergence_exits_three_and_keeps_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamnet(&[
        "solve", &data("ladder.json"), "--precond", "none", "--maxit", "2", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 4);
    assert!(!dir.path().join("nodal.json").exists());
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["details"]["converged"], false);
}

#[test]
fn inexact_local_solves_run_flexible() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamnet(&[
        "solve", &data("portal_frame.json"), "--p", "3", "--grid", "3,3,2", "--local-solver", "cg:1e-3",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["solver"]["pcg"]["flexible"], true);
    assert_eq!(manifest["solver"]["local_solver"], "cg:0.001");
}

#[test]
fn convergence_command_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamnet(&[
        "convergence", "--p", "1,2", "--s", "0", "--levels", "4", "--p-sweep", "1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("convergence_p1_s0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "level,h_max,err_primal,err_dual,eoc_primal,eoc_dual");
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    let eoc: f64 = last[4].parse().unwrap();
    assert!((eoc - 2.0).abs() < 0.2, "{eoc}");
    // full double precision
    assert!(last[2].split('e').next().unwrap().len() >= 18);

    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(dir.path().join("p_sweep_level1.csv").exists());
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["degrees"], serde_json::json!([1, 2]));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn precond_command_compares_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamnet(&[
        "precond", &data("cross.json"), "--manufactured", "--refine", "4", "--p", "3", "--grid", "4,4,1",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest = read_json(&dir.path().join("manifest.json"));
    let modes = manifest["details"]["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 4);
    let iterations = |name: &str| {
        modes.iter().find(|m| m["mode"] == name).unwrap()["iterations"].as_u64().unwrap()
    };
    assert!(iterations("two-level") <= iterations("none"));
    // the coarse term alone is singular and must not claim convergence
    let coarse = modes.iter().find(|m| m["mode"] == "coarse").unwrap();
    assert_eq!(coarse["converged"], false);
    let history = std::fs::read_to_string(dir.path().join("precond_two-level.csv")).unwrap();
    let values: Vec<f64> = history.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values[0], 1.0);
    assert!(*values.last().unwrap() <= 1e-10);
}

#[test]
fn output_is_deterministic_for_fixed_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = beamnet(&[
            "solve", &data("portal_frame.json"), "--p", "4", "--refine", "2", "--threads", "3", "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read(out_dir.join("edges.json")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}
