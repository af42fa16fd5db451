use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shyp-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &PathBuf, command: &str, config: Option<&str>, extra: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shyp"));
    cmd.arg(command).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.args(extra).output().unwrap()
}

fn report(dir: &PathBuf, stem: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(format!("{stem}.json"))).unwrap()).unwrap()
}

#[test]
fn zoo_list_names_every_kind() {
    let dir = scratch("zoo");
    let out = run(&dir, "zoo-list", None, &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for kind in ["schottky", "cyclic", "covered", "free_boundary", "zn", "product"] {
        assert!(text.contains(kind), "{kind}");
    }
}

#[test]
fn free_boundary_certificate() {
    let dir = scratch("free");
    let out = run(&dir, "certify-shyp", Some(r#"{"system": {"kind": "free_boundary"}}"#), &[]);
    assert!(out.status.success());
    let r = report(&dir, "certify_shyp");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["passed"], true);
    assert_eq!(r["results"]["N"], 2);
    assert_eq!(r["results"]["fellow_ok"], true);
    // defaults are materialized
    assert_eq!(r["config"]["lambda"], 2.0);
    assert_eq!(r["config"]["codes"]["cap"], 200);
    assert!(dir.join("out/certify_shyp_certificate.csv").exists());
}

#[test]
fn identity_stability() {
    let dir = scratch("identity");
    let out = run(&dir, "stability", Some(r#"{"perturbation": {"family": "jitter", "magnitude": 0}}"#), &[]);
    assert!(out.status.success());
    let r = report(&dir, "stability");
    assert!(r["results"]["displacement"].as_f64().unwrap() < 1e-12);
    for c in r["checks"].as_array().unwrap() {
        assert!(c.get("slack").is_some() && c.get("samples").is_some());
    }
    let table = fs::read_to_string(dir.join("out/stability_conjugacy.csv")).unwrap();
    assert_eq!(table.lines().count(), 201);
    assert!(fs::read_to_string(dir.join("out/stability.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn inadmissible_perturbation_exits_nonzero_with_witness() {
    let dir = scratch("inadmissible");
    let out = run(&dir, "stability", Some(r#"{"perturbation": {"family": "jitter", "magnitude": 1e-4}}"#), &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&dir, "stability");
    assert_eq!(r["passed"], false);
    assert!(r["checks"][0]["witness"].as_str().unwrap().contains("not admissible"));
}

#[test]
fn malformed_configs() {
    let dir = scratch("malformed");
    let out = run(&dir, "verify-expansion", Some(r#"{"lambda": 1.0}"#), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("lambda"));
    let out = run(&dir, "verify-expansion", Some("{\n  \"net\": {\"points\": }\n}"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
    let out = run(&dir, "verify-expansion", Some(r#"{"nett": {}}"#), &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&dir, "verify-expansion", Some(r#"{"system": {"kind": "free_boundary", "a": 3.0}}"#), &[]);
    assert!(String::from_utf8(out.stderr).unwrap().contains("system.a"));
}

#[test]
fn reports_are_deterministic() {
    let dir = scratch("determinism");
    let mut texts = Vec::new();
    for _ in 0..2 {
        assert!(run(&dir, "codes", None, &["--seed", "3", "--depth", "12"]).status.success());
        texts.push(fs::read(dir.join("out/codes.json")).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let r = report(&dir, "codes");
    assert_eq!(r["config"]["net"]["seed"], 3);
    assert_eq!(r["results"]["depth"], 12);
}

#[test]
fn coding_map_rejects_non_hyperbolic_and_counts_fibres() {
    let dir = scratch("coding");
    let out = run(&dir, "coding-map", Some(r#"{"system": {"kind": "zn"}}"#), &[]);
    assert_eq!(out.status.code(), Some(1));
    let dir = scratch("covered");
    let out = run(&dir, "coding-map", Some(r#"{"system": {"kind": "covered", "degree": 3}}"#), &[]);
    assert!(out.status.success());
    let r = report(&dir, "coding_map");
    assert_eq!(r["results"]["distinct_images"], 2);
    assert_eq!(r["results"]["fibre_sizes"]["3"], 2);
}

#[test]
fn verify_expansion_plots_only_circles() {
    let dir = scratch("plots");
    assert!(run(&dir, "verify-expansion", None, &[]).status.success());
    assert!(dir.join("out/verify_expansion.svg").exists());
    assert!(dir.join("out/verify_expansion_regions.csv").exists());
    let dir = scratch("plots-free");
    assert!(run(&dir, "verify-expansion", Some(r#"{"system": {"kind": "free_boundary"}}"#), &[]).status.success());
    assert!(!dir.join("out/verify_expansion.svg").exists());
}
