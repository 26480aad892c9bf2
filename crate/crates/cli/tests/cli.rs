use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use unshuffle::{CumulantMap, Distribution, Rational, Report, Word};

const SEMICIRCLE: &str =
    r#"{"letters":["a"],"max_degree":6,"moments":{"a.a":"1","a.a.a.a":"2","a.a.a.a.a.a":"5"}}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_unshuffle"));
    cmd.env_remove("SHUFFLE_MAX_DEGREE");
    cmd
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], paths: &[&Path]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for p in paths {
        cmd.arg(p);
    }
    cmd.output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn word(s: &str) -> Word {
    Word::parse(s).unwrap()
}

#[test]
fn semicircle_cumulants() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", SEMICIRCLE);
    let free =
        CumulantMap::from_json(&stdout(&run(&["cumulants", "--kind", "free"], &[&d]))).unwrap();
    assert_eq!(free.values().len(), 1);
    assert_eq!(free.value(&word("a.a")), Rational::one());
    let mono =
        CumulantMap::from_json(&stdout(&run(&["cumulants", "--kind", "monotone"], &[&d]))).unwrap();
    assert_eq!(mono.value(&word("a.a.a.a")), Rational::new(1, 2));
}

#[test]
fn point_mass_at_zero() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", r#"{"letters":["a","b"],"max_degree":4}"#);
    let out = stdout(&run(&["cumulants", "--kind", "boolean"], &[&d]));
    assert!(CumulantMap::from_json(&out).unwrap().values().is_empty());
}

#[test]
fn cumulants_and_moments_round_trip() {
    let dir = TempDir::new().unwrap();
    let canonical = Distribution::from_json(SEMICIRCLE).unwrap().to_json();
    let d = write(&dir, "d.json", &canonical);
    let c = dir.path().join("c.json");
    for kind in ["free", "boolean", "monotone"] {
        let out = run(
            &["cumulants", "--kind", kind, "-o", c.to_str().unwrap()],
            &[&d],
        );
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        assert_eq!(stdout(&run(&["moments"], &[&c])), canonical);
    }
}

#[test]
fn convert_matches_direct_cumulants() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", SEMICIRCLE);
    let free = write(
        &dir,
        "free.json",
        &stdout(&run(&["cumulants", "--kind", "free"], &[&d])),
    );
    let direct = stdout(&run(&["cumulants", "--kind", "boolean"], &[&d]));
    assert_eq!(
        stdout(&run(&["convert", "--to", "boolean"], &[&free])),
        direct
    );
}

#[test]
fn convolve_semicircles() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", SEMICIRCLE);
    let out =
        Distribution::from_json(&stdout(&run(&["convolve", "--kind", "free"], &[&d, &d]))).unwrap();
    assert_eq!(out.moment(&word("a.a")), Rational::from_integer(2));
    assert_eq!(out.moment(&word("a.a.a.a")), Rational::from_integer(8));
    for kind in ["boolean", "monotone-left", "monotone-right"] {
        assert!(run(&["convolve", "--kind", kind], &[&d, &d])
            .status
            .success());
    }
    assert_eq!(
        run(&["convolve", "--kind", "tensor"], &[&d, &d])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn subordinate_and_bp() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", SEMICIRCLE);
    for side in ["left", "right"] {
        assert!(run(&["subordinate", "--side", side], &[&d, &d])
            .status
            .success());
    }
    let same = Distribution::from_json(&stdout(&run(&["bp", "--t", "0"], &[&d]))).unwrap();
    assert_eq!(same, Distribution::from_json(SEMICIRCLE).unwrap());
    assert!(run(&["bp", "--t", "1/3"], &[&d]).status.success());
    assert_eq!(run(&["bp", "--t", "-1/2"], &[&d]).status.code(), Some(2));
}

#[test]
fn series_output() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", SEMICIRCLE);
    let r = stdout(&run(&["series", "--which", "R"], &[&d]));
    assert!(r.contains("\"a.a\": \"1\""));
    assert_eq!(r.matches(": \"").count(), 1);
}

#[test]
fn parse_errors_exit_two_with_position() {
    let dir = TempDir::new().unwrap();
    let d = write(
        &dir,
        "d.json",
        "{\n  \"letters\": [\"a\"],\n  \"max_degree\": x\n}",
    );
    let out = run(&["cumulants", "--kind", "free"], &[&d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["moments"], &[&missing]).status.code(), Some(2));
}

#[test]
fn degree_cap_and_override() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", r#"{"letters":["a"],"max_degree":9}"#);
    assert_eq!(
        run(&["cumulants", "--kind", "free"], &[&d]).status.code(),
        Some(2)
    );
    let out = bin()
        .env("SHUFFLE_MAX_DEGREE", "10")
        .args(["cumulants", "--kind", "free"])
        .arg(&d)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin()
        .env("SHUFFLE_MAX_DEGREE", "3")
        .args(["verify", "--suite", "products", "--max-degree", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        run(&["verify", "--max-degree", "0"], &[]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["verify", "--suite", "nope"], &[]).status.code(),
        Some(2)
    );
    let out = run(
        &[
            "verify",
            "--suite",
            "shuffle",
            "--max-degree",
            "3",
            "--mutate",
            "drop-left-singleton",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("witness"));
    let report = Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(!report.passed);
    assert!(report.defects.drop_left_singleton);
}

#[test]
fn verify_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (p1, p2) = (dir.path().join("r1.json"), dir.path().join("r2.json"));
    for p in [&p1, &p2] {
        let out = run(
            &[
                "verify",
                "--suite",
                "cumulants,products",
                "--max-degree",
                "3",
                "--seed",
                "9",
                "-o",
            ],
            &[p],
        );
        assert!(out.status.success());
    }
    let text = fs::read_to_string(&p1).unwrap();
    assert_eq!(text, fs::read_to_string(&p2).unwrap());
    assert_eq!(Report::from_json(&text).unwrap().to_json(), text);
}

#[test]
fn verify_coalgebra() {
    let out = stdout(&run(
        &[
            "verify-coalgebra",
            "--letters",
            "x,y,z",
            "--max-degree",
            "3",
        ],
        &[],
    ));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["status"] == "pass"));
    assert_eq!(
        run(&["verify-coalgebra", "--letters", "a|b"], &[])
            .status
            .code(),
        Some(2)
    );
}
