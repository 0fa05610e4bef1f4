use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exterior_foliation::radial::{radial_tk, radial_value};

const BALL: &str = r#"
threads = 2

[domain]
kind = "ball"
n = 3
params = [1.0]

[slopes]
gamma = [10.0, 45.0, 80.0]

[continuation]
radii = [4.0, 8.0, 16.0]

[continuation.grid]
mode = "radial1d"
h = 0.001
growth = 1.05
h_max = 0.05

[solve]
s = 1.0
r_out = 8.0
"#;

fn foliate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foliate")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn listing(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Ok(rd) = fs::read_dir(dir) {
        for e in rd {
            let p = e.unwrap().path();
            if p.is_dir() {
                out.extend(listing(&p));
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn sigma_prints_both_methods() {
    let out = foliate(&["sigma", "--n", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("quadrature  = 1.31102877714"), "{text}");
    assert!(text.contains("closed form = 1.31102877714"), "{text}");

    let out = foliate(&["sigma", "--n", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let diff: f64 = text.lines().find(|l| l.starts_with("difference")).unwrap().split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!(diff < 1e-10);
}

#[test]
fn sigma_rejects_n2() {
    let out = foliate(&["sigma", "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("diverges for n = 2"));
}

#[test]
fn solve_zero_slope_writes_zero_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.toml", &BALL.replace("s = 1.0", "s = 0.0"));
    let out_dir = tmp.path().join("out");
    let out = foliate(&["solve", s(&cfg), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("leaf.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u,grad"));
    for l in lines {
        let cols: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!((cols[1], cols[2]), (0.0, 0.0));
    }
    assert!(out_dir.join("solve.json").exists() && out_dir.join("config.toml").exists());
}

#[test]
fn solve_ball_matches_exact_leaf() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ball.toml", BALL);
    let out_dir = tmp.path().join("out");
    assert!(foliate(&["solve", s(&cfg), "--out", s(&out_dir)]).status.success());
    let csv = fs::read_to_string(out_dir.join("leaf.csv")).unwrap();
    let mut worst: f64 = 0.0;
    for l in csv.lines().skip(1) {
        let cols: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
        worst = worst.max((cols[1] - radial_value(1.0, 1.0, 3, cols[0]).unwrap()).abs());
    }
    assert!(worst < 1e-4, "{worst}");
    let record: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("solve.json")).unwrap()).unwrap();
    assert_eq!(record["schema_version"], 1);
    let t = record["t"].as_f64().unwrap();
    assert!((t - radial_tk(1.0, 8.0, 1.0, 3).unwrap()).abs() < 1e-4);
}

#[test]
fn invalid_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    for (name, text) in [
        ("n2.toml", BALL.replace("n = 3", "n = 2")),
        ("rout.toml", BALL.replace("r_out = 8.0", "r_out = 0.5")),
        ("grid.toml", BALL.replace("[10.0, 45.0, 80.0]", "[45.0, 10.0]")),
        ("syntax.toml", BALL.replace("[domain]", "[domain")),
    ] {
        let cfg = write_config(tmp.path(), name, &text);
        for cmd in ["solve", "family", "verify"] {
            let out = foliate(&[cmd, s(&cfg), "--out", s(&out_dir)]);
            assert_eq!(out.status.code(), Some(1), "{cmd} {name}");
            assert!(listing(&out_dir).is_empty(), "{cmd} {name} left {:?}", listing(&out_dir));
        }
    }
}

#[test]
fn family_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ball.toml", BALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(foliate(&["family", s(&cfg), "--out", s(&a)]).status.success());
    let one_thread = BALL.replace("threads = 2", "threads = 1");
    let cfg1 = write_config(tmp.path(), "ball1.toml", &one_thread);
    assert!(foliate(&["family", s(&cfg1), "--out", s(&b)]).status.success());
    let (la, lb) = (listing(&a), listing(&b));
    assert_eq!(la.len(), lb.len());
    assert!(la.iter().any(|p| p.ends_with("leaves/leaf_002.csv")));
    for (pa, pb) in la.iter().zip(&lb) {
        if pa.ends_with("config.toml") {
            continue;
        }
        assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap(), "{pa:?}");
    }
    let report = foliate(&["report", s(&a.join("family.json"))]);
    assert!(report.status.success());
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ball.toml", BALL);
    let out_dir = tmp.path().join("run");
    let out = foliate(&["verify", s(&cfg), "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert!(out_dir.join("family.json").exists());

    // re-verify the written family
    let family = out_dir.join("family.json");
    let out = foliate(&["verify", "--family", s(&family), "--out", s(&tmp.path().join("again"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    // a family whose limits are out of order fails the checks
    let mut summary: serde_json::Value = serde_json::from_slice(&fs::read(&family).unwrap()).unwrap();
    let c0 = summary["leaves"][0]["c"].clone();
    summary["leaves"][2]["c"] = c0;
    let broken = tmp.path().join("broken.json");
    fs::write(&broken, serde_json::to_vec(&summary).unwrap()).unwrap();
    let out = foliate(&["verify", "--family", s(&broken), "--out", s(&tmp.path().join("broken"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(tmp.path().join("broken/report.json").exists());

    // unreadable or missing inputs are errors
    let garbage = write_config(tmp.path(), "garbage.json", "{ not json");
    assert_eq!(foliate(&["verify", "--family", s(&garbage)]).status.code(), Some(1));
    let missing = tmp.path().join("missing.json");
    assert_eq!(foliate(&["verify", "--family", s(&missing)]).status.code(), Some(1));
    assert_eq!(foliate(&["report", s(&missing)]).status.code(), Some(1));
}

#[test]
fn help_documents_csv_columns() {
    let out = foliate(&["solve", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("r,u,grad") && text.contains("rho,z,u,grad"));
}
