use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nilzeta-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn nilzeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilzeta")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = nilzeta(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    // Quoted fields come first in these tables, so count columns from the end.
    let from_end = header.len() - i;
    lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            cells[cells.len() - from_end].to_string()
        })
        .collect()
}

#[test]
fn points_of_y2_x3_minus_x() {
    let dir = scratch("points");
    let out = dir.to_str().unwrap();
    ok(&["points", "--curve", "elliptic:0,-1,0", "--primes", "2..13", "--out", out]);
    let csv = fs::read_to_string(dir.join("points.csv")).unwrap();
    assert_eq!(column(&csv, "p"), ["2", "3", "5", "7", "11", "13"]);
    assert_eq!(&column(&csv, "projective")[1..5], ["4", "8", "8", "12"]);
    assert_eq!(column(&csv, "bad")[0], "true");
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("bad_primes = 2\n"), "{manifest}");
}

#[test]
fn genus2_points() {
    let dir = scratch("g2points");
    ok(&["points", "--curve", "genus2:1,0,0,0,0,1;1", "--primes", "3..7", "--out", dir.to_str().unwrap()]);
    let csv = fs::read_to_string(dir.join("points.csv")).unwrap();
    // Affine points of y^2 + y = x^6 + x by exhaustion.
    let expect: Vec<String> = [3i64, 5, 7]
        .iter()
        .map(|&p| {
            (0..p)
                .flat_map(|x| (0..p).map(move |y| (x, y)))
                .filter(|&(x, y)| (y * y + y - x.pow(6) - x).rem_euclid(p) == 0)
                .count()
                .to_string()
        })
        .collect();
    assert_eq!(column(&csv, "affine"), expect);
}

#[test]
fn zeta_output_ignores_worker_count() {
    let one = scratch("w1");
    let many = scratch("w4");
    for (dir, w) in [(&one, "1"), (&many, "4")] {
        ok(&["zeta", "--primes", "3,5", "--nmax", "3", "--workers", w, "--out", dir.to_str().unwrap()]);
    }
    for f in ["zeta_p3.csv", "zeta_p5.csv", "diagonals_p3.csv", "diagonals_p5.csv"] {
        assert_eq!(fs::read(one.join(f)).unwrap(), fs::read(many.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(one.join("zeta_p3.csv")).unwrap();
    assert_eq!(column(&csv, "a_n")[0], "1");
    assert!(column(&csv, "seed").iter().all(|s| s == "2024"));
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "curve = elliptic:0,-1,0\nprimes = 3..7\n").unwrap();
    ok(&["points", "--config", cfg.to_str().unwrap(), "--primes", "11", "--out", dir.to_str().unwrap()]);
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("curve = elliptic:0,-1,0\n"));
    assert!(manifest.contains("primes = 11\n"));
}

#[test]
fn budget_overrun_is_marked() {
    let dir = scratch("budget");
    ok(&["zeta", "--primes", "3", "--nmax", "2", "--mode", "subalgebras", "--budget", "10", "--out", dir.to_str().unwrap()]);
    let csv = fs::read_to_string(dir.join("zeta_p3.csv")).unwrap();
    assert!(csv.contains("incomplete"), "{csv}");
}

#[test]
fn verify_writes_a_ledger() {
    let dir = scratch("verify");
    ok(&["verify", "--primes", "5", "--out", dir.to_str().unwrap()]);
    let ledger = fs::read_to_string(dir.join("ledger.jsonl")).unwrap();
    assert!(ledger.lines().all(|l| l.contains("\"schema\":\"nilzeta.discrepancy/1\"")));
    let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"closed_form_mismatches\": 0"));
}

#[test]
fn measure_and_fit_run() {
    let dir = scratch("measure");
    let out = ok(&["measure", "--primes", "5,7", "--profile", "0,0,1,0,0", "--out", dir.to_str().unwrap()]);
    assert!(out.contains("p=5 oracle="));
    let out = ok(&["fit", "--curve", "genus2:1,0,0,0,0,1;1", "--primes", "3..7", "--out", dir.to_str().unwrap()]);
    assert!(out.contains("nonzero part = -1 + (1) * chart"), "{out}");
}

#[test]
fn malformed_input_fails() {
    assert!(!nilzeta(&["points", "--curve", "elliptic:1,2"]).status.success());
    assert!(!nilzeta(&["points", "--primes", "4,5"]).status.success());
    assert!(!nilzeta(&["measure", "--regime", "4"]).status.success());
}
