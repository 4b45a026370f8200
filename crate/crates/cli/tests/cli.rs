use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn agp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agp")).args(args).current_dir(dir).output().expect("spawn agp")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = agp(args, dir);
    assert!(
        out.status.success(),
        "agp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Two triangles joined by an edge, with sparse original ids.
fn fixture() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "# comment\n0 1\n1 2\n2 0\n2 30\n30 40\n40 50\n50 30\n").unwrap();
    (dir, g)
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn header(text: &str, key: &str) -> Option<String> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(&format!("{key}: ")[..]).map(str::to_string))
}

#[test]
fn propagate_writes_vector_and_provenance() {
    let (dir, _) = fixture();
    let out = ok(
        &["propagate", "--graph", "g.txt", "--measure", "hkpr", "--t", "5", "--source", "0", "--delta", "1e-4", "--seed", "7"],
        dir.path(),
    );
    for key in ["command", "graph_hash", "measure", "a", "b", "delta", "epsilon", "levels", "seed", "push_count", "wall_time"] {
        assert!(header(&out, key).is_some(), "missing {key} in\n{out}");
    }
    assert_eq!(header(&out, "engine").as_deref(), Some("randomized"));
    let ids: Vec<&str> = body(&out).iter().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(ids, ["0", "1", "2", "30", "40", "50"]);
    let total: f64 = body(&out).iter().map(|l| l.split(' ').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-3, "total {total}");
}

#[test]
fn same_seed_gives_identical_numbers() {
    let (dir, _) = fixture();
    let args = ["propagate", "--graph", "g.txt", "--measure", "ppr", "--source", "1", "--delta", "0.1", "--seed", "3"];
    let a = ok(&args, dir.path());
    let b = ok(&args, dir.path());
    assert_eq!(body(&a), body(&b));
}

#[test]
fn csr_round_trip_matches_text_path() {
    let (dir, _) = fixture();
    ok(&["convert", "--in", "g.txt", "--out", "g.csr"], dir.path());
    assert!(dir.path().join("g.map").exists());
    let run = |graph: &str| {
        ok(&["propagate", "--graph", graph, "--measure", "hkpr", "--source", "30", "--seed", "7"], dir.path())
    };
    let (text, csr) = (run("g.txt"), run("g.csr"));
    assert_eq!(body(&text), body(&csr));
    assert_eq!(header(&text, "graph_hash"), header(&csr, "graph_hash"));

    // Back to text: same edges, though equal-degree neighbours may be listed
    // in another order, so compare exact results numerically.
    ok(&["convert", "--in", "g.csr", "--out", "back.txt"], dir.path());
    let exact = |graph: &str| {
        let out = ok(&["groundtruth", "--graph", graph, "--measure", "hkpr", "--source", "30"], dir.path());
        body(&out).iter().map(|l| l.to_string()).collect::<Vec<_>>()
    };
    let (a, b) = (exact("g.txt"), exact("back.txt"));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        let (ix, vx) = x.split_once(' ').unwrap();
        let (iy, vy) = y.split_once(' ').unwrap();
        assert_eq!(ix, iy);
        let (vx, vy): (f64, f64) = (vx.parse().unwrap(), vy.parse().unwrap());
        assert!((vx - vy).abs() <= 1e-14 * vx.abs(), "{x} vs {y}");
    }
}

#[test]
fn directed_csr_keeps_its_layout() {
    let (dir, _) = fixture();
    ok(&["convert", "--in", "g.txt", "--out", "r.csr", "--directed", "--reverse"], dir.path());
    let st = ["propagate", "--graph", "r.csr", "--directed", "--measure", "single-target-ppr", "--source", "0", "--epsilon", "0"];
    let from_csr = ok(&st, dir.path());
    let mut text = st;
    text[2] = "g.txt";
    assert_eq!(body(&from_csr), body(&ok(&text, dir.path())));
    // A reverse-layout file cannot serve a source-style measure.
    let out = agp(&["propagate", "--graph", "r.csr", "--directed", "--measure", "ppr", "--source", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_reports_json() {
    let (dir, _) = fixture();
    fs::write(dir.path().join("gt.txt"), ok(&["groundtruth", "--graph", "g.txt", "--measure", "ppr", "--source", "0"], dir.path()))
        .unwrap();
    ok(&["propagate", "--graph", "g.txt", "--measure", "ppr", "--source", "0", "--seed", "1", "--out", "est.txt"], dir.path());
    let out = ok(
        &["eval", "--truth", "gt.txt", "--est", "est.txt", "--k", "3", "--normalized", "--graph", "g.txt"],
        dir.path(),
    );
    let report: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(report["max_error"].as_f64().unwrap() < 1e-4);
    assert_eq!(report["precision_at_k"].as_f64(), Some(1.0));
    assert_eq!(report["k"].as_u64(), Some(3));
    assert!(report["push_count"].as_u64().unwrap() > 0);

    // Without a graph, ids index the vectors directly.
    let out = ok(&["eval", "--truth", "gt.txt", "--est", "gt.txt", "--k", "2"], dir.path());
    let report: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(report["max_error"].as_f64(), Some(0.0));
}

#[test]
fn exact_engine_when_epsilon_is_zero() {
    let (dir, _) = fixture();
    let base = ["--graph", "g.txt", "--measure", "ppr", "--source", "0", "--levels", "30"];
    let prop = ok(&[&["propagate"][..], &base, &["--epsilon", "0"]].concat(), dir.path());
    let gt = ok(&[&["groundtruth"][..], &base].concat(), dir.path());
    assert_eq!(header(&prop, "engine").as_deref(), Some("basic"));
    assert_eq!(body(&prop), body(&gt));
}

#[test]
fn signal_file_is_rescaled() {
    let (dir, _) = fixture();
    fs::write(dir.path().join("x.txt"), "0 2\n40 2\n").unwrap();
    fs::write(dir.path().join("x1.txt"), "0 0.5\n40 0.5\n").unwrap();
    let run = |sig: &str| {
        ok(&["propagate", "--graph", "g.txt", "--measure", "ppr", "--signal", sig, "--epsilon", "0"], dir.path())
    };
    let values = |text: &str| -> Vec<f64> {
        body(text).iter().map(|l| l.split(' ').nth(1).unwrap().parse().unwrap()).collect()
    };
    let (big, unit) = (values(&run("x.txt")), values(&run("x1.txt")));
    for (b, u) in big.iter().zip(&unit) {
        assert!((b - 4.0 * u).abs() <= 1e-15 * b.abs());
    }
    fs::write(dir.path().join("neg.txt"), "0 -1\n").unwrap();
    assert_eq!(agp(&["propagate", "--graph", "g.txt", "--measure", "ppr", "--signal", "neg.txt"], dir.path()).status.code(), Some(2));
}

#[test]
fn cluster_finds_a_triangle() {
    let (dir, _) = fixture();
    let out = ok(
        &["cluster", "--graph", "g.txt", "--measure", "hkpr", "--t", "3", "--source", "0", "--curve", "c.csv", "--epsilon", "0"],
        dir.path(),
    );
    let mut set = body(&out);
    set.sort();
    assert_eq!(set, ["0", "1", "2"]);
    let phi: f64 = header(&out, "conductance").unwrap().parse().unwrap();
    assert!((phi - 1.0 / 7.0).abs() < 1e-12);
    let curve = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert_eq!(curve.lines().next(), Some("prefix_len,node,conductance"));
    assert_eq!(curve.lines().count(), 6);
}

#[test]
fn features_round_trip_csv() {
    let (dir, _) = fixture();
    fs::write(dir.path().join("x.csv"), "1,0\n0,0\n0,0\n0,1\n0,0\n0,0\n").unwrap();
    for workers in ["1", "2"] {
        let out = format!("z{workers}.csv");
        ok(
            &["features", "--graph", "g.txt", "--measure", "ppr", "--levels", "10", "--seed", "5", "--workers", workers, "--in", "x.csv", "--out", &out],
            dir.path(),
        );
        assert!(dir.path().join(format!("{out}.prov")).exists());
    }
    let z1 = fs::read_to_string(dir.path().join("z1.csv")).unwrap();
    assert_eq!(z1, fs::read_to_string(dir.path().join("z2.csv")).unwrap());
    assert_eq!(z1.lines().count(), 6);
}

#[test]
fn mc_and_tradeoff_run() {
    let (dir, _) = fixture();
    let out = ok(&["mc", "--graph", "g.txt", "--source", "0", "--walks", "2000", "--seed", "4"], dir.path());
    let total: f64 = body(&out).iter().map(|l| l.split(' ').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);

    let csv = ok(&["tradeoff", "--graph", "g.txt", "--measure", "ppr", "--source", "0", "--deltas", "0.1,0.001", "--runs", "1"], dir.path());
    let rows = body(&csv);
    assert_eq!(rows[0], "delta,levels,epsilon,max_error,push_count");
    assert_eq!(rows.len(), 3);
}

#[test]
fn usage_errors_exit_one() {
    let (dir, _) = fixture();
    for args in [
        &["propagate", "--graph", "g.txt", "--measure", "ppr", "--bogus"][..],
        &["propagate", "--graph", "g.txt", "--measure", "ppr"],
        &["propagate", "--graph", "g.txt", "--measure", "ppr", "--source", "0", "--uniform"],
        &["propagate", "--graph", "g.txt", "--measure", "katz", "--source", "0"],
        &["frobnicate"],
    ] {
        let out = agp(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(agp(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let (dir, _) = fixture();
    fs::write(dir.path().join("bad.txt"), "0 1\n1 x\n").unwrap();
    for args in [
        &["propagate", "--graph", "bad.txt", "--measure", "ppr", "--source", "0"][..],
        &["propagate", "--graph", "missing.txt", "--measure", "ppr", "--source", "0"],
        &["propagate", "--graph", "g.txt", "--measure", "ppr", "--source", "7"],
        &["propagate", "--graph", "g.txt", "--measure", "ppr", "--alpha", "1.5", "--source", "0"],
        &["propagate", "--graph", "g.txt", "--measure", "ppr", "--source", "0", "--delta", "2"],
    ] {
        let out = agp(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
