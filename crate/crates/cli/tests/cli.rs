use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn flrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flrank")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = flrank(args);
    assert!(out.status.success(), "flrank {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn repo_data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn write_truth(dir: &Path, n: usize) -> PathBuf {
    let path = dir.join("truth.csv");
    let rows: Vec<String> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Less => "0.9",
                    std::cmp::Ordering::Equal => "0.5",
                    std::cmp::Ordering::Greater => "0.1",
                })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    std::fs::write(&path, rows.join("\n") + "\n").unwrap();
    path
}

fn write_order(dir: &Path, name: &str, order: &[usize]) -> PathBuf {
    let path = dir.join(name);
    let lines: Vec<String> = order.iter().map(usize::to_string).collect();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

#[test]
fn eval_prints_disagreement() {
    let tmp = TempDir::new().unwrap();
    let truth = write_truth(tmp.path(), 10);
    let best: Vec<usize> = (0..10).collect();
    let worst: Vec<usize> = (0..10).rev().collect();
    let mut swapped = best.clone();
    swapped.swap(4, 5);
    for (order, expected) in [(best, "0.000000"), (worst, "1.000000"), (swapped, "0.022222")] {
        let ranking = write_order(tmp.path(), "r.txt", &order);
        assert_eq!(ok(&["eval", "--ranking", s(&ranking), "--truth", s(&truth)]).trim(), expected);
    }
}

#[test]
fn generate_uses_automatic_sizes() {
    let tmp = TempDir::new().unwrap();
    let out = ok(&["generate", "--n", "500", "--d", "20", "--out", s(tmp.path())]);
    assert!(out.lines().any(|l| l == "m=2486 K=50"), "{out}");
    let comparisons = std::fs::read_to_string(tmp.path().join("comparisons.csv")).unwrap();
    assert_eq!(comparisons.lines().count(), 2486 + 1);
}

#[test]
fn generate_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for (dir, seed) in [(&a, "3"), (&b, "3"), (&c, "4")] {
        ok(&["generate", "--model", "3", "--n", "30", "--d", "5", "--seed", seed, "--out", s(dir)]);
    }
    for name in ["features.csv", "comparisons.csv", "truth.csv"] {
        let read = |d: &Path| std::fs::read(d.join(name)).unwrap();
        assert_eq!(read(&a), read(&b), "{name}");
    }
    assert_ne!(std::fs::read(a.join("comparisons.csv")).unwrap(), std::fs::read(c.join("comparisons.csv")).unwrap());
}

#[test]
fn smallest_instance_ranks() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(&["generate", "--n", "2", "--d", "1", "--K", "10", "--out", s(dir)]);
    let report = ok(&[
        "rank", "--features", s(&dir.join("features.csv")), "--comparisons", s(&dir.join("comparisons.csv")),
        "--truth", s(&dir.join("truth.csv")), "--out", s(dir),
    ]);
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(json["n"], 2);
    let mut order: Vec<u64> = json["ranking"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    order.sort();
    assert_eq!(order, [0, 1]);
}

fn rank_orders(name: &str, algo: &str) -> serde_json::Value {
    let tmp = TempDir::new().unwrap();
    let data = repo_data(name);
    let report = ok(&[
        "rank", "--features", s(&data.join("features.csv")), "--orders", s(&data.join("orders.csv")),
        "--algo", algo, "--no-timing", "--out", s(tmp.path()),
    ]);
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    let mut order: Vec<u64> = json["ranking"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    order.sort();
    assert_eq!(order, (0..10).collect::<Vec<u64>>());
    assert!(json.get("wall_ms").is_none());
    let file = std::fs::read_to_string(tmp.path().join("ranking.txt")).unwrap();
    assert_eq!(file.lines().count(), 10);
    json
}

#[test]
fn ranks_bundled_order_data() {
    for name in ["sushi", "car"] {
        let ipr = rank_orders(name, "ipr");
        assert_eq!(ipr["features_used"], true);
        let lrpr = rank_orders(name, "lrpr");
        assert_eq!(lrpr["features_used"], false);
        assert_eq!(ipr["m"], 45, "{name}");
    }
}

fn diagnose_value(out: &str, key: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with(&format!("{key}: "))).unwrap();
    line[key.len() + 2..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn diagnose_reports_requirements() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(&["generate", "--n", "40", "--d", "4", "--out", s(dir)]);
    let (features, comparisons, truth) = (dir.join("features.csv"), dir.join("comparisons.csv"), dir.join("truth.csv"));
    let base = ["diagnose", "--features", s(&features), "--comparisons", s(&comparisons), "--truth", s(&truth)];
    let coarse = ok(&[&base[..], &["--epsilon", "0.1"]].concat());
    let fine = ok(&[&base[..], &["--epsilon", "0.05"]].concat());
    assert!(coarse.contains("kappa: 1.000"), "{coarse}");
    let ratio = diagnose_value(&fine, "m_required") / diagnose_value(&coarse, "m_required");
    assert!((ratio - 4.0).abs() < 1e-4, "{ratio}");
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(flrank(&["rank", "--bogus"]).status.code(), Some(2));
    assert_eq!(flrank(&["generate", "--n", "5", "--d", "9", "--out", s(tmp.path())]).status.code(), Some(2));
    let missing = tmp.path().join("missing.csv");
    let out = flrank(&["rank", "--features", s(&missing), "--comparisons", s(&missing)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
    let truth = write_truth(tmp.path(), 4);
    let ranking = write_order(tmp.path(), "r.txt", &[0, 1, 2]);
    assert_eq!(flrank(&["eval", "--ranking", s(&ranking), "--truth", s(&truth)]).status.code(), Some(3));
}

#[test]
fn sweep_appends_mean_rows() {
    let tmp = TempDir::new().unwrap();
    let spec = tmp.path().join("spec.toml");
    std::fs::write(
        &spec,
        "vary = \"K\"\nvalues = [5, 40]\nmodels = [1]\nseeds = [0, 1]\n[fixed]\nn = 20\nd = 3\n[solver]\nmax_iters = 100\n",
    )
    .unwrap();
    ok(&["sweep", "--spec", s(&spec), "--no-timing", "--out", s(tmp.path())]);
    let text = std::fs::read_to_string(tmp.path().join("metrics.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    // 2 algorithms x 2 values x 2 seeds, then one mean row per (algorithm, value).
    assert_eq!(rows.len(), 8 + 4);
    for mean in rows.iter().filter(|r| r[6] == "mean") {
        let dists: Vec<f64> = rows
            .iter()
            .filter(|r| r[6] != "mean" && r[..6] == mean[..6])
            .map(|r| r[7].parse().unwrap())
            .collect();
        assert_eq!(dists.len(), 2);
        let expected = dists.iter().sum::<f64>() / 2.0;
        assert!((mean[7].parse::<f64>().unwrap() - expected).abs() <= 1e-12);
        assert_eq!(mean[9].parse::<f64>().unwrap(), 0.0);
    }
}
