use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn drs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drs")).args(args).output().expect("drs runs")
}

fn write_data(dir: &Path) -> (PathBuf, PathBuf) {
    let mut train = String::from("a,b,y\n");
    for i in 0..60 {
        let a = (i % 10) as f64;
        let b = (i / 10) as f64;
        writeln!(train, "{a},{b},{}", 3.0 * a - b + 0.5 * (i % 3) as f64).unwrap();
    }
    let query = "a,b\n1.5,2\n9,0\n4,4\n";
    let t = dir.join("train.csv");
    let q = dir.join("query.csv");
    fs::write(&t, train).unwrap();
    fs::write(&q, query).unwrap();
    (t, q)
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn predict_ds_reports_a_winner() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = write_data(dir.path());
    let out = drs(&["predict", "--train", t.to_str().unwrap(), "--query", q.to_str().unwrap(), "--members", "15", "--k", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = rows(&out);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let winner: usize = r[2].parse().unwrap();
        assert!(winner < 15);
        let y: f64 = r[1].parse().unwrap();
        // predictions are denormalized back to the target's range
        assert!((-5.0..=28.0).contains(&y), "{y}");
    }
}

#[test]
fn predict_dws_alphas_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let (t, q) = write_data(dir.path());
    let out = drs(&[
        "predict", "--train", t.to_str().unwrap(), "--query", q.to_str().unwrap(), "--algo", "dws", "--measure", "m7",
        "--members", "12", "--k", "6",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for r in rows(&out) {
        let survivors = r[3].split(';').count();
        let alphas: Vec<f64> = r[4].split(';').map(|a| a.parse().unwrap()).collect();
        assert_eq!(survivors, alphas.len());
        assert!((alphas.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn predict_rejects_wrong_width_query() {
    let dir = tempfile::tempdir().unwrap();
    let (t, _) = write_data(dir.path());
    let q = dir.path().join("wide.csv");
    fs::write(&q, "1,2,3\n").unwrap();
    let out = drs(&["predict", "--train", t.to_str().unwrap(), "--query", q.to_str().unwrap(), "--members", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (t, _) = write_data(dir.path());
    let out = drs(&["bench", "--data", t.to_str().unwrap(), "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--k"));
    let out = drs(&["bench", "--data", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,y\n1,2\nNA,3\n").unwrap();
    let out = drs(&["bench", "--data", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (t, _) = write_data(dir.path());
    let out_dir = dir.path().join("out");
    let out = drs(&[
        "bench", "--data", t.to_str().unwrap(), "--members", "8", "--k", "4", "--folds", "3", "--reps", "2", "--measures",
        "m2,m3,m7", "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["results.csv", "wtl.csv", "diff_m7.csv", "agreement.csv", "tables.txt"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let results = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    // 3 dynamic algorithms x 3 measures + mean, median, single
    assert_eq!(results.lines().count(), 1 + 12);
}

#[test]
fn inspect_leaves_query_row_out() {
    let dir = tempfile::tempdir().unwrap();
    let (t, _) = write_data(dir.path());
    let out_dir = dir.path().join("inspect");
    let out = drs(&[
        "inspect", "--data", t.to_str().unwrap(), "--row", "7", "--members", "5", "--k", "4", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let region = fs::read_to_string(out_dir.join("region.csv")).unwrap();
    let neighbors: Vec<usize> = region.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(neighbors.len(), 4);
    assert!(!neighbors.contains(&7));
    let d_sum: f64 = region.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap()).sum();
    assert!((d_sum - 1.0).abs() < 1e-9);
    let scores = fs::read_to_string(out_dir.join("scores.csv")).unwrap();
    assert_eq!(scores.lines().next().unwrap(), "member,query_prediction,m1,m2,m3,m4,m5,m6,m7,m8");
    assert_eq!(scores.lines().count(), 6);

    let out = drs(&["inspect", "--data", t.to_str().unwrap(), "--row", "60", "--members", "5"]);
    assert_eq!(out.status.code(), Some(2));
}
