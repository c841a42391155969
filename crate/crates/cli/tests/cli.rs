use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qerc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qerc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = qerc(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn records(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn epsilon_and_eta_give_identical_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["protocol-sweep", "--epsilon", "1/9", "--out", "a.csv"], dir.path());
    ok(&["protocol-sweep", "--eta", "0.1", "--out", "b.csv"], dir.path());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());

    let (header, rows) = records(&dir.path().join("a.csv"));
    assert_eq!(header, ["eta", "e0_bloch", "e0_fourstate", "ec_bloch", "ec_fourstate", "ec_prime"]);
    assert!((column(&header, &rows[0], "ec_bloch") - 0.0081300813).abs() < 1e-9);
    assert!((column(&header, &rows[0], "e0_fourstate") - 0.05).abs() < 1e-14);
}

#[test]
fn noiseless_channel_has_no_errors() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["protocol-sweep", "--eta", "0", "--out", "zero.csv"], dir.path());
    let (header, rows) = records(&dir.path().join("zero.csv"));
    for name in &header[1..] {
        assert!(column(&header, &rows[0], name).abs() < 1e-15, "{name}");
    }
}

#[test]
fn bad_flags_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = qerc(&["monte-carlo", "--eta", "0.1", "--trials", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--trials"));

    let out = qerc(&["protocol-sweep", "--eta", "0.7"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--eta"));

    let out = qerc(&["protocol-sweep", "--eta", "0.1", "--epsilon", "0.1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fig2_writes_four_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fig2", "--out", "one"], dir.path());
    let stdout = ok(&["fig2", "--out", "two"], dir.path());
    assert!(stdout.contains("Ec' < E0 on ["));
    let mut names: Vec<_> = fs::read_dir(dir.path().join("one"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["fig2_p0.001.csv", "fig2_p0.002.csv", "fig2_p0.005.csv", "fig2_p0.01.csv"]);
    for n in &names {
        let a = fs::read(dir.path().join("one").join(n)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("two").join(n)).unwrap());
        let (_, rows) = records(&dir.path().join("one").join(n));
        assert_eq!(rows.len(), 100);
    }
}

#[test]
fn three_pair_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["three-pair-table", "--xi", "0.5", "--out", "t.csv"], dir.path());
    assert!(stdout.contains("MISMATCH"));
    let (header, rows) = records(&dir.path().join("t.csv"));
    assert_eq!(rows.len(), 32);
    let state = header.iter().position(|h| h == "state").unwrap();
    let r0 = rows.iter().find(|r| r[state] == "r_0").unwrap();
    assert!((column(&header, r0, "paper_coeff") - 1.0 / 24.0).abs() < 1e-15);
    assert!((column(&header, r0, "oracle_coeff_paperbound") - 1.0 / 24.0).abs() < 1e-12);
    for r in &rows {
        assert!(column(&header, r, "oracle_coeff_exact") <= column(&header, r, "oracle_coeff_paperbound") + 1e-12);
    }
}

#[test]
fn monte_carlo_is_shard_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["monte-carlo", "--epsilon", "1/9", "--xi", "0.8", "--trials", "300000", "--seed", "5"];
    ok(&[&common[..], &["--out", "a.csv"]].concat(), dir.path());
    ok(&[&common[..], &["--shards", "4", "--out", "b.csv"]].concat(), dir.path());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    let (header, rows) = records(&dir.path().join("a.csv"));
    let total: f64 = ["n1", "n4", "rejected"].iter().map(|c| column(&header, &rows[0], c)).sum();
    assert_eq!(total, 300_000.0);
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["verify", "--cases", "30"], dir.path());
    assert!(!stdout.contains("FAIL"));
    assert_eq!(stdout.matches("PASS").count(), 6);
}
