// The lpp2t binary: exit codes, printed summaries, embedded configs.

use std::path::Path;
use std::process::{Command, Output};

fn lpp2t(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpp2t")).env("LPP2T_OUT_DIR", dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn finite_prints_exact_rational() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpp2t(
        dir.path(),
        &["finite", "--m", "1", "--n", "1", "--M", "2", "--N", "2", "--a", "1", "--A", "2", "--q", "1/2"],
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o), "11/64");
    let j = read_json(&dir.path().join("finite.json"));
    assert_eq!(j["P_exact"], "11/64");
    assert_eq!(j["config"]["args"]["q"], "1/2");
    assert_eq!(j["config"]["seed"], 1);
}

#[test]
fn f2_upper_tail() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpp2t(dir.path(), &["f2", "--xi", "8"]);
    assert!(o.status.success());
    assert!(stdout(&o).parse::<f64>().unwrap() >= 0.999999);
    let o = lpp2t(dir.path(), &["f2", "--xi", "-2,0,2", "--output", "sweep.csv"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "xi,f2");
    assert_eq!(lines.count(), 3);
}

#[test]
fn twotime_json_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpp2t(dir.path(), &["twotime", "--xi1", "0", "--eta1", "0", "--xi2", "0", "--eta2", "0", "--alpha", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j = read_json(&dir.path().join("twotime.json"));
    let v = j["value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&v));
    assert!((stdout(&o).parse::<f64>().unwrap() - v).abs() < 1e-15);
    assert_eq!(j["grid"]["L"], 10.0);
    assert_eq!(j["contour"]["u_nodes"], 64);
    assert_eq!(j["config"]["args"]["form"], "k");
    assert!(j["imag_residue"].as_f64().unwrap() < 1e-6);
}

#[test]
fn parameter_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["twotime", "--radius", "0.9"][..],
        &["twotime", "--alpha", "-1"],
        &["finite", "--m", "2", "--n", "1", "--M", "2", "--N", "2", "--a", "1", "--A", "2", "--q", "1/2"],
        &["finite", "--m", "1", "--n", "1", "--M", "2", "--N", "2", "--a", "1", "--A", "2", "--q", "3/2"],
        &["simulate", "--q", "abc"],
        &["f2", "--xi", "1", "--nodes", "x"],
        &["--threads", "0", "f2", "--xi", "0"],
        &["mc-two-time", "--T", "0.4"],
    ] {
        let o = lpp2t(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn simulation_is_reproducible_from_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let o = lpp2t(
            dir.path(),
            &["--seed", "42", "--threads", "1", "simulate", "--m", "6", "--n", "5", "--q", "1/3", "--output", name],
        );
        assert!(o.status.success());
        std::fs::read_to_string(dir.path().join(name)).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    assert!(a.lines().next().unwrap().contains("\"seed\":42"));
    assert_eq!(a.lines().count(), 2 + 30);
}

#[test]
fn mc_two_time_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpp2t(
        dir.path(),
        &["mc-two-time", "--T", "20", "--xi1", "-1,0", "--xi2", "0,1", "--samples", "500", "--seed", "3"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(dir.path().join("mc-two-time.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["xi1", "xi2", "estimate", "std_error", "samples", "seed"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[4] == "500" && &r[5] == "3"));
}

#[test]
fn verify_finite_suite_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = lpp2t(dir.path(), &["verify", "--suite", "finite", "--finite-samples", "100000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j = read_json(&dir.path().join("verify-finite.json"));
    assert_eq!(j["passed"], true);
    assert_eq!(j["criteria"].as_array().unwrap().len(), 2);
    assert_eq!(j["options"]["finite_mc_samples"], 100000);
}
