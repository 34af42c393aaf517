use std::fs;
use std::path::Path;
use std::process::Command;

use liesys_cli::{
    run_ck, run_convergence, run_limit_cycle, run_riccati_check, Experiment, MethodName, Resolution, RunRequest,
};

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(';').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(';').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn request(experiment: Experiment, dir: &Path) -> RunRequest {
    RunRequest::new(experiment, dir.to_path_buf())
}

#[test]
fn ck_default_request() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_ck(&request(Experiment::Ck, dir.path())).unwrap();

    let (header, rows) = read_table(&dir.path().join("ck_trajectory.csv"));
    assert_eq!(header, ["t", "x0", "x1", "x2"]);
    assert_eq!(rows.len(), 11);
    for (k, t) in column(&rows, 0).into_iter().enumerate() {
        assert!((t - (3.0 + 0.1 * k as f64)).abs() < 1e-12);
    }

    let (header, rows) = read_table(&dir.path().join("ck_invariant.csv"));
    assert_eq!(header, ["t", "exact", "geometric", "rk4"]);
    let geometric = column(&rows, 2).iter().map(|i| (i - 1.4).abs()).fold(0.0, f64::max);
    let rk4 = column(&rows, 3).iter().map(|i| (i - 1.4).abs()).fold(0.0, f64::max);
    assert!(geometric <= 1e-9);
    assert!(rk4 >= 100.0 * geometric.max(f64::EPSILON));
    assert!((report.geometric_drift - geometric).abs() < 1e-15);
}

#[test]
fn ck_with_rk4_method_keeps_a_geometric_column() {
    let dir = tempfile::tempdir().unwrap();
    let mut req = request(Experiment::Ck, dir.path());
    req.method = Some(MethodName::Rk4);
    run_ck(&req).unwrap();
    let (_, rows) = read_table(&dir.path().join("ck_invariant.csv"));
    assert!(column(&rows, 2).iter().all(|i| (i - 1.4).abs() <= 1e-9));
}

#[test]
fn limit_cycle_default_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_limit_cycle(&request(Experiment::LimitCycle, dir.path())).unwrap();
    assert_eq!(report.outcomes.len(), 3);
    for name in ["limit_cycle_rkmk_h0.1.csv", "limit_cycle_rk4_h0.02.csv", "limit_cycle_rk4_h0.01.csv"] {
        let (header, rows) = read_table(&dir.path().join(name));
        assert_eq!(header, ["t", "x", "y", "r2"]);
        assert!(!rows.is_empty());
    }
    let (_, rows) = read_table(&dir.path().join("limit_cycle_rk4_h0.02.csv"));
    assert!(column(&rows, 3).iter().any(|r2| (r2 - 1.0).abs() > 1e-3));
}

#[test]
fn limit_cycle_rkmk_stays_on_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let mut req = request(Experiment::LimitCycle, dir.path());
    req.method = Some(MethodName::Rkmk);
    req.resolution = Some(Resolution::StepSize(0.1));
    req.t1 = 1.7;
    let report = run_limit_cycle(&req).unwrap();
    assert!(report.outcomes[0].stopped.is_none());
    let (_, rows) = read_table(&dir.path().join("limit_cycle_rkmk_h0.1.csv"));
    assert_eq!(rows.len(), 18);
    assert!(column(&rows, 3).iter().all(|r2| (r2 - 1.0).abs() <= 1e-12));
}

#[test]
fn limit_cycle_zero_length_interval() {
    let dir = tempfile::tempdir().unwrap();
    let mut req = request(Experiment::LimitCycle, dir.path());
    req.t1 = req.t0;
    req.method = Some(MethodName::Magnus4);
    run_limit_cycle(&req).unwrap();
    let (_, rows) = read_table(&dir.path().join("limit_cycle_magnus4_h0.1.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(column(&rows, 1), [0.0]);
    assert_eq!(column(&rows, 2), [1.0]);
}

#[test]
fn limit_cycle_domain_error_leaves_a_valid_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut req = request(Experiment::LimitCycle, dir.path());
    req.method = Some(MethodName::Rkmk);
    req.x0 = Some(vec![1.2, 0.0]);
    req.t1 = 3.0;
    let report = run_limit_cycle(&req).unwrap();
    let outcome = &report.outcomes[0];
    let stopped = outcome.stopped.as_ref().expect("outside points leave the action domain");
    assert!(stopped.contains("step"));
    assert!(report.has_domain_error());
    let (header, rows) = read_table(&dir.path().join("limit_cycle_rkmk_h0.1.csv"));
    assert_eq!(rows.len(), outcome.rows);
    assert!(!rows.is_empty() && rows.len() < 31);
    assert!(rows.iter().all(|r| r.len() == header.len()));
    assert!(column(&rows, 3).iter().all(|r2| *r2 > 1.0));
}

#[test]
fn convergence_slopes_and_monotone_errors() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_convergence(&request(Experiment::Convergence, dir.path())).unwrap();
    for (method, slope) in &report.slopes {
        let range = match method {
            MethodName::Magnus2 => 1.7..=2.3,
            _ => 3.6..=4.4,
        };
        assert!(range.contains(slope), "{method:?} slope {slope}");
    }
    let (header, rows) = read_table(&dir.path().join("convergence.csv"));
    assert_eq!(header, ["h", "error", "method"]);
    for method in ["magnus2", "magnus4", "rkmk"] {
        let errors: Vec<f64> =
            rows.iter().filter(|r| r[2] == method && r[0] != "slope").map(|r| r[1].parse().unwrap()).collect();
        assert_eq!(errors.len(), 4);
        assert!(errors.windows(2).all(|w| w[1] < w[0]));
        assert!(rows.iter().any(|r| r[0] == "slope" && r[2] == method));
    }
}

#[test]
fn riccati_check_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_riccati_check(&request(Experiment::RiccatiCheck, dir.path())).unwrap();
    assert!(report.passed());
    let (header, rows) = read_table(&dir.path().join("riccati.csv"));
    assert_eq!(header, ["t", "direct", "superposed", "abs_err"]);
    assert_eq!(rows.len(), 1001);
    assert!(column(&rows, 3).iter().all(|e| *e >= 0.0 && *e <= 1e-5));
}

#[test]
fn riccati_identical_initial_values_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut req = request(Experiment::RiccatiCheck, dir.path());
    req.x0 = Some(vec![0.0, 0.0, -1.0, 0.5]);
    assert!(run_riccati_check(&req).is_err());
}

#[test]
fn invalid_requests_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut req = request(Experiment::Ck, dir.path());
    req.t1 = 2.0;
    assert!(req.validate().is_err());

    let mut req = request(Experiment::Ck, dir.path());
    req.resolution = Some(Resolution::StepSize(0.3));
    assert!(req.validate().is_err());

    let mut req = request(Experiment::Ck, dir.path());
    req.resolution = Some(Resolution::Steps(10));
    req.ref_steps = Some(50);
    assert!(req.validate().is_err());

    let mut req = request(Experiment::Ck, dir.path());
    req.resolution = Some(Resolution::Steps(0));
    assert!(req.validate().is_err());

    let mut req = request(Experiment::Ck, dir.path());
    req.x0 = Some(vec![1.0, 1.0]);
    assert!(req.validate().is_err());
}

#[test]
fn outputs_are_deterministic_and_parse() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        run_ck(&request(Experiment::Ck, dir)).unwrap();
        run_limit_cycle(&request(Experiment::LimitCycle, dir)).unwrap();
        run_riccati_check(&request(Experiment::RiccatiCheck, dir)).unwrap();
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for name in names {
        let (x, y) = (fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
        assert_eq!(x, y, "{name:?} differs");
        let (header, rows) = read_table(&a.path().join(&name));
        for row in rows {
            assert_eq!(row.len(), header.len());
            for field in row {
                assert!(field.parse::<f64>().unwrap().is_finite());
            }
        }
    }
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_liesys");
    let ok = Command::new(bin).args(["ck", "--out"]).arg(dir.path()).output().unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("ck_trajectory.csv").exists());

    let bad = Command::new(bin).args(["ck", "--t0", "4", "--t1", "3", "--out"]).arg(dir.path()).output().unwrap();
    assert!(!bad.status.success());

    let domain = Command::new(bin)
        .args(["limit-cycle", "--method", "rkmk", "--x0", "1.2,0", "--t1", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!domain.status.success());
    assert!(dir.path().join("limit_cycle_rkmk_h0.1.csv").exists());

    let steps = Command::new(bin).args(["riccati-check", "--steps", "500", "--out"]).arg(dir.path()).output().unwrap();
    assert!(steps.status.success());
    assert!(String::from_utf8_lossy(&steps.stdout).contains("PASS"));
}
