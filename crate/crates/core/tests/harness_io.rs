use std::fs;
use zerolab::harness::{emit_report, parse_config, run_experiment};

fn config(extra: &str) -> String {
    format!(r#"{{"ensemble": {{"name": "kac"}}, "distribution": {{"kind": "complex-gaussian"}}, "seed": 4, {extra}}}"#)
}

#[test]
fn csv_has_one_row_per_cell() {
    let cfg = parse_config(&config(r#""degrees": [4, 6], "trials": 3, "metrics": [{"metric": "angular-ks"}]"#)).unwrap();
    let rec = run_experiment(&cfg, Some(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&rec, dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("angular-ks.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,trial,value");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("4,0,") && lines[6].starts_with("6,2,"));
    assert!(!csv.contains('\r'));
}

#[test]
fn empty_metric_list_writes_summary_only() {
    let cfg = parse_config(&config(r#""degrees": [3], "trials": 2"#)).unwrap();
    let rec = run_experiment(&cfg, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&rec, dir.path()).unwrap();
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["summary.json", "timing.json"]);
}

#[test]
fn single_trial_record_matches_its_polynomial() {
    let cfg = parse_config(&config(
        r#""degrees": [2], "trials": 1, "save_roots": true, "metrics": [{"metric": "root-count"}, {"metric": "max-residual"}]"#,
    ))
    .unwrap();
    let rec = run_experiment(&cfg, None).unwrap();
    assert_eq!(rec.trials.len(), 1);
    let t = &rec.trials[0];
    let roots = t.roots.as_ref().unwrap();
    assert_eq!(t.values[0], roots.len() as f64);
    assert_eq!(t.values[1], roots.max_residual());
    assert_eq!(roots.len() + roots.at_infinity, 2);
}

#[test]
fn re_emitting_is_byte_identical() {
    let cfg = parse_config(&config(r#""degrees": [5], "trials": 4, "metrics": [{"metric": "annulus-mass"}]"#)).unwrap();
    let rec = run_experiment(&cfg, None).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    emit_report(&rec, a.path()).unwrap();
    emit_report(&rec, b.path()).unwrap();
    for f in ["summary.json", "annulus-mass-0.1.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn numerical_failures_name_the_cell() {
    let cfg = parse_config(&config(r#""degrees": [40], "trials": 2, "tolerances": {"max_iters": 1}"#)).unwrap();
    let err = run_experiment(&cfg, None).unwrap_err();
    assert!(!err.is_schema());
    assert!(err.to_string().contains("n = 40, trial = "), "{err}");
}
