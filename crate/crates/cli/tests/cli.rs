use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn zerolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerolab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = r#"{
  "ensemble": {"name": "kac"},
  "distribution": {"kind": "complex-gaussian"},
  "degrees": [6, 12],
  "trials": 10,
  "seed": 7,
  "save_roots": true,
  "metrics": [
    {"metric": "root-count"},
    {"metric": "angular-ks"},
    {"metric": "annulus-mass", "delta": 0.2},
    {"metric": "linear-statistic", "phi": {"kind": "radial-rational"}}
  ]
}"#;

fn run_into(config: &Path, out: &Path, workers: Option<&str>) {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    if let Some(w) = workers {
        args.extend(["--workers", w]);
    }
    let o = zerolab(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "timing.json" {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_writes_report_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    run_into(&cfg, &out, Some("1"));
    for f in ["summary.json", "timing.json", "root-count.csv", "angular-ks.csv", "annulus-mass-0.2.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let csv = fs::read_to_string(out.join("root-count.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 10);
    assert!(out.join("roots").join("n12_t9.csv").is_file());
}

#[test]
fn outputs_do_not_depend_on_workers_or_repetition() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let reference = tmp.path().join("ref");
    run_into(&cfg, &reference, None);
    let expected = snapshot(&reference);
    assert!(expected.len() > 20);
    for (i, w) in [Some("1"), Some("2"), Some("8"), None].into_iter().enumerate() {
        let out = tmp.path().join(format!("o{i}"));
        run_into(&cfg, &out, w);
        assert_eq!(snapshot(&out), expected, "workers {w:?}");
    }
}

#[test]
fn schema_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        SMALL.replace("\"trials\": 10", "\"trials\": 0"),
        SMALL.replace("\"seed\": 7", "\"seed\": 7, \"sed\": 8"),
        SMALL.replace("\"degrees\": [6, 12]", "\"degrees\": [12, 6]"),
        SMALL.replace("\"delta\": 0.2", "\"delta\": -0.2"),
        SMALL.replace("\"kac\"", "\"kak\""),
        "{".to_string(),
    ];
    for text in &cases {
        let cfg = write_config(tmp.path(), text);
        let o = zerolab(&["run", cfg.to_str().unwrap(), "--out", tmp.path().join("x").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}\n{}", String::from_utf8_lossy(&o.stderr));
    }
    let o = zerolab(&["run", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_with_trial_context() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("\"degrees\": [6, 12]", "\"degrees\": [40]")
        .replace("\"seed\": 7", "\"seed\": 7, \"tolerances\": {\"tol_root\": 1e-8, \"max_iters\": 1}");
    let cfg = write_config(tmp.path(), &text);
    let o = zerolab(&["run", cfg.to_str().unwrap(), "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("n = 40, trial = 0"), "{err}");
}

#[test]
fn describe_catalog_and_inline() {
    let o = zerolab(&["describe", "kac"]);
    assert!(o.status.success());
    assert!(!o.stdout.is_empty());
    let o = zerolab(&["describe", r#"{"name": "elliptic", "m": 2}"#]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(zerolab(&["describe", "bogus"]).status.code(), Some(2));
    assert_eq!(zerolab(&["describe", r#"{"name": "kac", "m": 2}"#]).status.code(), Some(2));
}

#[test]
fn verify_rejects_bad_golden_dir_and_ids() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(zerolab(&["verify", tmp.path().to_str().unwrap()]).status.code(), Some(2));
    let golden = concat!(env!("CARGO_MANIFEST_DIR"), "/../../golden");
    assert_eq!(zerolab(&["verify", golden, "--only", "12"]).status.code(), Some(2));
    let o = zerolab(&["verify", golden, "--only", "1,2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().filter(|l| l.starts_with("PASS")).count(), 2);
}
