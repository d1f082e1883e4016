use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn fakebm(args: &[&str], workers: Option<&str>) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fakebm"));
    cmd.args(args);
    if let Some(w) = workers {
        cmd.env("FAKEBM_WORKERS", w);
    }
    let out = cmd.output().expect("binary runs");
    out.status.code().expect("exit code")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

const TWO: &str = "[[0.1,0.4],[0.6,0.9]]";

#[test]
fn verify_discrete_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let o = out.to_str().unwrap();
    assert_eq!(fakebm(&["verify-discrete", "--intervals", TWO, "--m", "8", "--steps", "40", "--output-dir", o], None), 0);
    let r = report(&out);
    assert_eq!(r["exact_zero"], true);
    assert_eq!(r["max_abs_deviation"].as_f64(), Some(0.0));
    assert_eq!(r["backend"], "rational");

    let out = tmp.path().join("b");
    let o = out.to_str().unwrap();
    let args = ["verify-discrete", "--intervals", TWO, "--m", "200", "--steps", "200", "--backend", "float", "--output-dir", o];
    assert_eq!(fakebm(&args, None), 0);
    assert!(report(&out)["max_abs_deviation"].as_f64().unwrap() <= 1e-12);

    // spacing 0.2 leaves no lattice point inside (0.4, 0.6)
    let args = ["verify-discrete", "--intervals", TWO, "--m", "50", "--steps", "200", "--backend", "float", "--output-dir", o];
    assert_eq!(fakebm(&args, None), 2);
    assert_eq!(fakebm(&["verify-discrete", "--intervals", "[[0.5,0.4]]", "--m", "8", "--steps", "4", "--output-dir", o], None), 2);
}

#[test]
fn config_file_and_missing_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, format!(r#"{{"intervals": {TWO}, "n_paths": 200, "dt": 1e-3, "t_queries": [0.5, 1.0]}}"#)).unwrap();
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(fakebm(&["simulate", "--config", cfg.to_str().unwrap(), "--output-dir", o], None), 2);
    assert_eq!(fakebm(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "4", "--output-dir", o], None), 0);
    let csv = fs::read_to_string(out.join("simulate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("path_id,t_query,X_value,mode_at_t"));
    assert_eq!(lines.count(), 400);
    fs::write(&cfg, "{not json").unwrap();
    assert_eq!(fakebm(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "4", "--output-dir", o], None), 2);
}

#[test]
fn reports_are_byte_identical_across_runs_and_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let args = |o: &Path| {
        vec![
            "marginals".to_string(),
            "--intervals".into(),
            TWO.into(),
            "--n-paths".into(),
            "2000".into(),
            "--dt".into(),
            "1e-3".into(),
            "--seed".into(),
            "11".into(),
            "--output-dir".into(),
            o.to_str().unwrap().into(),
        ]
    };
    let run = |o: &Path, w: &str| {
        let v = args(o);
        let v: Vec<&str> = v.iter().map(String::as_str).collect();
        fakebm(&v, Some(w))
    };
    let files = ["report.json", "empirical_cdf_0.csv", "empirical_cdf_1.csv"];
    let code_a = run(&a, "1");
    fs::create_dir(&b).unwrap();
    for f in files {
        fs::copy(a.join(f), b.join(f)).unwrap();
    }
    for w in ["3", "1"] {
        assert_eq!(run(&a, w), code_a);
        for f in files {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} with {w} workers");
        }
    }
    let header = fs::read_to_string(a.join("empirical_cdf_0.csv")).unwrap();
    assert!(header.starts_with("x,empirical,theoretical\n"));
}

#[test]
fn small_marginal_run_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let code = fakebm(
        &["marginals", "--intervals", TWO, "--n-paths", "100", "--dt", "1e-3", "--t-queries", "1", "--seed", "2", "--output-dir", o],
        None,
    );
    assert!(code == 0 || code == 1);
    let r = report(tmp.path());
    assert!(r["warning"].as_str().unwrap().contains("low power"));
    assert!(tmp.path().join("empirical_cdf.csv").exists());
}

#[test]
fn strong_markov_guard_is_inconclusive() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let code = fakebm(&["strong-markov", "--n-pairs", "500", "--depth", "3", "--seed", "3", "--output-dir", o], None);
    assert_eq!(code, 1);
    let r = report(tmp.path());
    assert_eq!(r["status"], "inconclusive");
    let csv = fs::read_to_string(tmp.path().join("coupling.csv")).unwrap();
    assert!(csv.starts_with("class,n,p_hat,ci_lo,ci_hi\nA,"));
}

#[test]
fn martingale_and_negative_control() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["martingale", "--intervals", TWO, "--n-paths", "4000", "--dt", "1e-3", "--n-bins", "10", "--seed", "8"];
    let a = tmp.path().join("a");
    let mut args = base.to_vec();
    args.extend(["--output-dir", a.to_str().unwrap()]);
    assert_eq!(fakebm(&args, None), 0);
    let csv = fs::read_to_string(a.join("martingale_bins.csv")).unwrap();
    assert!(csv.starts_with("bin_lo,bin_hi,mean_increment,stderr,n\n"));
    assert_eq!(csv.lines().count(), 11);
    let b = tmp.path().join("b");
    let mut args = base.to_vec();
    args.extend(["--drift", "0.3", "--output-dir", b.to_str().unwrap()]);
    assert_eq!(fakebm(&args, None), 1);
}

#[test]
fn convex_order_and_exp_variant() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("c");
    assert_eq!(fakebm(&["convex-order", "--output-dir", o.to_str().unwrap()], None), 0);
    assert_eq!(report(&o)["pass"], true);

    let cfg = tmp.path().join("e.json");
    fs::write(
        &cfg,
        r#"{"exp_window": [0.6, 1.1, 0.5, 1.0], "intervals": [[0.7, 0.8], [0.9, 1.0]], "n_paths": 3000, "seed": 6}"#,
    )
    .unwrap();
    let e = tmp.path().join("e");
    let code = fakebm(&["exp-variant", "--config", cfg.to_str().unwrap(), "--output-dir", e.to_str().unwrap()], None);
    assert_eq!(code, 0, "{}", fs::read_to_string(e.join("report.json")).unwrap_or_default());
    assert_eq!(report(&e)["all_positive"], true);
    fs::write(&cfg, r#"{"exp_window": [3.0, 5.0, 0.5, 1.0], "intervals": [[3.5, 4.0]], "n_paths": 10, "seed": 6}"#).unwrap();
    assert_eq!(fakebm(&["exp-variant", "--config", cfg.to_str().unwrap(), "--output-dir", e.to_str().unwrap()], None), 2);
}

#[test]
fn flux_runs_on_a_small_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let code = fakebm(&["flux", "--intervals", TWO, "--n-paths", "2000", "--dt", "1e-3", "--seed", "1", "--output-dir", o], None);
    assert!(code == 0 || code == 1);
    let r = report(tmp.path());
    assert!(r["count_in"].as_u64().unwrap() > 0);
    assert_eq!(fakebm(&["flux", "--intervals", "[[0.1,0.4]]", "--n-paths", "10", "--seed", "1", "--output-dir", o], None), 2);
}
