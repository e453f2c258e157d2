use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};
use std::sync::atomic::{AtomicU32, Ordering};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ci-domain");

fn data_file(contents: &str) -> PathBuf {
    static COUNTER: AtomicU32 = AtomicU32::new(0);
    let k = COUNTER.fetch_add(1, Ordering::Relaxed);
    let p = std::env::temp_dir().join(format!("ci-domain-cli-{}-{k}.txt", std::process::id()));
    std::fs::write(&p, contents).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CI_DOMAIN_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(o)).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

/// Three points whose sum of squared deviations is 1.
fn unit_s_file() -> PathBuf {
    let d = std::f64::consts::FRAC_1_SQRT_2;
    data_file(&format!("# S = 1\n{}\n0\n{}\n", -d, d))
}

#[test]
fn variance_mle_interval() {
    let f = unit_s_file();
    let v = json(&run(&["interval", "variance", "--gamma", "0.95", "--estimator", "mle", "--data", f.to_str().unwrap(), "--json"]));
    assert_eq!(v["domain"], "variance_band");
    assert!((num(&v, "lo") - 0.0114).abs() < 5e-4);
    assert!((num(&v, "hi") - 9.748).abs() < 5e-3);
    assert!((num(&v["constants"], "exp_neg_eta") - 0.1849).abs() < 5e-4);
}

#[test]
fn alpha_point_interval() {
    let f = unit_s_file();
    let v = json(&run(&["interval", "variance-alpha-point", "--data", f.to_str().unwrap(), "--json"]));
    assert!((num(&v, "lo") - 0.1355).abs() < 1e-3);
    // exact 1/chi0 = 19.7489; the printed reference 19.763 is 1/0.0506
    assert!((num(&v, "hi") - 19.748_945).abs() < 1e-4);
    assert!((num(&v, "hi") - 19.763).abs() < 2e-2);
}

#[test]
fn mean_t_text_output() {
    let f = data_file("1\n2\n3\n");
    let o = run(&["interval", "mean-t", "--data", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("center: 2\n"), "{text}");
    assert!(text.contains("half_width: 2.48414\n"), "{text}");
    assert!(text.contains("domain: theta_interval\n"));
}

#[test]
fn mean_known_sigma_and_mean_diff() {
    let f = data_file("0\n");
    let v = json(&run(&["interval", "mean-known-sigma", "--sigma", "1", "--data", f.to_str().unwrap(), "--json"]));
    assert_eq!(v["domain"], "mean_cone");
    assert!((num(&v, "hi") - 1.959_963_984_540_054).abs() < 1e-12);
    assert!((num(&v, "slope") - 1.959_963_984_540_054).abs() < 1e-12);

    let g = data_file("0\n");
    let v = json(&run(&[
        "interval", "mean-diff", "--sigma1", "1", "--sigma2", "1", "--data", f.to_str().unwrap(), "--data2",
        g.to_str().unwrap(), "--json",
    ]));
    assert!((num(&v, "hi") - 2f64.sqrt() * 1.959_963_984_540_054).abs() < 1e-12);
}

#[test]
fn json_round_trips_through_echoed_command() {
    let f = data_file("0.3\n1.9\n-0.7\n2.2\n");
    let p = f.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["interval", "variance", "--gamma", "0.9", "--estimator", "scaled:0.3", "--data", p, "--json"],
        vec!["interval", "variance-alpha-point", "--gamma", "0.99", "--data", p, "--json"],
        vec!["interval", "mean-t", "--data", p, "--json"],
        vec!["interval", "mean-known-sigma", "--sigma", "0.7", "--gamma", "0.8", "--data", p, "--json"],
        vec!["interval", "mean-diff", "--sigma1", "2", "--sigma2", "0.5", "--data", p, "--data2", p, "--json"],
        vec!["mle", "--constraint", "fixed-mu:-1.25", "--data", p, "--json"],
        vec!["coverage", "--case", "mean-t", "--n", "3", "--trials", "5000", "--seed", "9", "--json"],
        vec!["reproduce", "--json"],
    ];
    for args in runs {
        let first = run(&args);
        let v = json(&first);
        let echoed = v["command"].as_str().unwrap().to_string();
        let again = run(&echoed.split_whitespace().collect::<Vec<_>>());
        assert_eq!(stdout(&first), stdout(&again), "{args:?}");
    }
}

#[test]
fn mle_command() {
    let f = data_file("1\n2\n3\n");
    let p = f.to_str().unwrap();
    let v = json(&run(&["mle", "--constraint", "full", "--data", p, "--json"]));
    assert_eq!(num(&v, "mu"), 2.0);
    assert!((num(&v, "sigma") - 0.816_496_580_927_726).abs() < 1e-15);
    let v = json(&run(&["mle", "--constraint", "fixed-mu:0", "--data", p, "--json"]));
    assert!((num(&v, "sigma") - 2.160_246_899_469_287).abs() < 1e-15);
    let text = stdout(&run(&["mle", "--data", p]));
    assert!(text.contains("sigma: 0.816497\n"), "{text}");
}

#[test]
fn stdin_data() {
    let mut child = Command::new(BIN)
        .args(["interval", "mean-t", "--data", "-", "--json"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"1\n2\n3\n").unwrap();
    let o = child.wait_with_output().unwrap();
    let v = json(&o);
    assert_eq!(num(&v, "center"), 2.0);
}

#[test]
fn coverage_command() {
    let args = ["coverage", "--case", "mean-t", "--mu", "0", "--sigma", "1", "--n", "3", "--gamma", "0.95", "--trials", "100000", "--seed", "42", "--json"];
    let a = run(&args);
    let v = json(&a);
    assert!((num(&v, "fraction") - 0.95).abs() <= 0.0035);
    assert_eq!(v["within_tolerance"], true);
    assert_eq!(stdout(&a), stdout(&run(&args)));

    let threaded = Command::new(BIN).args(args).env("CI_DOMAIN_THREADS", "1").output().unwrap();
    assert_eq!(stdout(&a), stdout(&threaded));

    let one = json(&run(&["coverage", "--case", "variance", "--n", "3", "--trials", "1", "--json"]));
    let f = num(&one, "fraction");
    assert!(f == 0.0 || f == 1.0);

    let neg = json(&run(&["coverage", "--case", "mean-diff", "--mu", "-1.5", "--mu2", "2", "--sigma2", "3", "--n", "3", "--m", "4", "--trials", "20000", "--json"]));
    assert_eq!(neg["within_tolerance"], true);
}

#[test]
fn reproduce_table() {
    let o = run(&["reproduce"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0.00256"), "{text}");
    assert!(text.contains("0.02565"), "{text}");

    let v = json(&run(&["reproduce", "--json"]));
    let rows = v["rows"].as_array().unwrap();
    let row = |label: &str| rows.iter().find(|r| r["label"] == label).unwrap_or_else(|| panic!("no row {label}"));
    assert!((num(row("mle: exp(-eta)"), "computed") - 0.1849).abs() < 5e-4);
    assert!((num(row("alpha-point: chi2 upper point"), "computed") - 7.378).abs() < 1e-3);
    assert!((num(row("reconciling scale c = sqrt(chi0 chi_inf)/n"), "computed") - 0.2037).abs() < 1e-4);
    for r in rows {
        assert!(r["delta"].as_f64().is_some());
    }
}

#[test]
fn exit_codes() {
    let good = data_file("1\n2\n3\n");
    let g = good.to_str().unwrap();
    let constant = data_file("2\n2\n2\n");
    let c = constant.to_str().unwrap();
    let malformed = data_file("1\nfoo\n");
    let m = malformed.to_str().unwrap();
    let empty = data_file("# nothing\n");
    let e = empty.to_str().unwrap();

    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec![], 2),
        (vec!["bogus"], 2),
        (vec!["interval", "variance"], 2),
        (vec!["interval", "mean-known-sigma", "--data", g], 2),
        (vec!["interval", "mean-diff", "--sigma1", "1", "--sigma2", "1", "--data", g], 2),
        (vec!["interval", "variance", "--gamma", "1.5", "--data", g], 2),
        (vec!["interval", "variance", "--gamma", "0.3", "--data", g], 2),
        (vec!["interval", "variance", "--estimator", "median", "--data", g], 2),
        (vec!["interval", "variance", "--estimator", "scaled:-2", "--data", g], 2),
        (vec!["interval", "mean-known-sigma", "--sigma", "-1", "--data", g], 2),
        (vec!["interval", "mean-t", "--data", m], 2),
        (vec!["interval", "mean-t", "--data", e], 2),
        (vec!["interval", "mean-t", "--data", "/nonexistent/file"], 2),
        (vec!["interval", "mean-t", "--data", c], 3),
        (vec!["interval", "variance", "--data", c], 3),
        (vec!["interval", "variance-alpha-point", "--data", c], 3),
        (vec!["mle", "--data", c], 3),
        (vec!["mle", "--constraint", "fixed-sigma:0", "--data", g], 2),
        (vec!["coverage", "--case", "mean-t"], 2),
        (vec!["coverage", "--case", "mean-t", "--n", "1", "--trials", "10"], 2),
        (vec!["coverage", "--case", "mean-t", "--n", "3", "--trials", "0"], 2),
        (vec!["coverage", "--case", "mean-t", "--n", "3", "--sigma", "0"], 2),
        (vec!["interval", "mean-t", "--data", g], 0),
        (vec!["--help"], 0),
    ];
    for (args, code) in cases {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        if code != 0 {
            assert!(!o.stderr.is_empty(), "{args:?} gave no diagnostic");
        }
    }

    let bad_env = Command::new(BIN)
        .args(["coverage", "--case", "mean-t", "--n", "3", "--trials", "10"])
        .env("CI_DOMAIN_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn help_documents_data_format() {
    let text = stdout(&run(&["--help"]));
    assert!(text.contains("one decimal number per line"));
    assert!(text.contains("'-'"));
}
