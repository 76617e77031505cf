use std::path::Path;
use std::process::{Command, Output};

fn wks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wks")).args(args).env("WKS_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

const BASE: [&str; 5] = ["--omega", "1", "--lambda", "0.75", "--gaussian"];

fn with_base<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(BASE.iter()).chain(tail.iter()).copied().collect()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(wks(&["--help"]).status.code(), Some(0));
    let v = wks(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_one() {
    let o = wks(&["bound", "ms", "--lambda", "0.75", "--n", "8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--omega"));
    assert_eq!(wks(&["bound", "ms", "--bogus"]).status.code(), Some(1));
    assert_eq!(wks(&["frobnicate"]).status.code(), Some(1));
    // --gaussian conflicts with a non-Gaussian family.
    let o = wks(&with_base(&["bound", "lp"], &["--family", "power:alpha=1.5", "--n", "8", "--p", "2", "--eps", "1"]));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn header_echoes_sorted_config() {
    let o = wks(&with_base(&["bound", "ms"], &["--n", "8", "--t", "0.5"]));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# wks {}", env!("CARGO_PKG_VERSION")));
    assert_eq!(lines.next().unwrap(), "# command: bound ms");
    let keys: Vec<&str> =
        text.lines().filter_map(|l| l.strip_prefix("# ")).filter(|l| l.contains('=') && !l.contains(' ')).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(keys.contains(&"sampling.omega=1"));
    assert_eq!(body(&o)[0], "t,bound,oracle,admissible");
}

#[test]
fn gate_violation_exits_two() {
    // omega*t/(pi*n) = 10/(pi*2) > 1: no z in (0, 1) is admissible.
    let o = wks(&with_base(&["bound", "ms"], &["--n", "2", "--T", "10", "--t", "10"]));
    assert_eq!(o.status.code(), Some(2));
    let o = wks(&with_base(&["bound", "uniform"], &["--n", "2", "--T", "10", "--eps", "1"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unsatisfiable_exits_three() {
    let o = wks(&with_base(&["min-terms", "lp"], &["--p", "2", "--eps", "1e-9", "--delta", "1e-9", "--cap", "100"]));
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsatisfiable"));
}

#[test]
fn min_terms_lp_is_minimal() {
    let o = wks(&with_base(&["min-terms", "lp"], &["--p", "2", "--eps", "0.1", "--delta", "0.05"]));
    assert_eq!(o.status.code(), Some(0));
    let row = &body(&o)[1];
    let n: u64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!(row.ends_with(",true"));
    let prev = wks(&with_base(
        &["bound", "lp"],
        &["--p", "2", "--eps", "0.1", "--delta", "0.05", "--n", &(n - 1).to_string()],
    ));
    assert!(body(&prev)[1].ends_with(",false"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# test\nsampling.omega = 1\nprocess.lambda = 0.75\nsampling.n = 8\nsampling.t = 0.5\n")
        .unwrap();
    let cfg = cfg.to_str().unwrap();
    let a = wks(&["bound", "ms", "--config", cfg]);
    assert_eq!(a.status.code(), Some(0));
    let b = wks(&["bound", "ms", "--config", cfg, "--n", "16"]);
    assert!(stdout(&b).contains("# sampling.n=16"));
    assert_ne!(body(&a), body(&b));
    std::fs::write(dir.path().join("bad.conf"), "no.such.key = 1\n").unwrap();
    let bad = wks(&["bound", "ms", "--config", dir.path().join("bad.conf").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("trials.csv");
    let json = dir.path().join("summary.json");
    let args =
        with_base(&["simulate"], &["--n", "4", "--eps", "0.02", "--seed", "9", "--trials", "300", "--metric", "sup"]);
    let mut full = args.clone();
    full.extend(["--dump", dump.to_str().unwrap(), "--summary-json", json.to_str().unwrap()]);
    let a = wks(&full);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let one = Command::new(env!("CARGO_BIN_EXE_wks")).args(&args).env("WKS_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, one.stdout);
    let trials = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(trials.lines().filter(|l| !l.starts_with('#')).count(), 301);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary["trials"], 300);
    assert_eq!(summary["seed"], 9);
    assert_eq!(summary["config"]["sampling.n"], "4");
}

#[test]
fn simulate_requires_seed() {
    let o = wks(&with_base(&["simulate"], &["--n", "4", "--eps", "0.1"]));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_writes_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let gp = dir.path().join("fig1.gp");
    let o = wks(&with_base(
        &["sweep", "fig1"],
        &[
            "--p",
            "2",
            "--eps-range",
            "0.1:1:3",
            "--delta-range",
            "0.1:0.9:2",
            "--out",
            out.to_str().unwrap(),
            "--plot-script",
            gp.to_str().unwrap(),
        ],
    ));
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 7);
    let script = std::fs::read_to_string(&gp).unwrap();
    assert!(script.contains(out.to_str().unwrap()));
    assert!(Path::new(&gp).exists());
}

#[test]
fn reconstruct_interpolates_samples() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    std::fs::write(&samples, "k,value\n-1,0.5\n0,2\n1,-1\n").unwrap();
    let o =
        wks(&["reconstruct", "--omega", "1", "--lambda", "0.75", "--samples", samples.to_str().unwrap(), "--t", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(body(&o)[1], "0,2");
}

#[test]
fn verify_passes_on_default_scenario() {
    let o = wks(&with_base(&["verify"], &["--seed", "1", "--trials", "500"]));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(body(&o).iter().skip(1).all(|l| l.contains(",PASS,")));
}
