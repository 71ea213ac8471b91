//! Golden-file and exit-code tests for the `aaphase` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn config(name: &str) -> PathBuf {
    manifest().join("configs").join(format!("{name}.toml"))
}

/// Run the binary and return its exit code and the report it wrote.
fn run(args: &[&str], config: &Path, dir: &TempDir) -> (i32, String) {
    let out = dir.path().join("report.txt");
    let _ = std::fs::remove_file(&out);
    let status = Command::new(env!("CARGO_BIN_EXE_aaphase"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(&out)
        .status()
        .expect("binary runs");
    (status.code().expect("exit code"), std::fs::read_to_string(&out).unwrap_or_default())
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(manifest().join("tests/golden").join(name)).unwrap()
}

#[test]
fn analyze_matches_golden_reports() {
    let dir = TempDir::new().unwrap();
    for model in ["spin_half", "free_field", "raw_spectrum", "two_mirror", "three_mirror_decoupled"] {
        let (code, body) = run(&["analyze"], &config(model), &dir);
        assert_eq!(code, 0, "{model}");
        assert_eq!(body, golden(&format!("analyze_{model}.txt")), "{model}");
    }
}

#[test]
fn constrain_matches_golden_table() {
    let dir = TempDir::new().unwrap();
    let (code, body) = run(&["constrain"], &config("constrain"), &dir);
    assert_eq!(code, 0);
    assert_eq!(body, golden("constrain.txt"));
}

#[test]
fn spin_half_report_values() {
    let dir = TempDir::new().unwrap();
    let (_, body) = run(&["analyze"], &config("spin_half"), &dir);
    let report = aaphase::report::parse_phase_report(&body).unwrap();
    assert!((report.gamma - std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(report.phi.exact.unwrap().to_string(), "1");
}

#[test]
fn verify_passes_on_consistent_models() {
    let dir = TempDir::new().unwrap();
    for model in ["spin_half", "free_field", "raw_spectrum", "two_mirror", "three_mirror_decoupled", "dense_matrix"] {
        let (code, body) = run(&["verify"], &config(model), &dir);
        assert_eq!(code, 0, "{model}\n{body}");
        assert!(body.ends_with("verdict: pass\n"), "{model}\n{body}");
    }
}

#[test]
fn verify_flags_wrong_closed_form() {
    let dir = TempDir::new().unwrap();
    let (code, body) = run(&["verify"], &config("two_mirror_wrong_p"), &dir);
    assert_eq!(code, 1);
    assert!(body.lines().any(|l| l.ends_with("|fail")));
    assert!(body.ends_with("verdict: fail\n"));
}

#[test]
fn incommensurable_spectrum_exits_2() {
    let dir = TempDir::new().unwrap();
    for cmd in ["analyze", "verify"] {
        let (code, body) = run(&[cmd], &config("raw_spectrum_sqrt2"), &dir);
        assert_eq!(code, 2, "{cmd}");
        assert!(body.contains("incommensurable"), "{body}");
    }
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(&["analyze"], &missing, &dir).0, 64);

    let single = dir.path().join("single.toml");
    std::fs::write(&single, "model = \"raw_spectrum\"\n[raw_spectrum]\nvalues = [\"2\"]\n").unwrap();
    assert_eq!(run(&["constrain"], &single, &dir).0, 64);

    let two_models = dir.path().join("two.toml");
    std::fs::write(
        &two_models,
        "model = \"spin_half\"\n[spin_half]\nmu_B0 = 1.0\ntheta = 1.0\n[free_field]\nomega = 1.0\nalpha = \"1+0i\"\ntruncation = 10\n",
    )
    .unwrap();
    assert_eq!(run(&["analyze"], &two_models, &dir).0, 64);

    let status = Command::new(env!("CARGO_BIN_EXE_aaphase")).arg("analyze").status().unwrap();
    assert_eq!(status.code(), Some(64));
}

#[test]
fn oracle_without_return_exits_3() {
    let dir = TempDir::new().unwrap();
    // A period of 2 pi cannot be found before t = 1.
    let (code, _) = run(&["verify", "--t-max", "1"], &config("spin_half"), &dir);
    assert_eq!(code, 3);
}

#[test]
fn command_line_overrides_config() {
    let dir = TempDir::new().unwrap();
    let (_, body) = run(&["constrain", "--n-range", "2"], &config("constrain"), &dir);
    assert!(body.contains("n_range: 2\n"));
    assert!(body.contains("candidates: 4\n"), "{body}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    for (cmd, model) in [("analyze", "two_mirror"), ("verify", "spin_half"), ("constrain", "constrain"), ("verify", "dense_matrix")] {
        let a = run(&[cmd], &config(model), &dir).1;
        let b = run(&[cmd], &config(model), &dir).1;
        assert!(!a.is_empty());
        assert_eq!(a, b, "{cmd} {model}");
    }
}

#[test]
fn constrain_irrational_ratio_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("irr.toml");
    std::fs::write(&cfg, "model = \"raw_spectrum\"\n[raw_spectrum]\nvalues = [\"1\", \"1.4142135623730951\"]\n").unwrap();
    assert_eq!(run(&["constrain"], &cfg, &dir).0, 2);
}

#[test]
fn constrain_recovers_spin_half_loop() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("spin.toml");
    std::fs::write(&cfg, "model = \"raw_spectrum\"\n[raw_spectrum]\nvalues = [\"1\", \"-1\"]\n").unwrap();
    let (code, body) = run(&["constrain"], &cfg, &dir);
    assert_eq!(code, 0);
    let first = body.lines().skip_while(|l| !l.starts_with("n|m|")).nth(1).unwrap();
    assert!(first.contains("|1 π|1/2 · 2πℏ/unit|"), "{first}");
}
