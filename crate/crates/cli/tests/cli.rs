use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinned-gl"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn summary(dir: &Path, name: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("{name}.json"))).expect("summary written");
    serde_json::from_str(&text).expect("valid JSON")
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn help_exits_cleanly() {
    let out = Command::new(env!("CARGO_BIN_EXE_pinned-gl"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify"));
}

#[test]
fn unit_pinning_level_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["profile", "--a", "1.0"]);
    assert_eq!(code(&out), 2);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn bad_config_files_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "a = 0.25\nbogus = 3\n").unwrap();
    assert_eq!(
        code(&run(dir.path(), &["profile", "--config", cfg.to_str().unwrap()])),
        2
    );
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        code(&run(dir.path(), &["profile", "--config", missing.to_str().unwrap()])),
        2
    );
}

#[test]
fn config_file_overrides_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "a = 4.0\nepsilon = 0.04\n[grid]\nn_r = 512\n").unwrap();
    let out = run(
        dir.path(),
        &["profile", "--a", "0.25", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "profile");
    assert_eq!(s["a"], 4.0);
    assert_eq!(s["epsilon"], 0.04);
    assert_eq!(s["grid_nodes"], 512);
    assert!(s["gamma"].as_f64().unwrap() < 0.0);
}

#[test]
fn profile_writes_versioned_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["profile", "--grid", "1024"]);
    assert_eq!(code(&out), 0);
    let s = summary(dir.path(), "profile");
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["command"], "profile");
    assert!((s["gamma"].as_f64().unwrap() - 0.335410).abs() < 1e-6);
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout, s);
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,u,U_ref,residual"));
    assert_eq!(lines.count(), 1024);
}

#[test]
fn london_reports_the_attractor() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["london", "--a", "4", "--grid", "1024"])), 0);
    let s = summary(dir.path(), "london");
    assert_eq!(s["schema_version"], 1);
    assert!(s["k_eps"].as_f64().unwrap() > 0.0);
    assert!(s["j0"].as_f64().unwrap() > 0.0);
    assert!(s["attractor_kind"].is_string());
    let csv = fs::read_to_string(dir.path().join("london.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r,h,xi"));
}

#[test]
fn greens_rejects_sources_on_the_boundary() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["greens", "--mesh", "96x64", "--y", "0.999,0"]);
    assert_eq!(code(&out), 2);
    let ok = run(dir.path(), &["greens", "--mesh", "96x64", "--y", "0.3,0.1"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(summary(dir.path(), "greens")["schema_version"], 1);
}

#[test]
fn wmin_is_deterministic_for_a_seed() {
    let d1 = TempDir::new().unwrap();
    let d2 = TempDir::new().unwrap();
    for d in [&d1, &d2] {
        assert_eq!(
            code(&run(d.path(), &["wmin", "--a", "4", "--n", "3", "--seed", "5"])),
            0
        );
    }
    let (a, b) = (summary(d1.path(), "wmin"), summary(d2.path(), "wmin"));
    assert_eq!(a, b);
    assert_eq!(a["points"].as_array().unwrap().len(), 3);
}

#[test]
fn wmin_validates_its_arguments() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["wmin", "--n", "9"])), 2);
    assert_eq!(code(&run(dir.path(), &["wmin", "--n", "2", "--xi2", "-1"])), 2);
}

#[test]
fn verify_on_defaults_exits_zero() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["verify"]);
    let s = summary(dir.path(), "verify");
    assert_eq!(s["schema_version"], 1);
    let failing: Vec<String> = s["presets"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|p| {
            let a = p["a"].clone();
            p["checks"]
                .as_array()
                .unwrap()
                .iter()
                .filter(|c| c["pass"] == false)
                .map(move |c| format!("a={a} {}/{}: {}", c["module"], c["name"], c["detail"]))
        })
        .collect();
    assert_eq!(code(&out), 0, "failing checks: {failing:?}");
}
