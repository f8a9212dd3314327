use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fractsurf"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fractsurf-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn validate_prints_the_certificate() {
    let out = bin()
        .args(["validate", "--fixture", "example2a"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("configuration valid"));
    assert!(text.contains("c_s_cell=(2,2)"));
    assert_eq!(text.matches("method=analytic").count(), 12);
}

#[test]
fn config_file_overlays_fixture_and_flags_override() {
    let dir = scratch("overlay");
    let cfg = dir.join("job.json");
    std::fs::write(&cfg, r#"{"solver": {"resolution": 9, "tol": 1e-9, "max_iter": 10}, "output": {"dir": "results"}}"#).unwrap();
    let out = bin()
        .args(["surface", "--fixture", "flat-2x2", "--config"])
        .arg(&cfg)
        .args(["--resolution", "17", "--seed", "5"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // relative output directories are taken from the config file's folder
    let csv = std::fs::read_to_string(dir.join("results/heightmap.csv")).unwrap();
    assert!(csv.starts_with("resolution,x_min,x_max,y_min,y_max\n17,0,1,0,1\n"));
    assert_eq!(csv.lines().count(), 2 + 17);
    let xyz = std::fs::read_to_string(dir.join("results/chaos.xyz")).unwrap();
    assert_eq!(xyz.lines().count(), 100_000);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn build_writes_certificate_and_resolved_config() {
    let dir = scratch("build");
    let out = bin()
        .args(["build", "--fixture", "zero-scaling-explicit", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let cert = std::fs::read_to_string(dir.join("certificate.txt")).unwrap();
    assert!(cert.contains("c_s=0\n"));
    assert!(cert.contains("blend=explicit"));
    let cfg = std::fs::read_to_string(dir.join("config.json")).unwrap();
    let parsed = fractsurf::config::parse_config(&cfg, None).unwrap();
    assert_eq!(parsed.solver.resolution, 257);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn dimension_writes_counts_and_report() {
    let dir = scratch("dim");
    let out = bin()
        .args(["dimension", "--fixture", "bilinear-2x2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("dimension.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("delta,count"));
    assert_eq!(lines.count(), 5);
    let report = std::fs::read_to_string(dir.join("dimension.txt")).unwrap();
    // bilinear data is linear along every knot line, so no band applies
    assert!(report.starts_with("applicable=false\n"), "{report}");
    assert!(report.contains("\ncase=inapplicable\n"), "{report}");
    let estimate: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("empirical_estimate="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((estimate - 2.0).abs() < 0.05, "{estimate}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = scratch("bad");
    let cfg = dir.join("job.json");
    std::fs::write(&cfg, r#"{"grid": {}, "scaling": [], "boundry": {}}"#).unwrap();
    let out = bin()
        .arg("validate")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("boundry: unknown key"), "{err}");
    assert!(err.contains("boundary: missing required key"), "{err}");

    let out = bin()
        .args(["validate", "--fixture", "nope"])
        .output()
        .unwrap();
    assert!(!out.status.success());

    let out = bin()
        .args([
            "surface",
            "--fixture",
            "example2a",
            "--resolution",
            "100",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("resolution"));

    let out = bin().arg("validate").output().unwrap();
    assert!(!out.status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}
