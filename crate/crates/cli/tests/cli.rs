//! End-to-end tests of the command-line interface: exit codes, file
//! formats, determinism, and the config round trip.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seeplab"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("seeplab-test-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn eigen_summary_contains_beta_quarter() {
    let dir = tmp_dir("eigen");
    run_ok(&["eigen", "--ratio", "1.0", "--out", dir.to_str().unwrap()]);
    let summary = read(&dir.join("summary.txt"));
    let beta: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("beta = "))
        .expect("summary has beta")
        .parse()
        .unwrap();
    assert!((beta - 0.25).abs() <= 5e-4, "beta = {beta}");
    assert!(summary.contains("tool_version = "));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let d1 = tmp_dir("det1");
    let d2 = tmp_dir("det2");
    let args = |d: &Path| {
        vec![
            "dipole".to_string(),
            "--ratio".into(),
            "0.5".into(),
            "--grid-n".into(),
            "64".into(),
            "--t-end".into(),
            "0.5".into(),
            "--series-len".into(),
            "20".into(),
            "--snapshots".into(),
            "0.3,0.5".into(),
            "--out".into(),
            d.display().to_string(),
        ]
    };
    run_ok(&args(&d1).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    run_ok(&args(&d2).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    for file in ["series.csv", "snapshots.csv"] {
        assert_eq!(
            fs::read(d1.join(file)).unwrap(),
            fs::read(d2.join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
    // summaries differ only in the out directory, so compare them with
    // the config.out line stripped
    let strip = |p: &Path| {
        read(&p.join("summary.txt"))
            .lines()
            .filter(|l| !l.starts_with("config.out"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&d1), strip(&d2));
}

#[test]
fn series_csv_has_the_specified_columns() {
    let dir = tmp_dir("columns");
    run_ok(&[
        "dipole",
        "--grid-n",
        "64",
        "--t-end",
        "0.3",
        "--series-len",
        "10",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let series = read(&dir.join("series.csv"));
    assert!(
        series.starts_with("time,x_left,x_right,max_height,mass,dipole_moment,left_flux\n"),
        "unexpected header: {}",
        series.lines().next().unwrap()
    );
    let snapshots = read(&dir.join("snapshots.csv"));
    assert!(snapshots.starts_with("snapshot_time,x,h\n"));
}

#[test]
fn config_echo_reparses_to_the_same_run() {
    let dir = tmp_dir("roundtrip");
    run_ok(&[
        "drainage",
        "--ratio",
        "0.5",
        "--grid-n",
        "101",
        "--domain-length",
        "3.0",
        "--t-end",
        "0.2",
        "--flux",
        "0.05",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let summary = read(&dir.join("summary.txt"));
    // extract the echo into a config file and run from it alone
    let mut config_text = String::new();
    for line in summary.lines() {
        if let Some(rest) = line.strip_prefix("config.") {
            if !rest.starts_with("out") {
                config_text.push_str(rest);
                config_text.push('\n');
            }
        }
    }
    let cfg_path = dir.join("echo.cfg");
    fs::write(&cfg_path, &config_text).unwrap();
    let dir2 = tmp_dir("roundtrip2");
    run_ok(&[
        "drainage",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        dir2.to_str().unwrap(),
    ]);
    assert_eq!(
        fs::read(dir.join("series.csv")).unwrap(),
        fs::read(dir2.join("series.csv")).unwrap(),
        "echoed config must reproduce the run"
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tmp_dir("override");
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("run.cfg");
    fs::write(&cfg_path, "problem = eigen\nratio = 0.5\n").unwrap();
    run_ok(&[
        "eigen",
        "--config",
        cfg_path.to_str().unwrap(),
        "--ratio",
        "1.0",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let summary = read(&dir.join("summary.txt"));
    assert!(
        summary.contains("config.ratio = 1"),
        "flag did not win over the file"
    );
}

#[test]
fn exit_codes_for_bad_configs() {
    // out-of-range value
    let out = bin().args(["eigen", "--ratio", "1.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error: code=2"), "stderr: {stderr}");
    assert_eq!(stderr.lines().count(), 1, "diagnostic must be one line");
    // unknown key
    let out = bin().args(["eigen", "--no-such", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown problem
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // malformed config file line
    let dir = tmp_dir("badcfg");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "ratio 0.5\n").unwrap();
    let out = bin()
        .args(["eigen", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.cfg:1"), "diagnostic lacks location: {stderr}");
}

#[test]
fn exit_code_for_domain_exhaustion() {
    // the front reaches the wall of a deliberately short domain
    let out = bin()
        .args([
            "drainage",
            "--grid-n",
            "64",
            "--domain-length",
            "1.5",
            "--offset",
            "0.4",
            "--width",
            "1.0",
            "--t-end",
            "5",
            "--out",
            tmp_dir("wall").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "geometry exhaustion maps to config");
}

#[test]
fn sweep_writes_one_row_per_ratio_and_subdirectories() {
    let dir = tmp_dir("sweep");
    run_ok(&[
        "sweep",
        "--ratios",
        "1.0,0.5",
        "--grid-n",
        "100",
        "--t-end",
        "5",
        "--series-len",
        "60",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let summary = read(&dir.join("summary.txt"));
    assert!(summary.contains("row_0 = ratio=1 "), "{summary}");
    assert!(summary.contains("row_1 = ratio=0.5 "), "{summary}");
    assert!(dir.join("ratio_1/series.csv").exists());
    assert!(dir.join("ratio_0.5/series.csv").exists());
}

#[test]
fn flood_drain_reports_finite_extinction() {
    let dir = tmp_dir("flood");
    run_ok(&[
        "flood-drain",
        "--ratio",
        "0.5",
        "--grid-n",
        "201",
        "--domain-length",
        "3.0",
        "--t-switch",
        "0.5",
        "--t-end",
        "50",
        "--series-len",
        "60",
        "--flux",
        "2.0",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let summary = read(&dir.join("summary.txt"));
    let ext = summary
        .lines()
        .find_map(|l| l.strip_prefix("extinction_time = "))
        .expect("summary has extinction_time");
    let t: f64 = ext.parse().expect("extinction time is a number");
    assert!(t > 0.5 && t < 50.0, "extinction at {t}");
}

#[test]
fn analyze_fits_exponents_from_a_run_directory() {
    let dir = tmp_dir("analyze");
    run_ok(&[
        "dipole",
        "--ratio",
        "1.0",
        "--grid-n",
        "150",
        "--t-end",
        "20",
        "--series-len",
        "150",
        "--snapshots",
        "5,10,20",
        "--out",
        dir.to_str().unwrap(),
    ]);
    run_ok(&["analyze", "--out", dir.to_str().unwrap()]);
    let analysis = read(&dir.join("analysis.txt"));
    let beta: f64 = analysis
        .lines()
        .find_map(|l| l.strip_prefix("beta_from_xr = "))
        .expect("analysis has beta_from_xr")
        .parse()
        .unwrap();
    assert!((beta - 0.25).abs() < 0.03, "beta_from_xr = {beta}");
    assert!(analysis.contains("alpha_plus_2beta = "));
    assert!(analysis.contains("collapse_metric = "));
}

#[test]
fn validate_similarity_summary_carries_lambda_and_slopes() {
    let dir = tmp_dir("valsim");
    // desk-scale resolution: the acceptance suite runs the full one
    run_ok(&[
        "validate-similarity",
        "--beta",
        "0.2",
        "--grid-n",
        "401",
        "--t-end",
        "3",
        "--series-len",
        "80",
        "--snapshots",
        "2,3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let summary = read(&dir.join("summary.txt"));
    let get = |key: &str| -> f64 {
        summary
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("summary lacks {key}: {summary}"))
            .parse()
            .unwrap()
    };
    assert!((get("flux_exponent") + 1.4).abs() < 1e-12);
    let lambda = get("lambda");
    assert!(lambda > 0.0 && lambda < 1.0);
    let slope = get("xr_slope");
    assert!((slope - 0.2).abs() < 0.02, "xr slope {slope}");
}
