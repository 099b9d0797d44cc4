use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");

fn bsvsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsvsim")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bsvsim-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn single() -> String {
    format!("{CONFIGS}/single_crystal.toml")
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect()
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(bsvsim(&[]).status.code(), Some(2));
    assert_eq!(bsvsim(&["spectrum"]).status.code(), Some(2));
    let missing = bsvsim(&["spectrum", "--config", "/nonexistent/x.toml"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn invalid_config_names_the_field() {
    let dir = scratch("badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.toml");
    std::fs::write(
        &cfg,
        "gain = 1.0\n[pump]\nwavelength_nm = 354.7\nfwhm_um = 120.0\n[[segment]]\nkind = \"crystal\"\nlength_mm = 1.0\n[[segment]]\nkind = \"gap\"\nlength_mm = 2.0\nwalkoff_mrad = 3.0\n",
    )
    .unwrap();
    let out = bsvsim(&["modes", "--config", cfg.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("segment[1].walkoff_mrad"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn gain_scan_range_checks() {
    let dir = scratch("scan");
    let out = dir.to_str().unwrap();
    let small = ["--grid-points", "48", "--n-max", "24"];
    let cfg = single();
    let bad = bsvsim(&[&["gain-scan", "--config", &cfg, "--out", out, "--g-min", "3", "--g-max", "1"][..], &small[..]].concat());
    assert_eq!(bad.status.code(), Some(2));
    let zero = bsvsim(&[&["gain-scan", "--config", &cfg, "--out", out, "--n-steps", "0"][..], &small[..]].concat());
    assert_eq!(zero.status.code(), Some(2));
    let one = bsvsim(&[&["gain-scan", "--config", &cfg, "--out", out, "--n-steps", "1", "--g-min", "2"][..], &small[..]].concat());
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    let rows = data_rows(&dir.join("gain_scan.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("2.000000000000e0,"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn spectrum_writes_header_and_manifest() {
    let dir = scratch("spectrum");
    let out = bsvsim(&["spectrum", "--config", &single(), "--out", dir.to_str().unwrap(), "--grid-points", "48", "--n-max", "24", "--gain", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("spectrum_g2.csv")).unwrap();
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header[0].starts_with("# bsvsim "));
    assert!(header.iter().any(|l| l.starts_with("# config_sha256: ") && l.len() == "# config_sha256: ".len() + 64));
    assert!(header.iter().any(|l| l.starts_with("# grid: n_points=48 n_max=24")));
    assert!(header.iter().any(|l| *l == "# normalization: max1"));
    let rows = data_rows(&dir.join("spectrum_g2.csv"));
    let peak = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert_eq!(peak, 1.0);
    let manifest = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("subcommand = \"spectrum\""));
    assert!(manifest.contains("snapshot = '''"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn numerical_failures_exit_with_3() {
    let dir = scratch("numerical");
    let out = dir.to_str().unwrap();
    let trunc = bsvsim(&["oracle-check", "--r", "1.5", "--cutoff", "5", "--out", out]);
    assert_eq!(trunc.status.code(), Some(3));
    // Too few harmonics for the default loss tolerance.
    let harm = bsvsim(&["modes", "--config", &single(), "--out", out, "--grid-points", "32", "--n-max", "2"]);
    assert_eq!(harm.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&harm.stderr).contains("numerical failure"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn oracle_check_passes_at_moderate_squeezing() {
    let dir = scratch("oracle");
    let out = bsvsim(&["oracle-check", "--r", "0.5,1.0", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = data_rows(&dir.join("oracle_check.csv"));
    assert!(!rows.is_empty());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn off_grid_reference_angle_is_a_usage_error() {
    let dir = scratch("offgrid");
    let out = bsvsim(&["variance-diff", "--config", &single(), "--out", dir.to_str().unwrap(), "--grid-points", "48", "--n-max", "24", "--theta0", "3.01"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}
