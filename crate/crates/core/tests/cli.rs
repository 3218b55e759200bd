use std::path::Path;
use std::process::{Command, Output};

fn hhg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hhg"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bands_writes_tables_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhg(&["bands", "--set", "U0=0.6", "--set", "nk=11"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    assert!(text.starts_with("# kp-hhg"));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 12);
    assert!(dir.path().join("potential.csv").exists());
    assert!(dir.path().join("manifest.toml").exists());
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "U0 = 0.3\nn_waves = 15\nkrylov = 8\n").unwrap();
    let o = hhg(&["pulse", "--config", cfg.to_str().unwrap(), "--set", "fwhm_fs=5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    assert!(manifest.contains("fwhm_fs = 5"));
    assert!(manifest.contains("n_waves = 15"));
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhg(&["bands", "--set", "U0=0.6", "--set", "n_waves=20"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_waves must be odd"));
    assert_eq!(hhg(&["bands"], dir.path()).status.code(), Some(1));
    assert_eq!(hhg(&["bands", "--set", "U0=-1"], dir.path()).status.code(), Some(1));
    assert_eq!(hhg(&["bands", "--set", "U0=0.6", "--set", "colour=red"], dir.path()).status.code(), Some(1));
    assert_eq!(hhg(&["frobnicate"], dir.path()).status.code(), Some(1));
}

#[test]
fn missing_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhg(&["overlay", "--set", "U0=0.6", "--bands", "/definitely/not/here.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = hhg(&["bands", "--config", "/definitely/not/here.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn crossing_found_and_absent_both_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let o = hhg(&["crossing", "--set", "U0=0.6"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("crossing at U0"));
    let o = hhg(&["crossing", "--set", "U0=0.6", "--set", "u0_min=0.0", "--set", "u0_max=0.1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no crossing"));
}

#[test]
fn overlay_from_external_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    std::fs::write(
        &table,
        "# measured\nangle_deg,b1_eV,b2_eV,b3_eV,b4_eV\n90,-5,0,13.0,14.5\n0,-5,0,13.5,15.5\n",
    )
    .unwrap();
    let o = hhg(&["overlay", "--set", "U0=0.6", "--bands", table.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("overlay.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "angle_deg,cb1_vb_eV,cb2_vb_eV,cb2_vb_minus_omega_eV");
    assert!(rows[1].starts_with("0,13.5,15.5,"));

    std::fs::write(&table, "angle_deg,b1_eV,b2_eV,b3_eV,b4_eV\n0,-5,,13.5,15.5\n").unwrap();
    let o = hhg(&["overlay", "--set", "U0=0.6", "--bands", table.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("b2_eV"));
}

#[test]
fn short_scan_then_render() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "scan", "--set", "U0=0.6", "--set", "fwhm_fs=3", "--set", "formats=['csv','svg']",
        "--axis", "U0", "--values", "0.4,0.6",
    ];
    let o = hhg(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("2 points, 0 resumed, 0 failed"));
    assert!(dir.path().join("heatmap.svg").exists());
    let again = hhg(&args, dir.path());
    assert!(stdout(&again).contains("2 points, 2 resumed"));

    let heat = dir.path().join("heatmap.csv");
    let r = hhg(&["render", "--set", "U0=0.6", "--heatmap", heat.to_str().unwrap()], &dir.path().join("r"));
    assert_eq!(r.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("r/heatmap.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}
