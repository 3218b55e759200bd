//! Resumable U0 sweep written to disk: per-point spectra, an index, and a
//! log-PSD heatmap with the coupled gaps drawn on top. Run it twice; the
//! second run only reloads.
//!
//!     cargo run --release --example u0_heatmap -- [points] [fwhm_fs] [out_dir]

use std::path::PathBuf;

use kp_hhg::config::OutputFormat;
use kp_hhg::scan::{run_u0_scan, tracking_report};
use kp_hhg::units::ev_to_au;
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = RunConfig::with_u0(0.6);
    cfg.scan_points = args.next().map_or(11, |s| s.parse().expect("points"));
    cfg.fwhm_fs = args.next().map_or(12.5, |s| s.parse().expect("fwhm_fs"));
    cfg.formats = vec![OutputFormat::Csv, OutputFormat::Svg];
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/u0_heatmap".into()));

    let start = std::time::Instant::now();
    let result = run_u0_scan(&cfg, Some(&out))?;
    println!(
        "{} points ({} reloaded, {} failed) in {:.1} s",
        result.values.len(),
        result.resumed,
        result.failures.len(),
        start.elapsed().as_secs_f64()
    );
    let t = tracking_report(&result, 10, ev_to_au(0.5), ev_to_au(2.0));
    println!("HH10 vs upper gap: r = {:?} near the crossing, {:?} beyond 2 eV", t.r_coupling, t.r_far);
    println!("heatmap at {}", out.join("heatmap.svg").display());
    Ok(())
}
