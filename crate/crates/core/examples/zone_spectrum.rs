//! Zone-integrated spectra for a deep and an almost empty lattice.
//!
//!     cargo run --release --example zone_spectrum -- [nk]

use std::path::Path;

use kp_hhg::config::KMode;
use kp_hhg::io::write_file;
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let nk: usize = std::env::args().nth(1).map_or(21, |s| s.parse().expect("nk"));
    for u0 in [0.6, 0.01] {
        let mut cfg = RunConfig::with_u0(u0);
        cfg.nk = nk;
        let start = std::time::Instant::now();
        let run = kp_hhg::run::run_hhg(&cfg, KMode::Bz)?;
        let spec = run.spectrum.truncated(cfg.max_order);
        write_file(
            &Path::new("out/zone_spectrum").join(format!("spectrum_U0={u0}.csv")),
            &spec.to_csv(&cfg.header()),
        )?;
        println!("U0 = {u0}: {} k-points in {:.1} s", run.k_points.len(), start.elapsed().as_secs_f64());
        for q in [9, 10] {
            println!("  H{q} yield {:.3e}", run.spectrum.harmonic_yield(q as f64, cfg.half_width)?);
        }
    }
    Ok(())
}
