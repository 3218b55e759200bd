//! HH9 linewidth for a short and a long pulse at the same well depth.
//!
//!     cargo run --release --example duration_contrast

use kp_hhg::run::run_hhg;
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    for fwhm in [12.5, 25.0, 50.0, 75.0] {
        let mut cfg = RunConfig::with_u0(0.6);
        cfg.fwhm_fs = fwhm;
        let spec = run_hhg(&cfg, cfg.k_mode)?.spectrum;
        let w = spec.linewidth(9.0, cfg.half_width)?;
        let p = spec.harmonic_peak_position(9.0, cfg.half_width)?;
        println!("{fwhm:5.1} fs: HH9 at {:.3}, FWHM {w:.4} orders", p.order);
    }
    Ok(())
}
