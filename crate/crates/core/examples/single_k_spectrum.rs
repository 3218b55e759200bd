//! One initial crystal momentum through the whole chain: propagation,
//! Ehrenfest check, spectrum and harmonic yields.
//!
//!     cargo run --release --example single_k_spectrum -- [U0] [k0_frac]

use std::path::Path;

use kp_hhg::config::KMode;
use kp_hhg::io::write_file;
use kp_hhg::observables::ehrenfest_deviation;
use kp_hhg::run::{norm_drift, propagate_k, run_hhg};
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = RunConfig::with_u0(args.next().map_or(0.6, |s| s.parse().expect("U0")));
    cfg.k0_frac = args.next().map_or(1.0, |s| s.parse().expect("k0_frac"));

    let p = propagate_k(&cfg, cfg.k0())?;
    println!("{} steps, norm drift {:.2e}", p.record.times.len() - 1, norm_drift(&p.record));
    println!("Ehrenfest vs velocity-current derivative: {:.2e}", ehrenfest_deviation(&p.record));
    println!("largest cutoff population {:.2e}", p.max_edge_population);

    let run = run_hhg(&cfg, KMode::Single)?;
    let spec = run.spectrum.truncated(cfg.max_order);
    write_file(Path::new("out/single_k_spectrum/spectrum.csv"), &spec.to_csv(&cfg.header()))?;
    for q in 1..=15 {
        let y = run.spectrum.harmonic_yield(q as f64, cfg.half_width)?;
        let peak = run.spectrum.harmonic_peak_position(q as f64, cfg.half_width)?;
        println!("H{q:<2} yield {y:9.3e}  peak {:.3}{}", peak.order, if peak.edge { " (flank)" } else { "" });
    }
    Ok(())
}
