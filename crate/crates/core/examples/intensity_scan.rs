//! Zone-integrated HH9 / HH10 yields against peak intensity.
//!
//!     cargo run --release --example intensity_scan -- [nk]

use std::path::Path;

use kp_hhg::io::write_file;
use kp_hhg::scan::run_intensity_scan;
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let mut cfg = RunConfig::with_u0(0.6);
    cfg.nk = std::env::args().nth(1).map_or(11, |s| s.parse().expect("nk"));
    let e0: Vec<f64> = (1..=8).map(|i| 0.001 * i as f64).collect();
    let curves = run_intensity_scan(&cfg, &e0, None)?;
    write_file(Path::new("out/intensity_scan/yields.csv"), &curves.to_csv(&cfg.header()))?;
    for (i, e) in curves.e0.iter().enumerate() {
        print!("E0 {e:.3}  I {:.2e} W/cm^2", curves.intensity[i]);
        for (h, q) in curves.harmonics.iter().enumerate() {
            print!("  H{q} {:.3e}", curves.yields[h][i]);
        }
        println!();
    }
    Ok(())
}
