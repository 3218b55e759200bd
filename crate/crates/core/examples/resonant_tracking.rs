//! Long-pulse U0 sweep: does the HH10 peak follow the upper coupled gap?
//!
//! Runs the sweep for a zone-edge and a zone-centre initial momentum and
//! prints the correlation near the crossing and far from it.
//!
//!     cargo run --release --example resonant_tracking -- [scan_points] [fwhm_fs]

use kp_hhg::scan::run_k0_comparison;
use kp_hhg::units::HARTREE_EV;
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let mut args = std::env::args().skip(1);
    let points: usize = args.next().map_or(41, |s| s.parse().expect("scan_points"));
    let fwhm: f64 = args.next().map_or(75.0, |s| s.parse().expect("fwhm_fs"));

    let mut cfg = RunConfig::with_u0(0.6);
    cfg.fwhm_fs = fwhm;
    cfg.scan_points = points;

    for entry in run_k0_comparison(&cfg, &[1.0, 0.0], 10, None)? {
        let t = entry.tracking;
        println!("k0 = {} pi/a", entry.k0_frac);
        if let kp_hhg::floquet::Crossing::Found { u0, cb2_cb1, .. } = t.crossing {
            println!("  crossing at U0 = {u0:.4}, gap {:.3} eV", cb2_cb1 * HARTREE_EV);
        }
        println!("  r near crossing: {:?} over {} points", t.r_coupling, t.n_coupling);
        println!("  r beyond 2 eV:   {:?} over {} points", t.r_far, t.n_far);
        for r in entry.result.ok() {
            let g = r.gap.expect("U0 sweep has gaps");
            println!(
                "  U0 {:.3}  cb2-cb1 {:6.3} eV  HH10 peak {:6.3}  upper gap {:6.3}  lower gap {:6.3}",
                r.value,
                g.cb2_cb1 * HARTREE_EV,
                r.peak(10).unwrap_or(f64::NAN),
                g.upper_vb / g.omega,
                g.lower_vb / g.omega
            );
        }
    }
    Ok(())
}
