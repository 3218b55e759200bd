//! CB1 against the one-photon-down replica of CB2 across well depths:
//! every crossing, and how it moves when the gaps are taken off the zone edge.
//!
//!     cargo run --release --example coupled_gaps

use kp_hhg::floquet::{coupled_bandgap_scan, crossing_k_sensitivity, find_all_crossings, scan_to_csv, Crossing};
use kp_hhg::io::write_file;
use kp_hhg::units::au_to_ev;
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let cfg = RunConfig::with_u0(0.6);
    let grid = cfg.u0_grid(201);
    let rows = coupled_bandgap_scan(&cfg, &grid)?;
    write_file(std::path::Path::new("out/coupled_gaps/coupled_gaps.csv"), &scan_to_csv(&rows, &cfg.header()))?;

    println!("photon energy {:.4} eV", au_to_ev(cfg.omega0));
    for c in find_all_crossings(&rows) {
        if let Crossing::Found { u0, cb2_cb1, coupling, .. } = c {
            println!(
                "crossing: U0 = {u0:.4}, CB2-CB1 = {:.4} eV, |V| = {:.3} eV",
                au_to_ev(cb2_cb1),
                au_to_ev(coupling)
            );
        }
    }

    println!("gaps evaluated at k = f * pi/a:");
    for (f, c) in crossing_k_sensitivity(&cfg, &[1.0, 0.95, 0.9, 0.8, 0.6])? {
        match c {
            Crossing::Found { u0, cb2_cb1, .. } => {
                println!("  f = {f:.2}: U0 = {u0:.4}, CB2-CB1 at the edge {:.4} eV", au_to_ev(cb2_cb1))
            }
            Crossing::None => println!("  f = {f:.2}: no crossing"),
        }
    }
    Ok(())
}
