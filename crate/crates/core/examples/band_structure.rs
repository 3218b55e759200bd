//! Kronig-Penney bands on the zone grid, plus the gaps the rest of the
//! pipeline keys on.
//!
//!     cargo run --release --example band_structure -- [U0] [out_dir]

use std::f64::consts::PI;
use std::path::PathBuf;

use kp_hhg::bands::{bz_grid, solve_at, solve_bands, PlaneWaveBasis};
use kp_hhg::io::write_file;
use kp_hhg::lattice::LatticePotential;
use kp_hhg::units::au_to_ev;
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let mut args = std::env::args().skip(1);
    let u0: f64 = args.next().map_or(0.6, |s| s.parse().expect("U0"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/band_structure".into()));

    let cfg = RunConfig::with_u0(u0);
    let pot = LatticePotential::from_config(&cfg);
    let basis = PlaneWaveBasis::new(cfg.n_waves)?;
    let bands = solve_bands(&pot, &bz_grid(cfg.nk, cfg.a), &basis, 6)?;
    write_file(&out.join("bands.csv"), &bands.to_csv(&cfg.header()))?;
    write_file(&out.join("potential.csv"), &pot.to_csv(401, &cfg.header()))?;

    for (label, k) in [("Gamma", 0.0), ("pi/a", PI / cfg.a)] {
        let s = solve_at(&pot, k, &basis, 6)?;
        println!("{label}:");
        for n in 1..=6 {
            println!("  band {n}: {:9.4} eV", au_to_ev(s.energy(n)?));
        }
        println!(
            "  CB1-VB {:.3} eV, CB2-VB {:.3} eV, CB2-CB1 {:.3} eV, |p(CB1,CB2)| {:.3}",
            au_to_ev(s.gap(cfg.cb1_index, cfg.vb_index)?),
            au_to_ev(s.gap(cfg.cb2_index, cfg.vb_index)?),
            au_to_ev(s.gap(cfg.cb2_index, cfg.cb1_index)?),
            s.momentum(cfg.cb1_index, cfg.cb2_index)?.abs()
        );
    }
    println!("tables in {}", out.display());
    Ok(())
}
