//! Gap curves from an externally computed band table (here: a table the
//! model writes itself, relabelled as if it came from elsewhere), drawn on
//! top of a harmonic-order heatmap.
//!
//!     cargo run --release --example band_table_overlay -- [table.csv]

use std::path::Path;

use kp_hhg::bands::{bz_grid, solve_bands, PlaneWaveBasis};
use kp_hhg::floquet::overlay_curves;
use kp_hhg::io::{read_file, render_heatmap, write_file, BandTable, HeatmapMatrix, Overlay};
use kp_hhg::lattice::LatticePotential;
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let cfg = RunConfig::with_u0(0.6);
    let out = Path::new("out/band_table_overlay");
    let table = match std::env::args().nth(1) {
        Some(path) => BandTable::parse(&read_file(Path::new(&path))?)?,
        None => {
            let pot = LatticePotential::from_config(&cfg);
            let bands = solve_bands(&pot, &bz_grid(41, cfg.a), &PlaneWaveBasis::new(cfg.n_waves)?, 5)?;
            let text = bands.to_csv("# generated by the model\n");
            write_file(&out.join("table.csv"), &text)?;
            BandTable::parse(&text)?
        }
    };
    let curves = overlay_curves(&table, cfg.vb_index, cfg.cb1_index, cfg.cb2_index, cfg.omega0)?;
    write_file(&out.join("overlay.csv"), &curves.to_csv(&cfg.header()))?;

    // a flat backdrop so the curves are the only structure
    let orders: Vec<f64> = (0..=80).map(|i| 4.0 + 0.15 * i as f64).collect();
    let values = orders.iter().map(|_| vec![1.0; curves.abscissa.len()]).collect();
    let backdrop = HeatmapMatrix::new(&curves.abscissa_label, "order", curves.abscissa.clone(), orders, values)?;
    let as_orders = |v: &[f64]| curves.abscissa.iter().zip(v).map(|(&x, &e)| (x, e / cfg.omega0)).collect();
    let overlays = [
        Overlay { name: "CB1-VB".into(), points: as_orders(&curves.cb1_vb), color: "#ffffff".into() },
        Overlay { name: "CB2-VB".into(), points: as_orders(&curves.cb2_vb), color: "#ff4040".into() },
        Overlay { name: "CB2-VB-w".into(), points: as_orders(&curves.cb2_vb_floquet), color: "#40c0ff".into() },
    ];
    let svg = render_heatmap(&backdrop, &overlays, false);
    write_file(&out.join("overlay.svg"), &svg.svg)?;
    println!("{} rows; curves in {}", table.rows(), out.display());
    Ok(())
}
