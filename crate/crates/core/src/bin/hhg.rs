use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kp_hhg::bands::{bz_grid, solve_bands, PlaneWaveBasis};
use kp_hhg::config::{KMode, Manifest, RawConfig};
use kp_hhg::floquet::{overlay_curves, scan_to_csv, Crossing};
use kp_hhg::io::{read_file, render_heatmap, write_file, BandTable, HeatmapMatrix, Overlay};
use kp_hhg::lattice::LatticePotential;
use kp_hhg::observables::CurrentTrace;
use kp_hhg::pulse::LaserPulse;
use kp_hhg::run::{propagate_k, run_hhg};
use kp_hhg::scan::{crossing_table, run_scan, ScanAxis, ScanPlan};
use kp_hhg::units::HARTREE_EV;
use kp_hhg::{validate_config, Error, Result, RunConfig};

/// HHG in a one-dimensional Kronig-Penney solid.
#[derive(Parser)]
#[command(name = "hhg", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set U0=0.6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Output directory (defaults to `output_dir` from the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Band structure over the Brillouin-zone grid, plus the potential.
    Bands,
    /// Coupled-band gaps over the U0 crossing grid.
    Coupled,
    /// Locate the CB1 / lower-replica crossing.
    Crossing,
    /// Vector potential and field of the driving pulse.
    Pulse,
    /// Propagate a single initial momentum and write the current trace.
    Propagate,
    /// Harmonic spectrum for the configured k mode.
    Spectrum,
    /// Resumable parameter sweep.
    Scan {
        /// U0, E0, k0 or fwhm.
        #[arg(long, default_value = "U0")]
        axis: String,
        /// Comma-separated values; defaults to the configured U0 grid.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Gap curves from an external band table, optionally drawn on a heatmap.
    Overlay {
        #[arg(long)]
        bands: PathBuf,
        /// Heatmap matrix with harmonic order on the y axis.
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Render a heatmap matrix to SVG.
    Render {
        #[arg(long)]
        heatmap: PathBuf,
        #[arg(long)]
        log: bool,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut raw = match &common.config {
        Some(path) => RawConfig::from_file(path)?,
        None => RawConfig::default(),
    };
    for s in &common.sets {
        raw.set_override(s)?;
    }
    validate_config(&raw)
}

fn emit(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    write_file(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    let out = cli.common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let header = cfg.header();

    match cli.cmd {
        Cmd::Bands => {
            let pot = LatticePotential::from_config(&cfg);
            let basis = PlaneWaveBasis::new(cfg.n_waves)?;
            let bands = solve_bands(&pot, &bz_grid(cfg.nk, cfg.a), &basis, cfg.n_bands())?;
            emit(&out, "bands.csv", &bands.to_csv(&header))?;
            emit(&out, "potential.csv", &pot.to_csv(401, &header))?;
        }
        Cmd::Coupled => {
            let (rows, _) = crossing_table(&cfg)?;
            emit(&out, "coupled_gaps.csv", &scan_to_csv(&rows, &header))?;
        }
        Cmd::Crossing => {
            let (rows, c) = crossing_table(&cfg)?;
            emit(&out, "coupled_gaps.csv", &scan_to_csv(&rows, &header))?;
            match c {
                Crossing::Found { u0, cb2_cb1, coupling, .. } => println!(
                    "crossing at U0 = {u0:.6} a.u., gap = {:.4} eV, |V| = {:.4} meV",
                    cb2_cb1 * HARTREE_EV,
                    coupling * HARTREE_EV * 1e3
                ),
                Crossing::None => println!("no crossing in U0 = [{}, {}]", cfg.u0_min, cfg.u0_max),
            }
        }
        Cmd::Pulse => {
            let pulse = LaserPulse::from_config(&cfg);
            emit(&out, "pulse.csv", &pulse.to_csv(cfg.dt, &header))?;
            let regime = pulse.driving_regime(cfg.a)?;
            println!("Bloch frequency / omega0 = {:.3}", regime.ratio);
        }
        Cmd::Propagate => {
            let p = propagate_k(&cfg, cfg.k0())?;
            let trace = CurrentTrace::from_record(&p.record);
            emit(&out, "current.csv", &trace.to_csv(&header))?;
            if p.breakdowns > 0 {
                println!("{} Lanczos steps hit an invariant subspace", p.breakdowns);
            }
        }
        Cmd::Spectrum => {
            let run = run_hhg(&cfg, cfg.k_mode)?;
            emit(&out, "current.csv", &run.trace.to_csv(&header))?;
            let spec = run.spectrum.truncated(cfg.max_order);
            emit(&out, "spectrum.csv", &spec.to_csv(&header))?;
            for &q in &cfg.harmonics {
                let y = run.spectrum.harmonic_yield(q as f64, cfg.half_width)?;
                let p = run.spectrum.harmonic_peak_position(q as f64, cfg.half_width)?;
                println!("H{q}: yield {y:.4e}, peak at order {:.3}", p.order);
            }
        }
        Cmd::Scan { axis, values } => {
            let axis: ScanAxis = axis.parse()?;
            let plan = if values.is_empty() {
                if axis != ScanAxis::U0 {
                    return Err(Error::Invalid("--values is required for this axis".into()));
                }
                ScanPlan::u0_sweep(&cfg)?
            } else {
                let mode = if axis == ScanAxis::E0 { KMode::Bz } else { cfg.k_mode };
                ScanPlan::new(axis, values, cfg.clone(), mode)?
            };
            let result = run_scan(&plan, Some(&out))?;
            println!(
                "{} points, {} resumed, {} failed; index at {}",
                result.values.len(),
                result.resumed,
                result.failures.len(),
                out.join("index.csv").display()
            );
            for (v, e) in &result.failures {
                println!("  {}={v}: {e}", axis.key());
            }
        }
        Cmd::Overlay { bands, heatmap } => {
            let table = BandTable::parse(&read_file(&bands)?)?;
            let curves = overlay_curves(&table, cfg.vb_index, cfg.cb1_index, cfg.cb2_index, cfg.omega0)?;
            emit(&out, "overlay.csv", &curves.to_csv(&header))?;
            if let Some(path) = heatmap {
                let m = HeatmapMatrix::parse(&read_file(&path)?)?;
                let to_order = |v: &[f64]| -> Vec<(f64, f64)> {
                    curves.abscissa.iter().zip(v).map(|(&x, &e)| (x, e / cfg.omega0)).collect()
                };
                let overlays = [
                    ("cb1-vb", to_order(&curves.cb1_vb), "#ffffff"),
                    ("cb2-vb", to_order(&curves.cb2_vb), "#ff4040"),
                    ("cb2-vb-omega", to_order(&curves.cb2_vb_floquet), "#40c0ff"),
                ]
                .map(|(name, points, color)| Overlay {
                    name: name.into(),
                    points,
                    color: color.into(),
                });
                emit(&out, "overlay.svg", &render_heatmap(&m, &overlays, false).svg)?;
            }
        }
        Cmd::Render { heatmap, log } => {
            let m = HeatmapMatrix::parse(&read_file(&heatmap)?)?;
            let r = render_heatmap(&m, &[], log);
            if r.degenerate {
                println!("warning: every cell has the same value");
            }
            emit(&out, "heatmap.svg", &r.svg)?;
        }
    }
    Manifest::new(&cfg).write(&out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
