//! One complete HHG calculation: bands → propagation per k₀ → zone
//! integration → spectrum.

use rayon::prelude::*;

use crate::bands::{bz_grid, solve_at, PlaneWaveBasis};
use crate::config::{KMode, RunConfig};
use crate::error::Result;
use crate::lattice::LatticePotential;
use crate::observables::{integrate_bz, spectrum, CurrentTrace, SpectrumRecord};
use crate::pulse::LaserPulse;
use crate::tdse::{initial_state, propagate, BlochHamiltonian, PropagationRecord, PropagationSettings};

/// Crystal momenta propagated for the given mode.
pub fn k_points(cfg: &RunConfig, mode: KMode) -> Vec<f64> {
    match mode {
        KMode::Single => vec![cfg.k0()],
        KMode::Bz => bz_grid(cfg.nk, cfg.a),
    }
}

/// Propagates the initial valence state at one crystal momentum.
pub fn propagate_k(cfg: &RunConfig, k0: f64) -> Result<crate::tdse::Propagation> {
    let pot = LatticePotential::from_config(cfg);
    let basis = PlaneWaveBasis::new(cfg.n_waves)?;
    let states = solve_at(&pot, k0, &basis, cfg.vb_index)?;
    let u0 = initial_state(&states, cfg.vb_index)?;
    let ham = BlochHamiltonian::new(&pot, &basis, k0);
    let pulse = LaserPulse::from_config(cfg);
    propagate(&u0, &ham, &pulse, PropagationSettings::from_config(cfg))
}

#[derive(Debug, Clone)]
pub struct HhgRun {
    pub k_points: Vec<f64>,
    /// Zone-averaged (or single-k) current derivative.
    pub trace: CurrentTrace,
    /// Full spectrum up to the Nyquist frequency.
    pub spectrum: SpectrumRecord,
    /// Largest |‖u(t)‖ − 1| over every propagated k.
    pub max_norm_drift: f64,
    pub max_edge_population: f64,
    pub breakdowns: usize,
}

pub fn run_hhg(cfg: &RunConfig, mode: KMode) -> Result<HhgRun> {
    let ks = k_points(cfg, mode);
    let props: Vec<crate::tdse::Propagation> = ks
        .par_iter()
        .map(|&k| propagate_k(cfg, k))
        .collect::<Result<_>>()?;
    let traces: Vec<CurrentTrace> = props.iter().map(|p| CurrentTrace::from_record(&p.record)).collect();
    let trace = integrate_bz(&traces, &ks)?;
    let spectrum = spectrum(&trace, cfg.window, cfg.zero_pad, cfg.omega0)?;
    Ok(HhgRun {
        k_points: ks,
        trace,
        spectrum,
        max_norm_drift: props.iter().map(|p| norm_drift(&p.record)).fold(0.0, f64::max),
        max_edge_population: props.iter().map(|p| p.max_edge_population).fold(0.0, f64::max),
        breakdowns: props.iter().map(|p| p.breakdowns).sum(),
    })
}

pub fn norm_drift(record: &PropagationRecord) -> f64 {
    let n0 = record.norm.first().copied().unwrap_or(1.0);
    record.norm.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
}
