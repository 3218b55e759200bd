//! Floquet replicas and the two-level nonadiabatic coupling between CB1 and
//! the first lower replica of CB2.
//!
//! The dressed Hamiltonian is
//!
//! ```text
//! H = | ε_CB2 − ħω   V     |
//!     | V*           ε_CB1 |
//! ```
//!
//! with V = A₀·⟨CB1|p|CB2⟩ taken at the peak vector potential.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{solve_at, BandStructure, BlochStates, PlaneWaveBasis};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::BandTable;
use crate::lattice::LatticePotential;
use crate::units::HARTREE_EV;

/// Band shifted down by `order` photon energies.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetReplica {
    pub band: usize,
    pub order: i32,
    pub energies: Vec<f64>,
}

impl FloquetReplica {
    pub fn new(bands: &BandStructure, band: usize, order: i32, omega: f64) -> Result<Self> {
        let shift = order as f64 * omega;
        let energies = bands.band(band)?.into_iter().map(|e| e - shift).collect();
        Ok(FloquetReplica {
            band,
            order,
            energies,
        })
    }
}

pub fn coupled_hamiltonian(eps_cb2: f64, eps_cb1: f64, omega: f64, coupling: Complex64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(eps_cb2 - omega, 0.0),
        coupling,
        coupling.conj(),
        Complex64::new(eps_cb1, 0.0),
    )
}

/// Eigenvalues (λ₋, λ₊) of the 2×2 dressed Hamiltonian in closed form.
pub fn coupled_eigenvalues(eps_cb2: f64, eps_cb1: f64, omega: f64, coupling: Complex64) -> (f64, f64) {
    let d1 = eps_cb2 - omega;
    let mean = 0.5 * (d1 + eps_cb1);
    let half = 0.5 * (d1 - eps_cb1);
    let r = half.hypot(coupling.norm());
    (mean - r, mean + r)
}

/// V = A₀ · p_{cb1,cb2}(k).
pub fn coupling_strength(states: &BlochStates, cb1: usize, cb2: usize, a0: f64) -> Result<Complex64> {
    Ok(Complex64::new(a0 * states.momentum(cb1, cb2)?, 0.0))
}

/// One row of a coupled-bandgap scan. Energies in a.u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledGapRow {
    pub u0: f64,
    /// ε_CB2 − ε_CB1 at the abscissa momentum (the scan's x-axis).
    pub cb2_cb1: f64,
    pub cb1_vb: f64,
    pub cb2_vb: f64,
    pub cb2_vb_floquet: f64,
    /// λ₊ − ε_VB (coupled bandgap 2).
    pub upper_vb: f64,
    /// λ₋ − ε_VB (coupled bandgap 1).
    pub lower_vb: f64,
    pub coupling: f64,
    pub omega: f64,
}

impl CoupledGapRow {
    /// (ε_CB1 − ε_VB) − (ε_CB2 − ε_VB − ħω); changes sign at a crossing.
    pub fn detuning(&self) -> f64 {
        self.cb1_vb - self.cb2_vb_floquet
    }
}

/// Options of a coupled-bandgap scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapScanPoint {
    /// Momentum where the three gaps and V are evaluated.
    pub eval_k: f64,
    /// Momentum where the abscissa ε_CB2 − ε_CB1 is evaluated.
    pub abscissa_k: f64,
}

/// Evaluates one scan row for a single well depth.
pub fn coupled_gap_row(cfg: &RunConfig, u0: f64, at: GapScanPoint) -> Result<CoupledGapRow> {
    let pot = LatticePotential::new(cfg.a, u0, cfg.well_width)?;
    let basis = PlaneWaveBasis::new(cfg.n_waves)?;
    let n_bands = cfg.n_bands();
    let s = solve_at(&pot, at.eval_k, &basis, n_bands)?;
    let abscissa = if at.abscissa_k == at.eval_k {
        s.gap(cfg.cb2_index, cfg.cb1_index)?
    } else {
        solve_at(&pot, at.abscissa_k, &basis, n_bands)?.gap(cfg.cb2_index, cfg.cb1_index)?
    };
    let vb = s.energy(cfg.vb_index)?;
    let cb1 = s.energy(cfg.cb1_index)?;
    let cb2 = s.energy(cfg.cb2_index)?;
    let v = coupling_strength(&s, cfg.cb1_index, cfg.cb2_index, cfg.a0())?;
    let (lower, upper) = coupled_eigenvalues(cb2, cb1, cfg.omega0, v);
    Ok(CoupledGapRow {
        u0,
        cb2_cb1: abscissa,
        cb1_vb: cb1 - vb,
        cb2_vb: cb2 - vb,
        cb2_vb_floquet: cb2 - vb - cfg.omega0,
        upper_vb: upper - vb,
        lower_vb: lower - vb,
        coupling: v.norm(),
        omega: cfg.omega0,
    })
}

/// One row per well depth, all evaluated at the configured gap momentum.
pub fn coupled_bandgap_scan(cfg: &RunConfig, u0_grid: &[f64]) -> Result<Vec<CoupledGapRow>> {
    let at = GapScanPoint {
        eval_k: cfg.gap_k(),
        abscissa_k: std::f64::consts::PI / cfg.a,
    };
    coupled_bandgap_scan_at(cfg, u0_grid, at)
}

pub fn coupled_bandgap_scan_at(cfg: &RunConfig, u0_grid: &[f64], at: GapScanPoint) -> Result<Vec<CoupledGapRow>> {
    let n_bands = cfg.n_bands();
    for (key, idx) in [("vb_index", cfg.vb_index), ("cb1_index", cfg.cb1_index), ("cb2_index", cfg.cb2_index)] {
        if idx > n_bands {
            return Err(Error::config(key, "band index exceeds solved bands"));
        }
    }
    u0_grid
        .par_iter()
        .map(|&u0| coupled_gap_row(cfg, u0, at))
        .collect()
}

/// CSV of a scan with every energy in both eV and a.u.
pub fn scan_to_csv(rows: &[CoupledGapRow], header: &str) -> String {
    let mut out = String::from(header);
    let names = [
        "cb2_cb1", "cb1_vb", "cb2_vb", "cb2_vb_minus_omega", "coupled2_vb", "coupled1_vb", "abs_V",
    ];
    out.push_str("U0_au");
    for n in names {
        out.push_str(&format!(",{n}_eV,{n}_au"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{}", r.u0));
        for v in [r.cb2_cb1, r.cb1_vb, r.cb2_vb, r.cb2_vb_floquet, r.upper_vb, r.lower_vb, r.coupling] {
            out.push_str(&format!(",{},{}", v * HARTREE_EV, v));
        }
        out.push('\n');
    }
    out
}

/// Location of the CB1 / replica crossing inside a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    Found {
        u0: f64,
        /// ε_CB2 − ε_CB1 at the crossing (a.u.).
        cb2_cb1: f64,
        /// |V| at the crossing (a.u.); the avoided gap is twice this.
        coupling: f64,
        /// Index of the lower bracketing row.
        row: usize,
    },
    None,
}

impl Crossing {
    pub fn is_found(&self) -> bool {
        matches!(self, Crossing::Found { .. })
    }
}

/// First sign change of the detuning along the scan, by linear interpolation.
pub fn find_crossing(rows: &[CoupledGapRow]) -> Crossing {
    find_all_crossings(rows).into_iter().next().unwrap_or(Crossing::None)
}

pub fn find_all_crossings(rows: &[CoupledGapRow]) -> Vec<Crossing> {
    let mut found = Vec::new();
    for (i, w) in rows.windows(2).enumerate() {
        let (f0, f1) = (w[0].detuning(), w[1].detuning());
        let brackets = f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0) && f1 != 0.0;
        if !brackets {
            continue;
        }
        let s = if f0 == 0.0 { 0.0 } else { f0 / (f0 - f1) };
        let lerp = |a: f64, b: f64| a + s * (b - a);
        found.push(Crossing::Found {
            u0: lerp(w[0].u0, w[1].u0),
            cb2_cb1: lerp(w[0].cb2_cb1, w[1].cb2_cb1),
            coupling: lerp(w[0].coupling, w[1].coupling),
            row: i,
        });
    }
    if let Some(last) = rows.last() {
        if rows.len() >= 2 && last.detuning() == 0.0 {
            found.push(Crossing::Found {
                u0: last.u0,
                cb2_cb1: last.cb2_cb1,
                coupling: last.coupling,
                row: rows.len() - 1,
            });
        }
    }
    found
}

/// Three gap curves against a band table's abscissa. Energies in a.u.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlayCurves {
    pub abscissa_label: String,
    pub abscissa: Vec<f64>,
    pub cb1_vb: Vec<f64>,
    pub cb2_vb: Vec<f64>,
    pub cb2_vb_floquet: Vec<f64>,
}

pub fn overlay_curves(table: &BandTable, vb: usize, cb1: usize, cb2: usize, omega: f64) -> Result<OverlayCurves> {
    let n = table.n_bands();
    if n < 3 {
        return Err(Error::Invalid(format!("band table has {n} bands; need at least 3")));
    }
    for idx in [vb, cb1, cb2] {
        if idx == 0 || idx > n {
            return Err(Error::Invalid(format!("band index {idx} outside 1..={n}")));
        }
    }
    let mut c = OverlayCurves {
        abscissa_label: table.abscissa_label.clone(),
        abscissa: table.abscissa.clone(),
        cb1_vb: Vec::with_capacity(table.rows()),
        cb2_vb: Vec::with_capacity(table.rows()),
        cb2_vb_floquet: Vec::with_capacity(table.rows()),
    };
    for row in &table.energies {
        let (v, c1, c2) = (row[vb - 1], row[cb1 - 1], row[cb2 - 1]);
        c.cb1_vb.push(c1 - v);
        c.cb2_vb.push(c2 - v);
        c.cb2_vb_floquet.push(c2 - v - omega);
    }
    Ok(c)
}

impl OverlayCurves {
    /// CSV: abscissa, then the three curves in eV.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str(&format!(
            "{},cb1_vb_eV,cb2_vb_eV,cb2_vb_minus_omega_eV\n",
            self.abscissa_label
        ));
        for i in 0..self.abscissa.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.abscissa[i],
                self.cb1_vb[i] * HARTREE_EV,
                self.cb2_vb[i] * HARTREE_EV,
                self.cb2_vb_floquet[i] * HARTREE_EV
            ));
        }
        out
    }
}

/// Crossing abscissa when the gaps are evaluated away from the zone edge.
///
/// The x-axis stays ε_CB2 − ε_CB1 at k = π/a while the three gaps are taken
/// at `k_frac · π/a`. At `k_frac = 1` the crossing sits exactly at ħω₀.
pub fn crossing_k_sensitivity(cfg: &RunConfig, k_fracs: &[f64]) -> Result<Vec<(f64, Crossing)>> {
    let grid = cfg.u0_grid(cfg.crossing_points);
    let edge = std::f64::consts::PI / cfg.a;
    k_fracs
        .iter()
        .map(|&f| {
            let rows = coupled_bandgap_scan_at(
                cfg,
                &grid,
                GapScanPoint {
                    eval_k: f * edge,
                    abscissa_k: edge,
                },
            )?;
            Ok((f, find_crossing(&rows)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{bz_grid, solve_bands};
    use nalgebra::ComplexField;

    fn hermitian_eigs(h: &Matrix2<Complex64>) -> (f64, f64) {
        let e = h.symmetric_eigenvalues();
        let (a, b) = (e[0].real(), e[1].real());
        (a.min(b), a.max(b))
    }

    #[test]
    fn uncoupled_levels_unchanged() {
        let h = coupled_hamiltonian(0.5, 0.48, 0.057, Complex64::new(0.0, 0.0));
        let (lo, hi) = hermitian_eigs(&h);
        assert!((lo - 0.443).abs() < 1e-14 && (hi - 0.48).abs() < 1e-14);
        let (lo, hi) = coupled_eigenvalues(0.5, 0.48, 0.057, Complex64::new(0.0, 0.0));
        assert!((lo - 0.443).abs() < 1e-15 && (hi - 0.48).abs() < 1e-15);
    }

    #[test]
    fn degenerate_diagonal_splits_by_twice_v() {
        let (lo, hi) = coupled_eigenvalues(0.537, 0.48, 0.057, Complex64::new(0.01, 0.0));
        assert!((hi - lo - 0.02).abs() < 1e-12);
    }

    #[test]
    fn generic_case_matches_numerical_diagonalisation() {
        let v = Complex64::new(0.003, 0.004);
        let h = coupled_hamiltonian(0.50, 0.48, 0.057, v);
        let (lo, hi) = coupled_eigenvalues(0.50, 0.48, 0.057, v);
        let (nlo, nhi) = hermitian_eigs(&h);
        assert!((lo - nlo).abs() < 1e-14 && (hi - nhi).abs() < 1e-14);
        assert!((hi - lo - (0.037f64.powi(2) + 4.0 * 0.005f64.powi(2)).sqrt()).abs() < 1e-14);
        assert!((hi - lo - 0.038328).abs() < 1e-6);
    }

    #[test]
    fn coupling_from_band_states() {
        let pot = LatticePotential::new(8.2, 0.6, 4.1).unwrap();
        let basis = PlaneWaveBasis::new(21).unwrap();
        let s = solve_at(&pot, 0.2, &basis, 5).unwrap();
        assert_eq!(coupling_strength(&s, 3, 4, 0.0).unwrap().norm(), 0.0);
        let v = coupling_strength(&s, 3, 4, 0.007 / 0.057).unwrap();
        // flipping one eigenvector's sign leaves |V| unchanged
        let mut flipped = s.clone();
        let col = -flipped.vectors.column(3).into_owned();
        flipped.vectors.set_column(3, &col);
        let w = coupling_strength(&flipped, 3, 4, 0.007 / 0.057).unwrap();
        assert!((v.norm() - w.norm()).abs() < 1e-15);
        assert!((v + w).norm() < 1e-15);
    }

    #[test]
    fn replicas_are_uniform_shifts() {
        let pot = LatticePotential::new(8.2, 0.6, 4.1).unwrap();
        let basis = PlaneWaveBasis::new(21).unwrap();
        let bands = solve_bands(&pot, &bz_grid(11, 8.2), &basis, 5).unwrap();
        let r0 = FloquetReplica::new(&bands, 4, 0, 0.057).unwrap();
        let r1 = FloquetReplica::new(&bands, 4, 1, 0.057).unwrap();
        let r2 = FloquetReplica::new(&bands, 4, 2, 0.057).unwrap();
        assert_eq!(r0.energies, bands.band(4).unwrap());
        for i in 0..11 {
            assert!((r1.energies[i] - r2.energies[i] - 0.057).abs() < 1e-14);
        }
    }

    fn row(u0: f64, cb1_vb: f64, floq: f64) -> CoupledGapRow {
        CoupledGapRow {
            u0,
            cb2_cb1: 2.0 * u0,
            cb1_vb,
            cb2_vb: floq + 0.057,
            cb2_vb_floquet: floq,
            upper_vb: 0.0,
            lower_vb: 0.0,
            coupling: u0,
            omega: 0.057,
        }
    }

    #[test]
    fn crossing_interpolation_is_exact_for_linear_gaps() {
        let rows = vec![row(0.0, 1.0, 0.0), row(1.0, 0.0, 1.0)];
        match find_crossing(&rows) {
            Crossing::Found { u0, cb2_cb1, coupling, row } => {
                assert_eq!(u0, 0.5);
                assert_eq!(cb2_cb1, 1.0);
                assert_eq!(coupling, 0.5);
                assert_eq!(row, 0);
            }
            Crossing::None => panic!("expected a crossing"),
        }
        let none = vec![row(0.0, 1.0, 0.0), row(1.0, 2.0, 0.0)];
        assert_eq!(find_crossing(&none), Crossing::None);
        assert_eq!(find_crossing(&[]), Crossing::None);
    }

    #[test]
    fn scan_rejects_unsolved_indices() {
        let mut cfg = RunConfig::with_u0(0.6);
        cfg.cb2_index = 30;
        assert!(coupled_bandgap_scan(&cfg, &[0.6]).is_err());
    }
}
