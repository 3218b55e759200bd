//! Field-free Bloch Hamiltonian on a plane-wave basis.
//!
//! Bands are labelled by their energy-sorted position at each k, starting
//! from 1 for the lowest band. No band tracking is attempted across k, so an
//! avoided crossing shows up as a swap of indices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticePotential;
use crate::units::HARTREE_EV;

/// Symmetric set of reciprocal-lattice vectors G_m = 2πm/a, |m| ≤ (N−1)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    ms: Vec<i64>,
}

impl PlaneWaveBasis {
    pub fn new(n_waves: usize) -> Result<Self> {
        if n_waves < 1 || n_waves % 2 == 0 {
            return Err(Error::Invalid(format!(
                "plane-wave count must be odd, got {n_waves}"
            )));
        }
        let half = (n_waves as i64 - 1) / 2;
        Ok(PlaneWaveBasis {
            ms: (-half..=half).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ms.is_empty()
    }

    /// Integer labels m, ascending.
    pub fn indices(&self) -> &[i64] {
        &self.ms
    }

    /// G_m values for the lattice period `a`.
    pub fn vectors(&self, a: f64) -> Vec<f64> {
        self.ms.iter().map(|&m| 2.0 * PI * m as f64 / a).collect()
    }
}

/// Maps k onto (−π/a, π/a]. Returns the folded value and whether folding happened.
pub fn fold_to_bz(k: f64, a: f64) -> (f64, bool) {
    let half = PI / a;
    if k > -half && k <= half {
        return (k, false);
    }
    let period = 2.0 * half;
    let mut r = k - period * ((k + half) / period).floor();
    if r <= -half {
        r += period;
    }
    (r, true)
}

/// Dense matrix of potential couplings V_{G_m − G_n}. Real symmetric.
pub fn potential_matrix(pot: &LatticePotential, basis: &PlaneWaveBasis) -> DMatrix<f64> {
    let ms = basis.indices();
    let n = ms.len();
    DMatrix::from_fn(n, n, |i, j| pot.coefficient(ms[i] - ms[j]))
}

/// H_mn = δ_mn (k + G_m)²/2 + V_{G_m − G_n}.
///
/// Momenta outside the first zone are folded back (with a logged warning);
/// the folded Hamiltonian is unitarily equivalent.
pub fn bloch_hamiltonian(pot: &LatticePotential, k0: f64, basis: &PlaneWaveBasis) -> DMatrix<f64> {
    let (k, folded) = fold_to_bz(k0, pot.a);
    if folded {
        log::warn!("k0 = {k0} lies outside the first Brillouin zone; folded to {k}");
    }
    let mut h = potential_matrix(pot, basis);
    for (i, g) in basis.vectors(pot.a).into_iter().enumerate() {
        h[(i, i)] += 0.5 * (k + g) * (k + g);
    }
    h
}

/// Eigenpairs at a single crystal momentum.
#[derive(Debug, Clone)]
pub struct BlochStates {
    pub k: f64,
    /// Ascending band energies (a.u.).
    pub energies: Vec<f64>,
    /// Columns are unit eigenvectors over the basis, largest component positive.
    pub vectors: DMatrix<f64>,
    g: Vec<f64>,
}

impl BlochStates {
    pub fn n_bands(&self) -> usize {
        self.energies.len()
    }

    fn check_band(&self, band: usize) -> Result<usize> {
        if band == 0 || band > self.n_bands() {
            return Err(Error::Invalid(format!(
                "band index {band} outside 1..={}",
                self.n_bands()
            )));
        }
        Ok(band - 1)
    }

    /// ε_n(k) for the 1-based band `band`.
    pub fn energy(&self, band: usize) -> Result<f64> {
        Ok(self.energies[self.check_band(band)?])
    }

    pub fn vector(&self, band: usize) -> Result<DVector<f64>> {
        Ok(self.vectors.column(self.check_band(band)?).into_owned())
    }

    /// p_nm = Σ_G c_n(G) (k + G) c_m(G).
    pub fn momentum(&self, n: usize, m: usize) -> Result<f64> {
        let (i, j) = (self.check_band(n)?, self.check_band(m)?);
        let cn = self.vectors.column(i);
        let cm = self.vectors.column(j);
        Ok(self
            .g
            .iter()
            .enumerate()
            .map(|(r, g)| cn[r] * (self.k + g) * cm[r])
            .sum())
    }

    /// ε_upper − ε_lower.
    pub fn gap(&self, upper: usize, lower: usize) -> Result<f64> {
        Ok(self.energy(upper)? - self.energy(lower)?)
    }
}

/// Diagonalises the Bloch Hamiltonian at one k and keeps the lowest `n_bands`.
pub fn solve_at(
    pot: &LatticePotential,
    k0: f64,
    basis: &PlaneWaveBasis,
    n_bands: usize,
) -> Result<BlochStates> {
    let n = basis.len();
    if n_bands == 0 || n_bands > n {
        return Err(Error::Invalid(format!(
            "requested {n_bands} bands from a basis of {n} plane waves"
        )));
    }
    let (k, _) = fold_to_bz(k0, pot.a);
    let h = bloch_hamiltonian(pot, k, basis);
    let eig = h
        .try_symmetric_eigen(1e-15, 10_000)
        .ok_or_else(|| Error::Numerical(format!("eigensolver did not converge at k0 = {k}")))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.truncate(n_bands);

    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n_bands);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        fix_phase(&mut v);
        vectors.set_column(col, &v);
    }
    Ok(BlochStates {
        k,
        energies,
        vectors,
        g: basis.vectors(pot.a),
    })
}

/// Normalises and makes the largest-magnitude component positive.
fn fix_phase(v: &mut DVector<f64>) {
    let norm = v.norm();
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let s = if v[best] < 0.0 { -1.0 } else { 1.0 };
    *v *= s / norm;
}

/// Band energies and eigenvectors over a grid of crystal momenta.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub states: Vec<BlochStates>,
}

/// Solves every k independently; the output order follows `k_grid`.
pub fn solve_bands(
    pot: &LatticePotential,
    k_grid: &[f64],
    basis: &PlaneWaveBasis,
    n_bands: usize,
) -> Result<BandStructure> {
    let states = k_grid
        .par_iter()
        .map(|&k| solve_at(pot, k, basis, n_bands))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStructure { states })
}

impl BandStructure {
    pub fn k_grid(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.k).collect()
    }

    pub fn n_bands(&self) -> usize {
        self.states.first().map_or(0, BlochStates::n_bands)
    }

    /// Energies of one band across the grid.
    pub fn band(&self, band: usize) -> Result<Vec<f64>> {
        self.states.iter().map(|s| s.energy(band)).collect()
    }

    /// CSV with columns `k_au,e1_eV,e2_eV,…`.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("k_au");
        for n in 1..=self.n_bands() {
            out.push_str(&format!(",e{n}_eV"));
        }
        out.push('\n');
        for s in &self.states {
            out.push_str(&format!("{}", s.k));
            for e in &s.energies {
                out.push_str(&format!(",{}", e * HARTREE_EV));
            }
            out.push('\n');
        }
        out
    }
}

/// ε_upper(k) − ε_lower(k) at grid point `ik`.
pub fn bandgap(bands: &BandStructure, upper: usize, lower: usize, ik: usize) -> Result<f64> {
    bands
        .states
        .get(ik)
        .ok_or_else(|| Error::Invalid(format!("k index {ik} out of range")))?
        .gap(upper, lower)
}

/// Midpoint k-grid of `n` cells spanning the first Brillouin zone.
///
/// Points are k_j = −π/a + (j + ½)·2π/(na); for odd `n` the grid contains
/// k = 0 and is symmetric under k → −k.
pub fn bz_grid(n: usize, a: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (a * n as f64);
    (0..n).map(|j| -PI / a + (j as f64 + 0.5) * dk).collect()
}
