//! One-dimensional Kronig-Penney square-well lattice.
//!
//! The well is centred at x = 0: V(x) = −U₀ for |x| < w/2 inside the unit
//! cell, 0 elsewhere, repeated with period a. The Fourier coefficients are
//! analytic, so the discontinuities never get sampled.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square-well periodic potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePotential {
    pub a: f64,
    pub u0: f64,
    pub width: f64,
}

impl LatticePotential {
    pub fn new(a: f64, u0: f64, width: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Invalid("lattice period must be positive".into()));
        }
        if !(u0 >= 0.0) {
            return Err(Error::Invalid("well depth must be nonnegative".into()));
        }
        if !(width > 0.0 && width <= a) {
            return Err(Error::Invalid("well width must lie in (0, a]".into()));
        }
        Ok(LatticePotential { a, u0, width })
    }

    pub fn from_config(cfg: &crate::config::RunConfig) -> Self {
        LatticePotential {
            a: cfg.a,
            u0: cfg.u0,
            width: cfg.well_width,
        }
    }

    /// Reciprocal lattice vector 2πm/a.
    pub fn reciprocal(&self, m: i64) -> f64 {
        TAU * m as f64 / self.a
    }

    /// Integer index of `g` on the reciprocal lattice, if it lies on it.
    pub fn lattice_index(&self, g: f64) -> Result<i64> {
        let m = g * self.a / TAU;
        let r = m.round();
        if (m - r).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::Invalid(format!(
                "G = {g} is not a reciprocal-lattice vector of period {}",
                self.a
            )));
        }
        Ok(r as i64)
    }

    /// V_G for G = 2πm/a: −U₀ (w/a) sinc(Gw/2).
    pub fn coefficient(&self, m: i64) -> f64 {
        let g = self.reciprocal(m);
        -self.u0 * (self.width / self.a) * sinc(g * self.width / 2.0)
    }

    /// Fourier coefficient at an arbitrary reciprocal-lattice vector.
    pub fn fourier_coefficient(&self, g: f64) -> Result<Complex64> {
        let m = self.lattice_index(g)?;
        Ok(Complex64::new(self.coefficient(m), 0.0))
    }

    /// Fourier coefficient of ∂V/∂x: iG·V_G.
    pub fn gradient_fourier_coefficient(&self, g: f64) -> Result<Complex64> {
        let m = self.lattice_index(g)?;
        Ok(Complex64::new(0.0, self.reciprocal(m) * self.coefficient(m)))
    }

    /// V(x) at any position. At the edges |x| = w/2 the value inside the well
    /// is returned (limit from the well side).
    pub fn value(&self, x: f64) -> f64 {
        let r = x - self.a * (x / self.a).round();
        if r.abs() <= self.width / 2.0 {
            -self.u0
        } else {
            0.0
        }
    }

    /// Samples V on a grid that must span one period.
    pub fn sample_real_space(&self, grid: &[f64]) -> Result<Vec<f64>> {
        if grid.is_empty() {
            return Err(Error::Invalid("empty sampling grid".into()));
        }
        Ok(grid.iter().map(|&x| self.value(x)).collect())
    }

    /// Reconstruction from the coefficients |m| ≤ m_max.
    pub fn truncated_value(&self, x: f64, m_max: i64) -> f64 {
        let mut v = self.coefficient(0);
        for m in 1..=m_max {
            v += 2.0 * self.coefficient(m) * (self.reciprocal(m) * x).cos();
        }
        v
    }

    /// Two-column CSV (x a.u., V a.u.) over one cell.
    pub fn to_csv(&self, points: usize, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("x_au,V_au\n");
        for i in 0..points {
            let x = -self.a / 2.0 + self.a * i as f64 / points as f64;
            out.push_str(&format!("{x:.10e},{:.10e}\n", self.value(x)));
        }
        out
    }
}

fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}
