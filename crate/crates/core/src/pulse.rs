//! Few-cycle driving pulse defined through its vector potential.

use std::f64::consts::PI;

use crate::config::{EnvelopeKind, RunConfig};
use crate::error::{Error, Result};
use crate::units::fs_to_au;

/// Ratio t_total / FWHM for a sin² envelope on A (intensity ∝ sin⁴).
pub fn sin2_support_factor() -> f64 {
    1.0 / (1.0 - (2.0 / PI) * 2f64.powf(-0.25).asin())
}

/// Support length of the sin² pulse with the given intensity FWHM (same units).
pub fn duration_to_support(fwhm: f64) -> Result<f64> {
    if !(fwhm > 0.0) {
        return Err(Error::Invalid("pulse FWHM must be positive".into()));
    }
    Ok(fwhm * sin2_support_factor())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserPulse {
    pub omega0: f64,
    pub e0: f64,
    /// Peak vector potential E₀/ω₀.
    pub a0: f64,
    pub fwhm: f64,
    pub t_total: f64,
    pub cep: f64,
    pub envelope: EnvelopeKind,
}

/// Bloch frequency and its ratio to the carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivingRegime {
    pub omega_b: f64,
    pub ratio: f64,
}

impl LaserPulse {
    /// `fwhm` is the intensity FWHM in atomic time units.
    pub fn new(omega0: f64, e0: f64, fwhm: f64, cep: f64) -> Result<Self> {
        if !(omega0 > 0.0) {
            return Err(Error::Invalid("carrier frequency must be positive".into()));
        }
        Ok(LaserPulse {
            omega0,
            e0,
            a0: e0 / omega0,
            fwhm,
            t_total: duration_to_support(fwhm)?,
            cep,
            envelope: EnvelopeKind::Sin2,
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Self {
        let mut p = Self::new(cfg.omega0, cfg.e0, fs_to_au(cfg.fwhm_fs), cfg.cep)
            .expect("validated config");
        p.envelope = cfg.envelope;
        p
    }

    fn phase(&self, t: f64) -> f64 {
        self.omega0 * (t - 0.5 * self.t_total) + self.cep
    }

    /// A(t) = A₀ sin²(πt/T) cos(ω₀(t − T/2) + φ) on [0, T], zero elsewhere.
    pub fn vector_potential(&self, t: f64) -> f64 {
        if !(0.0..=self.t_total).contains(&t) {
            return 0.0;
        }
        let s = (PI * t / self.t_total).sin();
        self.a0 * s * s * self.phase(t).cos()
    }

    /// E(t) = −dA/dt, differentiated analytically.
    pub fn electric_field(&self, t: f64) -> f64 {
        if !(0.0..=self.t_total).contains(&t) {
            return 0.0;
        }
        let x = PI * t / self.t_total;
        let s = x.sin();
        let envelope_rate = (PI / self.t_total) * (2.0 * x).sin();
        let theta = self.phase(t);
        -self.a0 * (envelope_rate * theta.cos() - self.omega0 * s * s * theta.sin())
    }

    pub fn driving_regime(&self, a: f64) -> Result<DrivingRegime> {
        if !(a > 0.0) {
            return Err(Error::Invalid("lattice period must be positive".into()));
        }
        let omega_b = self.e0 * a;
        Ok(DrivingRegime {
            omega_b,
            ratio: omega_b / self.omega0,
        })
    }

    /// CSV trace (t a.u., A a.u., E a.u.) sampled every `dt`.
    pub fn to_csv(&self, dt: f64, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("t_au,A_au,E_au\n");
        let n = (self.t_total / dt).ceil() as usize;
        for i in 0..=n {
            let t = i as f64 * dt;
            out.push_str(&format!(
                "{t},{},{}\n",
                self.vector_potential(t),
                self.electric_field(t)
            ));
        }
        out
    }
}
