//! Atomic-unit conventions and conversions used at I/O boundaries.
//!
//! Everything inside the crate is in Hartree atomic units (ħ = e = mₑ = 1),
//! so an energy in a.u. and an angular frequency in a.u. are the same number.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// CODATA 2018 conversion constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hartree_in_ev: f64,
    pub atomic_time_in_fs: f64,
    pub bohr_in_angstrom: f64,
    pub speed_of_light_au: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hartree_in_ev: 27.211_386_245_988,
    atomic_time_in_fs: 0.024_188_843_265_857,
    bohr_in_angstrom: 0.529_177_210_903,
    speed_of_light_au: 137.035_999_084,
};

pub const HARTREE_EV: f64 = CONSTANTS.hartree_in_ev;
pub const AU_TIME_FS: f64 = CONSTANTS.atomic_time_in_fs;

/// Peak intensity in W/cm² corresponding to a field amplitude of 1 a.u.
pub const AU_INTENSITY_W_CM2: f64 = 3.509_338_1e16;

pub fn ev_to_au(ev: f64) -> f64 {
    ev / HARTREE_EV
}

pub fn au_to_ev(au: f64) -> f64 {
    au * HARTREE_EV
}

pub fn fs_to_au(fs: f64) -> f64 {
    fs / AU_TIME_FS
}

pub fn au_to_fs(au: f64) -> f64 {
    au * AU_TIME_FS
}

/// Cycle-averaged peak intensity (W/cm²) of a linearly polarised field `e0` (a.u.).
///
/// Labeled utility only; the simulator is always driven by the field amplitude.
pub fn field_to_intensity(e0: f64) -> f64 {
    AU_INTENSITY_W_CM2 * e0 * e0
}

pub fn intensity_to_field(intensity_w_cm2: f64) -> f64 {
    (intensity_w_cm2 / AU_INTENSITY_W_CM2).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    EnergyAu,
    ElectronVolt,
    TimeAu,
    Femtosecond,
    WavelengthNm,
    FrequencyAu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Energy,
    Time,
    Wavelength,
}

impl Unit {
    fn dimension(self) -> Dimension {
        match self {
            Unit::EnergyAu | Unit::ElectronVolt | Unit::FrequencyAu => Dimension::Energy,
            Unit::TimeAu | Unit::Femtosecond => Dimension::Time,
            Unit::WavelengthNm => Dimension::Wavelength,
        }
    }

    /// Value expressed in the canonical a.u. of its dimension.
    fn to_canonical(self, v: f64) -> f64 {
        match self {
            Unit::EnergyAu | Unit::FrequencyAu | Unit::TimeAu => v,
            Unit::ElectronVolt => ev_to_au(v),
            Unit::Femtosecond => fs_to_au(v),
            Unit::WavelengthNm => v * 10.0 / CONSTANTS.bohr_in_angstrom,
        }
    }

    fn from_canonical(self, v: f64) -> f64 {
        match self {
            Unit::EnergyAu | Unit::FrequencyAu | Unit::TimeAu => v,
            Unit::ElectronVolt => au_to_ev(v),
            Unit::Femtosecond => au_to_fs(v),
            Unit::WavelengthNm => v * CONSTANTS.bohr_in_angstrom / 10.0,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::EnergyAu => "au_energy",
            Unit::ElectronVolt => "eV",
            Unit::TimeAu => "au_time",
            Unit::Femtosecond => "fs",
            Unit::WavelengthNm => "nm",
            Unit::FrequencyAu => "au_frequency",
        };
        f.write_str(s)
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "au" | "a.u." | "au_energy" | "hartree" => Ok(Unit::EnergyAu),
            "ev" => Ok(Unit::ElectronVolt),
            "au_time" => Ok(Unit::TimeAu),
            "fs" => Ok(Unit::Femtosecond),
            "nm" => Ok(Unit::WavelengthNm),
            "au_frequency" | "au_freq" => Ok(Unit::FrequencyAu),
            other => Err(Error::Invalid(format!("unknown unit `{other}`"))),
        }
    }
}

/// Converts `value` between two units.
///
/// Energy-like units (a.u. energy, eV, a.u. angular frequency) convert
/// linearly among themselves and reciprocally to wavelength via ω = 2πc/λ.
/// Time units only convert to time units.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    use Dimension::*;
    let incompatible = || Error::Units {
        from: from.to_string(),
        to: to.to_string(),
    };
    let canonical = from.to_canonical(value);
    let target = match (from.dimension(), to.dimension()) {
        (a, b) if a == b => canonical,
        (Energy, Wavelength) | (Wavelength, Energy) => {
            if canonical == 0.0 {
                return Err(Error::Invalid(
                    "zero cannot be converted between wavelength and frequency".into(),
                ));
            }
            std::f64::consts::TAU * CONSTANTS.speed_of_light_au / canonical
        }
        _ => return Err(incompatible()),
    };
    Ok(to.from_canonical(target))
}
