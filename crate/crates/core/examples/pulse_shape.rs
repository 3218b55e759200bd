//! The sin² driving pulse: support length from the FWHM, driving regime,
//! and the sampled A(t), E(t).
//!
//!     cargo run --release --example pulse_shape -- [fwhm_fs]

use kp_hhg::io::write_file;
use kp_hhg::pulse::{sin2_support_factor, LaserPulse};
use kp_hhg::units::{au_to_fs, field_to_intensity};
use kp_hhg::RunConfig;

fn main() -> kp_hhg::Result<()> {
    let fwhm: f64 = std::env::args().nth(1).map_or(12.5, |s| s.parse().expect("fwhm_fs"));
    let mut cfg = RunConfig::with_u0(0.6);
    cfg.fwhm_fs = fwhm;
    let pulse = LaserPulse::from_config(&cfg);
    let regime = pulse.driving_regime(cfg.a)?;

    println!("support / FWHM   {:.4}", sin2_support_factor());
    println!("support          {:.2} fs ({:.1} a.u.)", au_to_fs(pulse.t_total), pulse.t_total);
    println!("A0               {:.4} a.u.", pulse.a0);
    println!("peak intensity   {:.3e} W/cm^2", field_to_intensity(cfg.e0));
    println!("omega_B / omega0 {:.3}", regime.ratio);

    write_file(std::path::Path::new("out/pulse_shape/pulse.csv"), &pulse.to_csv(cfg.dt * 20.0, &cfg.header()))?;
    Ok(())
}
