//! Currents, Brillouin-zone integration and harmonic spectra.
//!
//! The recorded signal is the Ehrenfest form ⟨∂V/∂x⟩ + E(t). The
//! velocity-form current J = ⟨P + k₀ + A(t)⟩ obeys dJ/dt = −(⟨∂V/∂x⟩ + E),
//! so the two observables agree up to that overall sign.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::config::WindowKind;
use crate::error::{Error, Result};
use crate::tdse::{BlochHamiltonian, Drive, PropagationRecord, ReducedWavefunction};
use crate::units::HARTREE_EV;

/// ⟨u|∂V/∂x + E(t)|u⟩.
pub fn current_derivative<D: Drive + ?Sized>(u: &ReducedWavefunction, ham: &BlochHamiltonian, drive: &D, t: f64) -> f64 {
    let n2: f64 = u.coeffs.iter().map(|c| c.norm_sqr()).sum();
    ham.gradient_expectation(&u.coeffs) + drive.electric_field(t) * n2
}

/// Σ_G |c_G|² (G + k₀ + A(t)).
pub fn velocity_current<D: Drive + ?Sized>(u: &ReducedWavefunction, ham: &BlochHamiltonian, drive: &D, t: f64) -> f64 {
    let shift = ham.k0 + drive.vector_potential(t);
    u.coeffs
        .iter()
        .zip(ham.g())
        .map(|(c, g)| c.norm_sqr() * (g + shift))
        .sum()
}

/// RMS of (dJ_vel/dt + dJ/dt_Ehrenfest) relative to the RMS of the Ehrenfest
/// signal, with dJ_vel/dt from centred differences on the recorded grid.
pub fn ehrenfest_deviation(record: &PropagationRecord) -> f64 {
    let n = record.current.len();
    if n < 3 {
        return 0.0;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 1..n - 1 {
        let fd = (record.current[j + 1] - record.current[j - 1]) / (2.0 * record.dt);
        let d = record.dj_dt[j];
        num += (fd + d).powi(2);
        den += d * d;
    }
    if den == 0.0 {
        return num.sqrt();
    }
    (num / den).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceTag {
    K(f64),
    BzIntegrated,
}

/// Time trace of the current derivative (and optionally the current).
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentTrace {
    pub times: Vec<f64>,
    pub dj_dt: Vec<f64>,
    pub current: Option<Vec<f64>>,
    pub tag: TraceTag,
}

impl CurrentTrace {
    pub fn from_record(record: &PropagationRecord) -> Self {
        CurrentTrace {
            times: record.times.clone(),
            dj_dt: record.dj_dt.clone(),
            current: Some(record.current.clone()),
            tag: TraceTag::K(record.k0),
        }
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            return 0.0;
        }
        self.times[1] - self.times[0]
    }

    /// CSV: `t_au,dJdt_au`.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("t_au,dJdt_au\n");
        for (t, d) in self.times.iter().zip(&self.dj_dt) {
            out.push_str(&format!("{t},{d}\n"));
        }
        out
    }
}

/// Midpoint-rule average over the zone: (1/N) Σ_k trace_k, summed in
/// ascending k. This is the zone integral divided by the zone length 2π/a,
/// so a one-point grid returns its trace unchanged.
pub fn integrate_bz(traces: &[CurrentTrace], k_grid: &[f64]) -> Result<CurrentTrace> {
    if traces.is_empty() || traces.len() != k_grid.len() {
        return Err(Error::Invalid(format!(
            "{} traces for {} k-points",
            traces.len(),
            k_grid.len()
        )));
    }
    let times = &traces[0].times;
    if let Some(i) = traces.iter().position(|t| &t.times != times || t.dj_dt.len() != times.len()) {
        return Err(Error::Invalid(format!(
            "time grid of trace {i} (k = {}) differs from the first",
            k_grid[i]
        )));
    }
    let mut order: Vec<usize> = (0..k_grid.len()).collect();
    order.sort_by(|&a, &b| k_grid[a].total_cmp(&k_grid[b]));
    let w = 1.0 / k_grid.len() as f64;
    let mut dj = vec![0.0; times.len()];
    let with_current = traces.iter().all(|t| t.current.is_some());
    let mut cur = vec![0.0; if with_current { times.len() } else { 0 }];
    for &i in &order {
        for (acc, v) in dj.iter_mut().zip(&traces[i].dj_dt) {
            *acc += w * v;
        }
        if let (true, Some(c)) = (with_current, &traces[i].current) {
            for (acc, v) in cur.iter_mut().zip(c) {
                *acc += w * v;
            }
        }
    }
    Ok(CurrentTrace {
        times: times.clone(),
        dj_dt: dj,
        current: with_current.then_some(cur),
        tag: TraceTag::BzIntegrated,
    })
}

pub fn window_weights(kind: WindowKind, n: usize) -> Vec<f64> {
    match kind {
        WindowKind::Rect => vec![1.0; n],
        WindowKind::Hann => {
            if n < 2 {
                return vec![1.0; n];
            }
            (0..n)
                .map(|j| 0.5 * (1.0 - (2.0 * PI * j as f64 / (n - 1) as f64).cos()))
                .collect()
        }
    }
}

/// One-sided power spectrum on a uniform angular-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    /// Angular frequencies ω_k = k·dω (a.u.).
    pub omega: Vec<f64>,
    pub psd: Vec<f64>,
    pub d_omega: f64,
    pub omega0: f64,
    pub window: WindowKind,
    pub zero_pad: usize,
    /// Length of the zero-padded transform.
    pub fft_len: usize,
}

fn padded_transform(samples: &[f64], dt: f64, zero_pad: usize) -> (Vec<Complex64>, usize) {
    let m = samples.len() * zero_pad;
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(m, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.truncate(m / 2 + 1);
    for x in &mut buf {
        *x *= dt;
    }
    (buf, m)
}

/// I(ω) = |Σ_j dt·w_j·f_j e^{−iωt_j}|² for ω = 2πk/(M·dt), k ≤ M/2.
pub fn spectrum(trace: &CurrentTrace, window: WindowKind, zero_pad: usize, omega0: f64) -> Result<SpectrumRecord> {
    signal_spectrum(&trace.dj_dt, trace.dt(), window, zero_pad, omega0)
}

pub fn signal_spectrum(samples: &[f64], dt: f64, window: WindowKind, zero_pad: usize, omega0: f64) -> Result<SpectrumRecord> {
    if samples.len() < 16 {
        return Err(Error::Invalid(format!(
            "spectrum needs at least 16 samples, got {}",
            samples.len()
        )));
    }
    if zero_pad < 1 || !(dt > 0.0) {
        return Err(Error::Invalid("zero_pad must be >= 1 and dt positive".into()));
    }
    let w = window_weights(window, samples.len());
    let x: Vec<f64> = samples.iter().zip(&w).map(|(s, w)| s * w).collect();
    let (spec, m) = padded_transform(&x, dt, zero_pad);
    let d_omega = 2.0 * PI / (m as f64 * dt);
    Ok(SpectrumRecord {
        omega: (0..spec.len()).map(|k| k as f64 * d_omega).collect(),
        psd: spec.iter().map(|c| c.norm_sqr()).collect(),
        d_omega,
        omega0,
        window,
        zero_pad,
        fft_len: m,
    })
}

/// Spectrum through the current: |ω·FT[w·J]|². Uses the recorded J when
/// present, otherwise integrates dJ/dt with J(0) = 0.
pub fn current_spectrum(trace: &CurrentTrace, window: WindowKind, zero_pad: usize, omega0: f64) -> Result<SpectrumRecord> {
    let j = match &trace.current {
        Some(c) => c.clone(),
        None => {
            let dt = trace.dt();
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(trace.dj_dt.len());
            out.push(0.0);
            for w in trace.dj_dt.windows(2) {
                acc += 0.5 * dt * (w[0] + w[1]);
                out.push(acc);
            }
            out
        }
    };
    let mut s = signal_spectrum(&j, trace.dt(), window, zero_pad, omega0)?;
    for (p, w) in s.psd.iter_mut().zip(&s.omega) {
        *p *= w * w;
    }
    Ok(s)
}

/// Peak of a harmonic line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPosition {
    /// ω/ω₀ of the maximum.
    pub order: f64,
    pub value: f64,
    /// Several bins share the maximum; `order` is the midpoint of the tied bins.
    pub flat: bool,
    /// No local maximum in the band: `order` sits on the rising flank of a
    /// neighbouring line.
    pub edge: bool,
}

impl SpectrumRecord {
    pub fn orders(&self) -> Vec<f64> {
        self.omega.iter().map(|w| w / self.omega0).collect()
    }

    fn max_omega(&self) -> f64 {
        *self.omega.last().unwrap_or(&0.0)
    }

    /// Weight of bin k in the two-sided sum.
    fn fold_weight(&self, k: usize) -> f64 {
        let last_is_nyquist = self.fft_len % 2 == 0 && k == self.fft_len / 2;
        if k == 0 || last_is_nyquist {
            1.0
        } else {
            2.0
        }
    }

    /// (1/2π) Σ_k I(ω_k) dω over both signs of ω; by Parseval this equals
    /// dt·Σ_j |w_j f_j|².
    pub fn integrated_power(&self) -> f64 {
        self.psd
            .iter()
            .enumerate()
            .map(|(k, p)| self.fold_weight(k) * p)
            .sum::<f64>()
            * self.d_omega
            / (2.0 * PI)
    }

    /// Exact integral of the piecewise-linear PSD over [lo, hi] (a.u. frequency).
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(0.0);
        let hi = hi.min(self.max_omega());
        if !(hi > lo) {
            return 0.0;
        }
        let at = |w: f64| {
            let x = w / self.d_omega;
            let i = (x.floor() as usize).min(self.psd.len() - 2);
            let s = x - i as f64;
            self.psd[i] + s * (self.psd[i + 1] - self.psd[i])
        };
        let first = (lo / self.d_omega).floor() as usize + 1;
        let last = (hi / self.d_omega).ceil() as usize;
        let mut nodes = vec![(lo, at(lo))];
        for k in first..last {
            nodes.push((self.omega[k], self.psd[k]));
        }
        nodes.push((hi, at(hi)));
        nodes.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
    }

    /// Trapezoid integral over the whole one-sided grid.
    pub fn total(&self) -> f64 {
        self.integrate(0.0, self.max_omega())
    }

    fn band(&self, q: f64, half_width: f64) -> Result<(f64, f64)> {
        let lo = (q - half_width) * self.omega0;
        let hi = (q + half_width) * self.omega0;
        if lo < 0.0 || hi > self.max_omega() || !(half_width > 0.0) {
            return Err(Error::Invalid(format!(
                "harmonic band [{:.3}, {:.3}]·ω₀ lies outside the spectrum grid",
                q - half_width,
                q + half_width
            )));
        }
        Ok((lo, hi))
    }

    /// Integrated yield of harmonic `q` over [q − hw, q + hw]·ω₀.
    pub fn harmonic_yield(&self, q: f64, half_width: f64) -> Result<f64> {
        let (lo, hi) = self.band(q, half_width)?;
        Ok(self.integrate(lo, hi))
    }

    fn band_bins(&self, q: f64, half_width: f64) -> Result<(usize, usize)> {
        let (lo, hi) = self.band(q, half_width)?;
        let a = (lo / self.d_omega).ceil() as usize;
        let b = ((hi / self.d_omega).floor() as usize).min(self.psd.len() - 1);
        if a > b {
            return Err(Error::Invalid("harmonic band narrower than one bin".into()));
        }
        Ok((a, b))
    }

    /// Strongest local maximum in the band, refined by a parabola through
    /// the top three bins. Neighbours just outside the band count when
    /// deciding what is a local maximum, so a neighbouring line's flank
    /// is never reported while a genuine peak exists.
    pub fn harmonic_peak_position(&self, q: f64, search_half_width: f64) -> Result<PeakPosition> {
        let (a, b) = self.band_bins(q, search_half_width)?;
        let p = &self.psd;
        let is_local_max = |k: usize| {
            let left = if k > 0 { p[k - 1] } else { f64::NEG_INFINITY };
            let right = p.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
            p[k] >= left && p[k] >= right && (p[k] > left || p[k] > right)
        };
        let mut candidates: Vec<usize> = (a..=b).filter(|&k| is_local_max(k)).collect();
        let edge = candidates.is_empty();
        if edge {
            candidates = (a..=b).collect();
        }
        let peak = candidates.iter().map(|&k| p[k]).fold(f64::NEG_INFINITY, f64::max);
        let tol = peak.abs() * 1e-12;
        let tied: Vec<usize> = candidates.into_iter().filter(|&k| (p[k] - peak).abs() <= tol).collect();
        if tied.len() > 1 {
            let mid = 0.5 * (tied[0] + tied[tied.len() - 1]) as f64;
            return Ok(PeakPosition {
                order: mid * self.d_omega / self.omega0,
                value: peak,
                flat: true,
                edge,
            });
        }
        let k = tied[0];
        let mut pos = k as f64;
        if k > 0 && k + 1 < p.len() {
            let (y0, y1, y2) = (p[k - 1], p[k], p[k + 1]);
            let denom = y0 - 2.0 * y1 + y2;
            if denom < 0.0 {
                pos += (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5);
            }
        }
        Ok(PeakPosition {
            order: pos * self.d_omega / self.omega0,
            value: peak,
            flat: false,
            edge,
        })
    }

    /// Full width at half maximum of the strongest line in the band, in ω/ω₀.
    pub fn linewidth(&self, q: f64, search_half_width: f64) -> Result<f64> {
        let (a, b) = self.band_bins(q, search_half_width)?;
        let k = (a..=b)
            .max_by(|&i, &j| self.psd[i].total_cmp(&self.psd[j]))
            .expect("nonempty band");
        let half = 0.5 * self.psd[k];
        let mut left = k as f64;
        for i in (0..k).rev() {
            if self.psd[i] <= half {
                left = i as f64 + (half - self.psd[i]) / (self.psd[i + 1] - self.psd[i]);
                break;
            }
            left = i as f64;
        }
        let mut right = k as f64;
        for i in k + 1..self.psd.len() {
            if self.psd[i] <= half {
                right = (i - 1) as f64 + (self.psd[i - 1] - half) / (self.psd[i - 1] - self.psd[i]);
                break;
            }
            right = i as f64;
        }
        Ok((right - left) * self.d_omega / self.omega0)
    }

    /// Copy restricted to ω ≤ max_order·ω₀.
    pub fn truncated(&self, max_order: f64) -> SpectrumRecord {
        let keep = self.omega.iter().take_while(|&&w| w <= max_order * self.omega0 * (1.0 + 1e-12)).count();
        SpectrumRecord {
            omega: self.omega[..keep].to_vec(),
            psd: self.psd[..keep].to_vec(),
            ..self.clone()
        }
    }

    /// CSV: `order,omega_eV,psd,log10_psd`.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("order,omega_eV,psd,log10_psd\n");
        for (w, p) in self.omega.iter().zip(&self.psd) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                w / self.omega0,
                w * HARTREE_EV,
                p,
                log10_floor(*p)
            ));
        }
        out
    }
}

/// log10 with zero mapped to −300.
pub fn log10_floor(p: f64) -> f64 {
    if p > 0.0 {
        p.log10()
    } else {
        -300.0
    }
}

/// Largest pointwise difference of two spectra on the same grid, relative to
/// the larger peak of the two, over ω ≤ max_order·ω₀.
pub fn spectral_path_deviation(a: &SpectrumRecord, b: &SpectrumRecord, max_order: f64) -> f64 {
    let lim = max_order * a.omega0;
    let mut peak = 0.0f64;
    let mut dev = 0.0f64;
    for ((w, x), y) in a.omega.iter().zip(&a.psd).zip(&b.psd) {
        if *w > lim {
            break;
        }
        peak = peak.max(*x).max(*y);
        dev = dev.max((x - y).abs());
    }
    if peak > 0.0 {
        dev / peak
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::fs_to_au;

    const W0: f64 = 0.057;

    fn tone(order: f64, amplitude: f64) -> CurrentTrace {
        let t_total = crate::pulse::duration_to_support(fs_to_au(75.0)).unwrap();
        let dt = 0.5;
        let n = (t_total / dt) as usize + 1;
        let times: Vec<f64> = (0..n).map(|j| j as f64 * dt).collect();
        let dj_dt = times.iter().map(|t| amplitude * (order * W0 * t).cos()).collect();
        CurrentTrace {
            times,
            dj_dt,
            current: None,
            tag: TraceTag::K(0.0),
        }
    }

    #[test]
    fn tone_peak_position() {
        let s = spectrum(&tone(9.0, 1.0), WindowKind::Hann, 4, W0).unwrap();
        let p = s.harmonic_peak_position(9.0, 0.5).unwrap();
        assert!(!p.flat);
        assert!((p.order - 9.0).abs() < s.d_omega / W0, "{}", p.order);
        let s = spectrum(&tone(9.25, 1.0), WindowKind::Hann, 4, W0).unwrap();
        let p = s.harmonic_peak_position(9.0, 0.5).unwrap();
        assert!((p.order - 9.25).abs() < s.d_omega / W0);
    }

    #[test]
    fn parseval() {
        let tr = tone(9.0, 1.3);
        for (window, pad) in [(WindowKind::Hann, 4), (WindowKind::Rect, 3), (WindowKind::Hann, 1)] {
            let s = spectrum(&tr, window, pad, W0).unwrap();
            let w = window_weights(window, tr.dj_dt.len());
            let energy: f64 = tr.dj_dt.iter().zip(&w).map(|(f, w)| (f * w).powi(2)).sum::<f64>() * tr.dt();
            assert!(((s.integrated_power() - energy) / energy).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_trace_zero_spectrum() {
        let s = spectrum(&tone(9.0, 0.0), WindowKind::Hann, 4, W0).unwrap();
        assert!(s.psd.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn short_trace_rejected() {
        let tr = CurrentTrace {
            times: (0..15).map(|i| i as f64).collect(),
            dj_dt: vec![0.0; 15],
            current: None,
            tag: TraceTag::BzIntegrated,
        };
        assert!(spectrum(&tr, WindowKind::Hann, 4, W0).is_err());
    }

    #[test]
    fn yield_captures_tone() {
        let s = spectrum(&tone(9.0, 1.0), WindowKind::Hann, 4, W0).unwrap();
        let y = s.harmonic_yield(9.0, 0.5).unwrap();
        assert!(y / s.total() > 0.99);
        assert!(s.harmonic_yield(0.2, 0.5).is_err());
        assert!(s.harmonic_yield(1e6, 0.5).is_err());
    }

    #[test]
    fn yields_are_additive_and_quadratic() {
        let s = spectrum(&tone(9.0, 1.0), WindowKind::Hann, 4, W0).unwrap();
        let a = s.harmonic_yield(8.75, 0.25).unwrap();
        let b = s.harmonic_yield(9.25, 0.25).unwrap();
        let u = s.harmonic_yield(9.0, 0.5).unwrap();
        assert!(((a + b - u) / u).abs() < 1e-12);
        let s2 = spectrum(&tone(9.0, 2.0), WindowKind::Hann, 4, W0).unwrap();
        for q in [5.0, 9.0, 10.0] {
            let y1 = s.harmonic_yield(q, 0.5).unwrap();
            let y2 = s2.harmonic_yield(q, 0.5).unwrap();
            assert!((y2 - 4.0 * y1).abs() <= 1e-12 * y2.abs().max(1e-300));
        }
    }

    fn synthetic(psd: Vec<f64>) -> SpectrumRecord {
        let n = psd.len();
        SpectrumRecord {
            omega: (0..n).map(|k| k as f64 * 0.1 * W0).collect(),
            psd,
            d_omega: 0.1 * W0,
            omega0: W0,
            window: WindowKind::Rect,
            zero_pad: 1,
            fft_len: 2 * (n - 1),
        }
    }

    #[test]
    fn tie_and_flat_cases() {
        let mut psd = vec![0.0; 201];
        psd[89] = 1.0;
        psd[91] = 1.0;
        let p = synthetic(psd).harmonic_peak_position(9.0, 0.5).unwrap();
        assert!(p.flat);
        assert!((p.order - 9.0).abs() < 1e-12);
        let p = synthetic(vec![2.0; 201]).harmonic_peak_position(9.0, 0.5).unwrap();
        assert!(p.flat);
        assert!((p.order - 9.0).abs() < 1e-12);
    }

    #[test]
    fn flank_of_neighbour_is_not_a_peak() {
        // strong line below the band, weak one inside it
        let psd: Vec<f64> = (0..201)
            .map(|k| {
                let x = k as f64;
                100.0 * (-(x - 80.0).powi(2) / 20.0).exp() + (-(x - 93.0).powi(2) / 2.0).exp()
            })
            .collect();
        let p = synthetic(psd.clone()).harmonic_peak_position(9.0, 0.5).unwrap();
        assert!(!p.edge);
        assert!((p.order - 9.3).abs() < 0.02, "{}", p.order);
        // only the flank: falls back to the band maximum
        let flank: Vec<f64> = (0..201).map(|k| (-(k as f64 - 70.0).powi(2) / 50.0).exp()).collect();
        let p = synthetic(flank).harmonic_peak_position(9.0, 0.5).unwrap();
        assert!(p.edge);
        assert!((p.order - 8.5).abs() < 1e-12);
    }

    #[test]
    fn linewidth_of_triangle() {
        let mut psd = vec![0.0; 201];
        for k in 80..=100 {
            psd[k] = 10.0 - (k as f64 - 90.0).abs();
        }
        let w = synthetic(psd).linewidth(9.0, 0.5).unwrap();
        assert!((w - 1.0).abs() < 1e-12, "{w}");
    }

    #[test]
    fn bz_integration() {
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let grid = crate::bands::bz_grid(51, 8.2);
        let traces: Vec<CurrentTrace> = grid
            .iter()
            .map(|&k| CurrentTrace {
                times: times.clone(),
                dj_dt: times.iter().map(|t| k * (1.0 + t.sin())).collect(),
                current: None,
                tag: TraceTag::K(k),
            })
            .collect();
        let total = integrate_bz(&traces, &grid).unwrap();
        assert!(total.dj_dt.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(total.tag, TraceTag::BzIntegrated);

        let single = integrate_bz(&traces[3..4], &grid[3..4]).unwrap();
        assert_eq!(single.dj_dt, traces[3].dj_dt);

        let mut bad = traces.clone();
        bad[5].times[2] += 1e-9;
        assert!(integrate_bz(&bad, &grid).is_err());
        assert!(integrate_bz(&traces, &grid[1..]).is_err());
    }

    #[test]
    fn truncation() {
        let s = spectrum(&tone(9.0, 1.0), WindowKind::Hann, 4, W0).unwrap();
        let t = s.truncated(20.0);
        assert!(t.omega.last().unwrap() / W0 <= 20.0 + 1e-9);
        assert!(t.omega.len() < s.omega.len());
    }
}
