//! Parameter sweeps over complete HHG runs.
//!
//! Each point runs independently and is written to its own directory as
//! soon as it finishes; `point.json` is renamed into place last, so its
//! presence (with a matching config hash) marks the point done. Re-running
//! a scan into the same directory skips completed points.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{KMode, Manifest, OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::floquet::{coupled_bandgap_scan, coupled_gap_row, find_crossing, Crossing, CoupledGapRow, GapScanPoint};
use crate::io::{render_heatmap, write_file, HeatmapMatrix, Overlay};
use crate::observables::{log10_floor, SpectrumRecord};
use crate::run::run_hhg;
use crate::units::{field_to_intensity, HARTREE_EV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanAxis {
    U0,
    E0,
    K0,
    Fwhm,
}

impl ScanAxis {
    /// Configuration key the axis overrides.
    pub fn key(self) -> &'static str {
        match self {
            ScanAxis::U0 => "U0",
            ScanAxis::E0 => "E0",
            ScanAxis::K0 => "k0_frac",
            ScanAxis::Fwhm => "fwhm_fs",
        }
    }

    pub fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut cfg = base.clone();
        match self {
            ScanAxis::U0 => cfg.u0 = value,
            ScanAxis::E0 => cfg.e0 = value,
            ScanAxis::K0 => cfg.k0_frac = value,
            ScanAxis::Fwhm => cfg.fwhm_fs = value,
        }
        cfg.check()?;
        Ok(cfg)
    }
}

impl std::str::FromStr for ScanAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U0" | "u0" => Ok(ScanAxis::U0),
            "E0" | "e0" => Ok(ScanAxis::E0),
            "k0" | "k0_frac" => Ok(ScanAxis::K0),
            "fwhm" | "fwhm_fs" => Ok(ScanAxis::Fwhm),
            _ => Err(Error::Invalid(format!("unknown scan axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanPlan {
    pub axis: ScanAxis,
    pub values: Vec<f64>,
    pub base: RunConfig,
    pub k_mode: KMode,
    /// Also evaluate the coupled-band gaps at every point (U0 axis only).
    pub coupled_gaps: bool,
}

impl ScanPlan {
    pub fn new(axis: ScanAxis, values: Vec<f64>, base: RunConfig, k_mode: KMode) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("scan needs at least one value".into()));
        }
        let inc = values.windows(2).all(|w| w[1] > w[0]);
        let dec = values.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(Error::Invalid("scan values must be strictly monotone".into()));
        }
        for &v in &values {
            axis.apply(&base, v)?;
        }
        Ok(ScanPlan {
            axis,
            values,
            base,
            k_mode,
            coupled_gaps: axis == ScanAxis::U0,
        })
    }

    /// Well-depth sweep over the base configuration's `[u0_min, u0_max]`.
    pub fn u0_sweep(base: &RunConfig) -> Result<Self> {
        Self::new(ScanAxis::U0, base.u0_grid(base.scan_points), base.clone(), base.k_mode)
    }

    pub fn point_config(&self, i: usize) -> Result<RunConfig> {
        self.axis.apply(&self.base, self.values[i])
    }

    fn point_dir(&self, root: &Path, i: usize) -> PathBuf {
        root.join("points").join(format!("{}={}", self.axis.key(), self.values[i]))
    }
}

/// Everything kept from one scan point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub value: f64,
    pub config_hash: String,
    pub k_mode: KMode,
    pub gap: Option<CoupledGapRow>,
    pub harmonics: Vec<u32>,
    pub yields: Vec<f64>,
    /// Peak position in harmonic orders, refined to sub-bin accuracy.
    pub peaks: Vec<f64>,
    /// Set when the peak search found a plateau of equal maxima.
    pub peak_flat: Vec<bool>,
    pub linewidths: Vec<f64>,
    pub d_omega: f64,
    pub omega0: f64,
    /// PSD up to `max_order`.
    pub psd: Vec<f64>,
    pub max_norm_drift: f64,
}

impl PointRecord {
    pub fn spectrum(&self, base: &RunConfig) -> SpectrumRecord {
        SpectrumRecord {
            omega: (0..self.psd.len()).map(|k| k as f64 * self.d_omega).collect(),
            psd: self.psd.clone(),
            d_omega: self.d_omega,
            omega0: self.omega0,
            window: base.window,
            zero_pad: base.zero_pad,
            fft_len: 0,
        }
    }

    fn harmonic(&self, q: u32) -> Option<usize> {
        self.harmonics.iter().position(|&h| h == q)
    }

    pub fn peak(&self, q: u32) -> Option<f64> {
        self.harmonic(q).map(|i| self.peaks[i])
    }

    pub fn yield_of(&self, q: u32) -> Option<f64> {
        self.harmonic(q).map(|i| self.yields[i])
    }

    pub fn linewidth(&self, q: u32) -> Option<f64> {
        self.harmonic(q).map(|i| self.linewidths[i])
    }
}

/// Runs the full pipeline for one point.
pub fn evaluate_point(plan: &ScanPlan, i: usize) -> Result<PointRecord> {
    let cfg = plan.point_config(i)?;
    let gap = if plan.coupled_gaps {
        let at = GapScanPoint {
            eval_k: cfg.gap_k(),
            abscissa_k: std::f64::consts::PI / cfg.a,
        };
        Some(coupled_gap_row(&cfg, cfg.u0, at)?)
    } else {
        None
    };
    let run = run_hhg(&cfg, plan.k_mode)?;
    let spec = &run.spectrum;
    let hw = cfg.half_width;
    let mut yields = Vec::new();
    let mut peaks = Vec::new();
    let mut flat = Vec::new();
    let mut widths = Vec::new();
    for &q in &cfg.harmonics {
        let q = q as f64;
        yields.push(spec.harmonic_yield(q, hw)?);
        let p = spec.harmonic_peak_position(q, hw)?;
        peaks.push(p.order);
        flat.push(p.flat);
        widths.push(spec.linewidth(q, hw)?);
    }
    let trimmed = spec.truncated(cfg.max_order);
    Ok(PointRecord {
        value: plan.values[i],
        config_hash: cfg.hash(),
        k_mode: plan.k_mode,
        gap,
        harmonics: cfg.harmonics.clone(),
        yields,
        peaks,
        peak_flat: flat,
        linewidths: widths,
        d_omega: trimmed.d_omega,
        omega0: trimmed.omega0,
        psd: trimmed.psd,
        max_norm_drift: run.max_norm_drift,
    })
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub axis: ScanAxis,
    pub values: Vec<f64>,
    /// `None` where the point failed.
    pub records: Vec<Option<PointRecord>>,
    pub failures: Vec<(f64, String)>,
    /// Points loaded from a previous run instead of recomputed.
    pub resumed: usize,
}

impl ScanResult {
    pub fn ok(&self) -> impl Iterator<Item = &PointRecord> {
        self.records.iter().flatten()
    }

    /// Coupled-gap rows of the successful points, in scan order.
    pub fn gap_rows(&self) -> Vec<CoupledGapRow> {
        self.ok().filter_map(|r| r.gap).collect()
    }

    /// log₁₀ PSD heatmap: x = scan value, y = harmonic order.
    pub fn heatmap(&self) -> Result<HeatmapMatrix> {
        let recs: Vec<&PointRecord> = self.ok().collect();
        let first = recs
            .first()
            .ok_or_else(|| Error::Invalid("no successful scan points".into()))?;
        let ny = first.psd.len();
        if recs.iter().any(|r| r.psd.len() != ny || r.d_omega != first.d_omega) {
            return Err(Error::Invalid("scan points have different frequency grids".into()));
        }
        let x: Vec<f64> = recs.iter().map(|r| r.value).collect();
        let y: Vec<f64> = (0..ny).map(|k| k as f64 * first.d_omega / first.omega0).collect();
        let values = (0..ny)
            .map(|k| recs.iter().map(|r| log10_floor(r.psd[k])).collect())
            .collect();
        HeatmapMatrix::new(self.axis.key(), "order", x, y, values)
    }

    /// CSV with one row per point: gaps (eV), then yield, peak, flat flag
    /// and width for each harmonic.
    pub fn index_csv(&self, header: &str, harmonics: &[u32]) -> String {
        let mut out = String::from(header);
        let _ = write!(out, "{},status,cb2_cb1_eV,cb1_vb_eV,cb2_vb_floquet_eV,upper_vb_eV,lower_vb_eV,coupling_eV", self.axis.key());
        for q in harmonics {
            let _ = write!(out, ",yield_{q},peak_{q},flat_{q},width_{q}");
        }
        out.push('\n');
        for (v, rec) in self.values.iter().zip(&self.records) {
            let _ = write!(out, "{v}");
            match rec {
                None => {
                    out.push_str(",failed,,,,,,");
                    for _ in harmonics {
                        out.push_str(",,,,");
                    }
                }
                Some(r) => {
                    out.push_str(",ok");
                    match r.gap {
                        Some(g) => {
                            for e in [g.cb2_cb1, g.cb1_vb, g.cb2_vb_floquet, g.upper_vb, g.lower_vb, g.coupling] {
                                let _ = write!(out, ",{}", e * HARTREE_EV);
                            }
                        }
                        None => out.push_str(",,,,,,"),
                    }
                    for &q in harmonics {
                        match r.harmonic(q) {
                            Some(i) => {
                                let _ = write!(
                                    out,
                                    ",{},{},{},{}",
                                    r.yields[i], r.peaks[i], r.peak_flat[i] as u8, r.linewidths[i]
                                );
                            }
                            None => out.push_str(",,,,"),
                        }
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

fn load_point(path: &Path, hash: &str) -> Option<PointRecord> {
    let text = std::fs::read_to_string(path).ok()?;
    let rec: PointRecord = serde_json::from_str(&text).ok()?;
    (rec.config_hash == hash).then_some(rec)
}

fn store_point(dir: &Path, cfg: &RunConfig, rec: &PointRecord) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = cfg.header();
    write_file(&dir.join("spectrum.csv"), &rec.spectrum(cfg).to_csv(&header))?;
    let mut yields = header.clone();
    yields.push_str("harmonic,yield,peak_order,flat,width\n");
    for (i, q) in rec.harmonics.iter().enumerate() {
        let _ = writeln!(
            yields,
            "{q},{},{},{},{}",
            rec.yields[i], rec.peaks[i], rec.peak_flat[i] as u8, rec.linewidths[i]
        );
    }
    write_file(&dir.join("yields.csv"), &yields)?;
    Manifest::new(cfg).write(dir)?;
    let json = serde_json::to_string_pretty(rec).map_err(|e| Error::Invalid(e.to_string()))?;
    let tmp = dir.join("point.json.tmp");
    write_file(&tmp, &json)?;
    let done = dir.join("point.json");
    std::fs::rename(&tmp, &done).map_err(|e| Error::io(&done, e))
}

/// Runs every point of the plan, in parallel over `base.workers` threads.
///
/// With `out = Some(dir)` each point is persisted as it completes and
/// previously completed points are reused. A failing point is reported in
/// `failures` without stopping the others.
pub fn run_scan(plan: &ScanPlan, out: Option<&Path>) -> Result<ScanResult> {
    let n = plan.values.len();
    let mut records: Vec<Option<PointRecord>> = vec![None; n];
    let mut errors: Vec<Option<String>> = vec![None; n];
    let mut pending = Vec::new();
    for i in 0..n {
        let cfg = plan.point_config(i)?;
        let cached = out.and_then(|root| load_point(&plan.point_dir(root, i).join("point.json"), &cfg.hash()));
        match cached {
            Some(rec) => records[i] = Some(rec),
            None => pending.push(i),
        }
    }
    let resumed = n - pending.len();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.base.workers)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<(usize, Result<PointRecord>)>();

    std::thread::scope(|s| {
        s.spawn(move || {
            pool.install(|| {
                pending.par_iter().for_each_with(tx, |tx, &i| {
                    let _ = tx.send((i, evaluate_point(plan, i)));
                });
            });
        });
        for (i, res) in rx {
            let res = res.and_then(|rec| {
                if let Some(root) = out {
                    store_point(&plan.point_dir(root, i), &plan.point_config(i)?, &rec)?;
                }
                Ok(rec)
            });
            match res {
                Ok(rec) => records[i] = Some(rec),
                Err(e) => {
                    log::warn!("scan point {}={} failed: {e}", plan.axis.key(), plan.values[i]);
                    errors[i] = Some(e.to_string());
                }
            }
        }
    });

    let failures = errors
        .into_iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|e| (plan.values[i], e)))
        .collect();
    let result = ScanResult {
        axis: plan.axis,
        values: plan.values.clone(),
        records,
        failures,
        resumed,
    };
    if let Some(root) = out {
        write_summary(plan, &result, root)?;
    }
    Ok(result)
}

fn write_summary(plan: &ScanPlan, result: &ScanResult, root: &Path) -> Result<()> {
    let header = plan.base.header();
    write_file(&root.join("index.csv"), &result.index_csv(&header, &plan.base.harmonics))?;
    if let Ok(map) = result.heatmap() {
        write_file(&root.join("heatmap.csv"), &map.to_csv(&header))?;
        if plan.base.formats.contains(&OutputFormat::Svg) {
            let overlays = gap_overlays(result);
            write_file(&root.join("heatmap.svg"), &render_heatmap(&map, &overlays, false).svg)?;
        }
    }
    Manifest::new(&plan.base).write(root)
}

/// The two coupled gaps, in harmonic orders, as heatmap overlays.
pub fn gap_overlays(result: &ScanResult) -> Vec<Overlay> {
    let pick = |f: fn(&CoupledGapRow) -> f64| -> Vec<(f64, f64)> {
        result
            .ok()
            .filter_map(|r| r.gap.map(|g| (r.value, f(&g) / g.omega)))
            .collect()
    };
    let curves = [
        ("upper", pick(|g| g.upper_vb), "#ffffff"),
        ("lower", pick(|g| g.lower_vb), "#ff4040"),
    ];
    curves
        .into_iter()
        .filter(|(_, p, _)| !p.is_empty())
        .map(|(name, points, color)| Overlay {
            name: name.to_string(),
            points,
            color: color.to_string(),
        })
        .collect()
}

/// How closely a harmonic's peak follows the upper coupled gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingReport {
    pub crossing: Crossing,
    /// Pearson r between peak order and (λ₊ − ε_VB)/ω₀ near the crossing.
    pub r_coupling: Option<f64>,
    pub n_coupling: usize,
    /// Same correlation where ε_CB2 − ε_CB1 exceeds `far_gap`.
    pub r_far: Option<f64>,
    pub n_far: usize,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 3 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Correlates the peak of harmonic `q` with the upper coupled gap inside
/// `window` (a.u.) of the crossing abscissa, and separately where the
/// CB2 − CB1 gap is above `far_gap` (a.u.).
pub fn tracking_report(result: &ScanResult, q: u32, window: f64, far_gap: f64) -> TrackingReport {
    let rows = result.gap_rows();
    let crossing = find_crossing(&rows);
    let pairs: Vec<(f64, f64, f64)> = result
        .ok()
        .filter_map(|r| Some((r.gap?, r.peak(q)?)))
        .map(|(g, p)| (g.cb2_cb1, p, g.upper_vb / g.omega))
        .collect();
    let select = |keep: &dyn Fn(f64) -> bool| -> (Option<f64>, usize) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().filter(|p| keep(p.0)).map(|p| (p.1, p.2)).unzip();
        (pearson(&x, &y), x.len())
    };
    let (r_coupling, n_coupling) = match crossing {
        Crossing::Found { cb2_cb1, .. } => select(&|g| (g - cb2_cb1).abs() <= window),
        Crossing::None => (None, 0),
    };
    let (r_far, n_far) = select(&|g| g > far_gap);
    TrackingReport {
        crossing,
        r_coupling,
        n_coupling,
        r_far,
        n_far,
    }
}

/// U0 sweep of the base configuration with coupled gaps at every point.
pub fn run_u0_scan(base: &RunConfig, out: Option<&Path>) -> Result<ScanResult> {
    run_scan(&ScanPlan::u0_sweep(base)?, out)
}

#[derive(Debug, Clone)]
pub struct K0Entry {
    pub k0_frac: f64,
    pub result: ScanResult,
    pub tracking: TrackingReport,
}

/// Repeats the U0 sweep for several initial momenta and reports how well
/// the tracked harmonic follows the upper coupled gap for each.
pub fn run_k0_comparison(
    base: &RunConfig,
    k0_fracs: &[f64],
    q: u32,
    out: Option<&Path>,
) -> Result<Vec<K0Entry>> {
    let window = 0.5 / HARTREE_EV;
    let far = 2.0 / HARTREE_EV;
    k0_fracs
        .iter()
        .map(|&f| {
            let mut cfg = base.clone();
            cfg.k0_frac = f;
            cfg.k_mode = KMode::Single;
            cfg.check()?;
            let dir = out.map(|d| d.join(format!("k0_frac={f}")));
            let result = run_u0_scan(&cfg, dir.as_deref())?;
            let tracking = tracking_report(&result, q, window, far);
            Ok(K0Entry {
                k0_frac: f,
                result,
                tracking,
            })
        })
        .collect()
}

/// Harmonic yields against peak intensity, zone-integrated.
#[derive(Debug, Clone)]
pub struct IntensityCurves {
    pub e0: Vec<f64>,
    /// W/cm².
    pub intensity: Vec<f64>,
    pub harmonics: Vec<u32>,
    /// `yields[h][i]` for harmonic `harmonics[h]` at `e0[i]`.
    pub yields: Vec<Vec<f64>>,
    pub result: ScanResult,
}

impl IntensityCurves {
    /// Log-log CSV: intensity, then log₁₀ yield per harmonic.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("E0_au,intensity_W_cm2");
        for q in &self.harmonics {
            let _ = write!(out, ",log10_yield_{q}");
        }
        out.push('\n');
        for i in 0..self.e0.len() {
            let _ = write!(out, "{},{}", self.e0[i], self.intensity[i]);
            for y in &self.yields {
                let _ = write!(out, ",{}", log10_floor(y[i]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_intensity_scan(base: &RunConfig, e0_grid: &[f64], out: Option<&Path>) -> Result<IntensityCurves> {
    if e0_grid.iter().any(|&e| !(e >= 0.0)) {
        return Err(Error::Invalid("field amplitudes must be nonnegative".into()));
    }
    if !e0_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Invalid("field amplitudes must be strictly ascending".into()));
    }
    let mut plan = ScanPlan::new(ScanAxis::E0, e0_grid.to_vec(), base.clone(), KMode::Bz)?;
    plan.coupled_gaps = false;
    let result = run_scan(&plan, out)?;
    let ok: Vec<&PointRecord> = result.ok().collect();
    let yields = base
        .harmonics
        .iter()
        .map(|&q| ok.iter().map(|r| r.yield_of(q).unwrap_or(0.0)).collect())
        .collect();
    Ok(IntensityCurves {
        e0: ok.iter().map(|r| r.value).collect(),
        intensity: ok.iter().map(|r| field_to_intensity(r.value)).collect(),
        harmonics: base.harmonics.clone(),
        yields,
        result,
    })
}

#[derive(Debug, Clone)]
pub struct DurationEntry {
    pub fwhm_fs: f64,
    pub result: ScanResult,
    /// Width of harmonic `q` at the base well depth, in harmonic orders.
    pub linewidth: f64,
}

/// U0 sweeps at several pulse durations, plus the single-run linewidth of
/// harmonic `q` at the base well depth for each duration.
pub fn run_duration_comparison(
    base: &RunConfig,
    fwhms_fs: &[f64],
    q: u32,
    out: Option<&Path>,
) -> Result<Vec<DurationEntry>> {
    fwhms_fs
        .iter()
        .map(|&f| {
            let cfg = ScanAxis::Fwhm.apply(base, f)?;
            let dir = out.map(|d| d.join(format!("fwhm_fs={f}")));
            let result = run_u0_scan(&cfg, dir.as_deref())?;
            let run = run_hhg(&cfg, cfg.k_mode)?;
            let linewidth = run.spectrum.linewidth(q as f64, cfg.half_width)?;
            Ok(DurationEntry {
                fwhm_fs: f,
                result,
                linewidth,
            })
        })
        .collect()
}

/// Coupled-gap table over the configured crossing grid.
pub fn crossing_table(cfg: &RunConfig) -> Result<(Vec<CoupledGapRow>, Crossing)> {
    let rows = coupled_bandgap_scan(cfg, &cfg.u0_grid(cfg.crossing_points))?;
    let c = find_crossing(&rows);
    Ok((rows, c))
}
