//! Run configuration: a flat TOML key/value document, validated into an
//! immutable [`RunConfig`], plus the run manifest written next to outputs.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeKind {
    /// sin² envelope applied to the vector potential.
    Sin2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KMode {
    /// Propagate only the configured initial crystal momentum.
    Single,
    /// Integrate over the Brillouin-zone grid.
    Bz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
}

/// Validated, frozen run configuration. All physics in atomic units except
/// `fwhm_fs`, which is converted at use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Lattice period.
    pub a: f64,
    #[serde(rename = "U0")]
    pub u0: f64,
    pub well_width: f64,

    pub omega0: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub fwhm_fs: f64,
    pub cep: f64,
    pub envelope: EnvelopeKind,

    pub n_waves: usize,
    pub krylov: usize,
    pub dt: f64,
    pub nk: usize,
    pub window: WindowKind,
    pub zero_pad: usize,

    pub vb_index: usize,
    pub cb1_index: usize,
    pub cb2_index: usize,

    /// Initial crystal momentum for single-k runs, in units of π/a.
    pub k0_frac: f64,
    /// Crystal momentum at which coupled-band gaps are evaluated, in units of π/a.
    pub gap_k_frac: f64,
    pub k_mode: KMode,

    pub u0_min: f64,
    pub u0_max: f64,
    pub crossing_points: usize,
    pub scan_points: usize,

    pub harmonics: Vec<u32>,
    pub half_width: f64,
    pub max_order: f64,

    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Worker threads for scans; 0 uses every available core.
    pub workers: usize,
}

const KEYS: &[&str] = &[
    "a",
    "U0",
    "well_width",
    "omega0",
    "E0",
    "fwhm_fs",
    "cep",
    "envelope",
    "n_waves",
    "krylov",
    "dt",
    "nk",
    "window",
    "zero_pad",
    "vb_index",
    "cb1_index",
    "cb2_index",
    "k0_frac",
    "gap_k_frac",
    "k_mode",
    "u0_min",
    "u0_max",
    "crossing_points",
    "scan_points",
    "harmonics",
    "half_width",
    "max_order",
    "output_dir",
    "formats",
    "workers",
];

/// Keys that never change a result.
const EXECUTION_KEYS: &[&str] = &["output_dir", "formats", "workers"];

/// Keys without a default.
const MANDATORY: &[&str] = &["U0"];

/// Raw document before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    table: Table,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
        for (k, v) in &table {
            if v.is_table() {
                return Err(Error::config(k, "nested tables are not allowed"));
            }
        }
        Ok(RawConfig { table })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override. Values that are not valid TOML
    /// literals are taken as bare strings.
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
        let key = key.trim();
        let value = value.trim();
        let parsed = format!("v = {value}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(value.to_string()));
        self.table.insert(key.to_string(), parsed);
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.table.insert(key.to_string(), value.into());
    }
}

impl FromStr for RawConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

struct Reader<'a> {
    table: &'a Table,
}

impl Reader<'_> {
    fn float(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.table.get(key) {
            Some(Value::Float(f)) => Ok(*f),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(_) => Err(Error::config(key, "expected a number")),
            None => default.ok_or_else(|| Error::config(key, "missing mandatory key")),
        }
    }

    fn uint(&self, key: &str, default: usize) -> Result<usize> {
        match self.table.get(key) {
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(Value::Integer(_)) => Err(Error::config(key, "must be nonnegative")),
            Some(_) => Err(Error::config(key, "expected an integer")),
            None => Ok(default),
        }
    }

    fn string(&self, key: &str, default: &str) -> Result<String> {
        match self.table.get(key) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(Error::config(key, "expected a string")),
            None => Ok(default.to_string()),
        }
    }

    fn enumeration<T: for<'de> Deserialize<'de>>(&self, key: &str, default: &str) -> Result<T> {
        let s = self.string(key, default)?;
        T::deserialize(Value::String(s.clone()))
            .map_err(|_| Error::config(key, format!("unknown value `{s}`")))
    }

    fn list<T, F>(&self, key: &str, default: Vec<T>, item: F) -> Result<Vec<T>>
    where
        F: Fn(&Value) -> Option<T>,
    {
        match self.table.get(key) {
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| item(v).ok_or_else(|| Error::config(key, "invalid list element")))
                .collect(),
            Some(_) => Err(Error::config(key, "expected a list")),
            None => Ok(default),
        }
    }
}

/// Checks every invariant, fills defaults, and freezes the configuration.
pub fn validate_config(raw: &RawConfig) -> Result<RunConfig> {
    for key in raw.table.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::config(key, "unknown key"));
        }
    }
    for key in MANDATORY {
        if !raw.table.contains_key(*key) {
            return Err(Error::config(key, "missing mandatory key"));
        }
    }
    let r = Reader { table: &raw.table };

    let a = r.float("a", Some(8.2))?;
    let cfg = RunConfig {
        a,
        u0: r.float("U0", None)?,
        well_width: r.float("well_width", Some(a / 2.0))?,
        omega0: r.float("omega0", Some(0.057))?,
        e0: r.float("E0", Some(0.007))?,
        fwhm_fs: r.float("fwhm_fs", Some(12.5))?,
        cep: r.float("cep", Some(0.0))?,
        envelope: r.enumeration("envelope", "sin2")?,
        n_waves: r.uint("n_waves", 21)?,
        krylov: r.uint("krylov", 10)?,
        dt: r.float("dt", Some(0.05))?,
        nk: r.uint("nk", 51)?,
        window: r.enumeration("window", "hann")?,
        zero_pad: r.uint("zero_pad", 4)?,
        vb_index: r.uint("vb_index", 2)?,
        cb1_index: r.uint("cb1_index", 3)?,
        cb2_index: r.uint("cb2_index", 4)?,
        k0_frac: r.float("k0_frac", Some(1.0))?,
        gap_k_frac: r.float("gap_k_frac", Some(1.0))?,
        k_mode: r.enumeration("k_mode", "single")?,
        u0_min: r.float("u0_min", Some(0.2))?,
        u0_max: r.float("u0_max", Some(1.2))?,
        crossing_points: r.uint("crossing_points", 51)?,
        scan_points: r.uint("scan_points", 41)?,
        harmonics: r.list("harmonics", vec![9, 10], |v| {
            v.as_integer().filter(|i| *i > 0).map(|i| i as u32)
        })?,
        half_width: r.float("half_width", Some(0.5))?,
        max_order: r.float("max_order", Some(20.0))?,
        output_dir: PathBuf::from(r.string("output_dir", "out")?),
        formats: r.list("formats", vec![OutputFormat::Csv], |v| {
            OutputFormat::deserialize(v.clone()).ok()
        })?,
        workers: r.uint("workers", 0)?,
    };
    cfg.check()?;
    Ok(cfg)
}

impl RunConfig {
    /// Configuration with every default and the given well depth.
    pub fn with_u0(u0: f64) -> Self {
        let mut raw = RawConfig::default();
        raw.set("U0", u0);
        validate_config(&raw).expect("defaults are valid")
    }

    pub(crate) fn check(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("{key} must be positive")))
            }
        };
        positive("a", self.a)?;
        if !(self.u0 >= 0.0 && self.u0.is_finite()) {
            return Err(Error::config("U0", "U0 must be nonnegative"));
        }
        if !(self.well_width > 0.0 && self.well_width <= self.a) {
            return Err(Error::config("well_width", "well_width must lie in (0, a]"));
        }
        positive("omega0", self.omega0)?;
        if !(self.e0 >= 0.0 && self.e0.is_finite()) {
            return Err(Error::config("E0", "E0 must be nonnegative"));
        }
        positive("fwhm_fs", self.fwhm_fs)?;
        if !self.cep.is_finite() {
            return Err(Error::config("cep", "cep must be finite"));
        }
        if self.n_waves < 3 {
            return Err(Error::config("n_waves", "n_waves must be at least 3"));
        }
        if self.n_waves % 2 == 0 {
            return Err(Error::config("n_waves", "n_waves must be odd"));
        }
        if self.krylov < 2 {
            return Err(Error::config("krylov", "krylov must be at least 2"));
        }
        if self.krylov > self.n_waves {
            return Err(Error::config("krylov", "krylov must not exceed n_waves"));
        }
        positive("dt", self.dt)?;
        if self.nk < 1 {
            return Err(Error::config("nk", "nk must be at least 1"));
        }
        if self.zero_pad < 1 {
            return Err(Error::config("zero_pad", "zero_pad must be at least 1"));
        }
        if self.vb_index < 1 {
            return Err(Error::config("vb_index", "band indices start at 1"));
        }
        if !(self.vb_index < self.cb1_index && self.cb1_index < self.cb2_index) {
            return Err(Error::config(
                "cb1_index",
                "band indices must satisfy vb_index < cb1_index < cb2_index",
            ));
        }
        if self.cb2_index > self.n_waves {
            return Err(Error::config("cb2_index", "cb2_index exceeds n_waves"));
        }
        for (key, v) in [("k0_frac", self.k0_frac), ("gap_k_frac", self.gap_k_frac)] {
            if !(v > -1.0 && v <= 1.0) {
                return Err(Error::config(key, format!("{key} must lie in (-1, 1]")));
            }
        }
        if !(self.u0_min >= 0.0 && self.u0_max > self.u0_min) {
            return Err(Error::config("u0_max", "need 0 <= u0_min < u0_max"));
        }
        if self.crossing_points < 2 {
            return Err(Error::config("crossing_points", "need at least 2 points"));
        }
        if self.scan_points < 1 {
            return Err(Error::config("scan_points", "need at least 1 point"));
        }
        if !(self.half_width > 0.0 && self.half_width <= 0.5) {
            return Err(Error::config("half_width", "half_width must lie in (0, 0.5]"));
        }
        positive("max_order", self.max_order)?;
        Ok(())
    }

    /// Number of bands solved for by default: everything up to CB2 plus one.
    pub fn n_bands(&self) -> usize {
        (self.cb2_index + 1).min(self.n_waves)
    }

    pub fn a0(&self) -> f64 {
        self.e0 / self.omega0
    }

    pub fn k0(&self) -> f64 {
        self.k0_frac * PI / self.a
    }

    pub fn gap_k(&self) -> f64 {
        self.gap_k_frac * PI / self.a
    }

    /// Uniform grid over `[u0_min, u0_max]`.
    pub fn u0_grid(&self, points: usize) -> Vec<f64> {
        linspace(self.u0_min, self.u0_max, points)
    }

    /// Canonical TOML form; re-validating it reproduces `self` exactly.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Canonical form without the keys that only affect where and how fast
    /// a run executes.
    fn physics_toml(&self) -> String {
        let mut table: Table = toml::Table::try_from(self).expect("config serializes");
        for key in EXECUTION_KEYS {
            table.remove(*key);
        }
        toml::to_string(&table).expect("table serializes")
    }

    /// Short content hash of everything that can change a result.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.physics_toml().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Comment header placed at the top of every output file.
    pub fn header(&self) -> String {
        let mut params = String::new();
        for line in self.physics_toml().lines() {
            if let Some((k, v)) = line.split_once(" = ") {
                if !params.is_empty() {
                    params.push(' ');
                }
                let _ = write!(params, "{k}={v}");
            }
        }
        format!(
            "# {} {} manifest={}\n# params: {}\n",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            self.hash(),
            params
        )
    }

    /// Returns a copy with one key overridden, re-validated.
    pub fn with_override(&self, assignment: &str) -> Result<Self> {
        let mut raw = RawConfig::parse(&self.to_toml())?;
        raw.set_override(assignment)?;
        validate_config(&raw)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Run manifest written alongside every output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub config_hash: String,
    /// Choices the physics leaves open, echoed for audits.
    pub notes: Vec<String>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(config: &RunConfig) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            config_hash: config.hash(),
            notes: vec![
                "time ordering: Hamiltonian frozen at step midpoint".into(),
                "envelope: sin^2 on the vector potential, carrier referenced to pulse centre".into(),
                "band identity: energy-sorted index per k (1-based)".into(),
                "coupling V uses the peak vector potential E0/omega0".into(),
                "spectrum: |DFT of windowed dJ/dt|^2".into(),
            ],
            config: config.clone(),
        }
    }

    pub fn write(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("manifest.toml");
        let text = toml::to_string(self).expect("manifest serializes");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
