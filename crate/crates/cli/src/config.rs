//! Job configuration: defaults, INI-style config files and flag overrides.
//!
//! The file format is flat `key = value` pairs under the sections
//! `[deformation]`, `[oscillator]`, `[quantum]`, `[grid]`, `[evolve]`,
//! `[verify]` and `[output]`. Every key can be overridden by the
//! same-named command-line flag, so a config file checked into a repo
//! pins a reproducible run.

use anyhow::{Context, Result, anyhow, bail};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => write!(f, "exact"),
            Backend::Float => write!(f, "float"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Format::Csv => write!(f, "csv"),
            Format::Json => write!(f, "json"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Coords {
    Normal,
    Original,
}

impl fmt::Display for Coords {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coords::Normal => write!(f, "normal"),
            Coords::Original => write!(f, "original"),
        }
    }
}

/// One plotted axis: coordinate name plus a uniform range.
#[derive(Clone, Debug)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }
}

#[derive(Clone, Debug)]
pub struct JobConfig {
    // [deformation]
    pub hbar: f64,
    pub mu: f64,
    pub nu: f64,
    pub backend: Backend,
    pub tolerance: f64,
    // [oscillator]
    pub m1: f64,
    pub m2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    // [quantum]
    pub n1: u32,
    pub n2: u32,
    pub n1_max: u32,
    pub n2_max: u32,
    // [grid]
    pub axis1: Axis,
    pub axis2: Axis,
    pub fixed: BTreeMap<String, f64>,
    // [evolve]
    pub tau: Option<f64>,
    pub t: Option<f64>,
    // [verify]
    pub seed: u64,
    /// Random case count; suites pick their own default when unset.
    pub cases: Option<usize>,
    // [output]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub normalize: bool,
    pub coords: Coords,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            hbar: 1.0,
            mu: 0.1,
            nu: 0.05,
            backend: Backend::Float,
            tolerance: 1e-10,
            m1: 1.0,
            m2: 1.0,
            c1: 8.0,
            c2: 9.0,
            c3: 2.0,
            n1: 0,
            n2: 0,
            n1_max: 3,
            n2_max: 3,
            axis1: Axis { name: "y1".into(), min: -2.0, max: 2.0, count: 21 },
            axis2: Axis { name: "q1".into(), min: -2.0, max: 2.0, count: 21 },
            fixed: BTreeMap::new(),
            tau: None,
            t: None,
            seed: 42,
            cases: None,
            out: None,
            format: Format::Csv,
            normalize: false,
            coords: Coords::Normal,
        }
    }
}

pub fn parse_fixed(raw: &str, into: &mut BTreeMap<String, f64>) -> Result<()> {
    for part in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected var=value in fixed list, got {part:?}"))?;
        let value: f64 = value.trim().parse().context("fixed value must be a number")?;
        into.insert(name.trim().to_string(), value);
    }
    Ok(())
}

impl JobConfig {
    /// Apply an INI-style config file on top of the current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_lowercase();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            self.set(&section, key.trim(), value.trim()).with_context(|| {
                format!("{}:{}: bad entry {key:?}", path.display(), lineno + 1)
            })?;
        }
        Ok(())
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let f = || -> Result<f64> { Ok(value.parse()?) };
        let u = || -> Result<u32> { Ok(value.parse()?) };
        match (section, key) {
            ("deformation", "hbar") => self.hbar = f()?,
            ("deformation", "mu") => self.mu = f()?,
            ("deformation", "nu") => self.nu = f()?,
            ("deformation", "backend") => {
                self.backend = match value {
                    "exact" => Backend::Exact,
                    "float" => Backend::Float,
                    other => bail!("backend must be exact or float, got {other:?}"),
                }
            }
            ("deformation", "tolerance") => self.tolerance = f()?,
            ("oscillator", "m1") => self.m1 = f()?,
            ("oscillator", "m2") => self.m2 = f()?,
            ("oscillator", "c1") => self.c1 = f()?,
            ("oscillator", "c2") => self.c2 = f()?,
            ("oscillator", "c3") => self.c3 = f()?,
            ("quantum", "n1") => self.n1 = u()?,
            ("quantum", "n2") => self.n2 = u()?,
            ("quantum", "n1-max") => self.n1_max = u()?,
            ("quantum", "n2-max") => self.n2_max = u()?,
            ("grid", "axis1") => self.axis1.name = value.to_string(),
            ("grid", "axis1-min") => self.axis1.min = f()?,
            ("grid", "axis1-max") => self.axis1.max = f()?,
            ("grid", "axis1-count") => self.axis1.count = value.parse()?,
            ("grid", "axis2") => self.axis2.name = value.to_string(),
            ("grid", "axis2-min") => self.axis2.min = f()?,
            ("grid", "axis2-max") => self.axis2.max = f()?,
            ("grid", "axis2-count") => self.axis2.count = value.parse()?,
            ("grid", "fix") => parse_fixed(value, &mut self.fixed)?,
            ("evolve", "tau") => self.tau = Some(f()?),
            ("evolve", "t") => self.t = Some(f()?),
            ("verify", "seed") => self.seed = value.parse()?,
            ("verify", "cases") => self.cases = Some(value.parse()?),
            ("output", "out") => self.out = Some(PathBuf::from(value)),
            ("output", "format") => {
                self.format = match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    other => bail!("format must be csv or json, got {other:?}"),
                }
            }
            ("output", "normalize") => self.normalize = value.parse()?,
            ("output", "coords") => {
                self.coords = match value {
                    "normal" => Coords::Normal,
                    "original" => Coords::Original,
                    other => bail!("coords must be normal or original, got {other:?}"),
                }
            }
            _ => bail!("unknown key {key:?} in section [{section}]"),
        }
        Ok(())
    }

    /// Validate ranges that the library cannot see (grid shape, axes).
    pub fn validate_grid(&self) -> Result<()> {
        for axis in [&self.axis1, &self.axis2] {
            if axis.count < 1 {
                bail!("grid counts >= 1 violated: axis {} has count {}", axis.name, axis.count);
            }
            if !axis.min.is_finite() || !axis.max.is_finite() {
                bail!("grid range must be finite on axis {}", axis.name);
            }
        }
        if axis_slot(&self.axis1.name).is_none() {
            bail!("unknown axis name {:?}", self.axis1.name);
        }
        if axis_slot(&self.axis2.name).is_none() {
            bail!("unknown axis name {:?}", self.axis2.name);
        }
        if axis_slot(&self.axis1.name) == axis_slot(&self.axis2.name) {
            bail!("the two plotted axes must differ");
        }
        for name in self.fixed.keys() {
            if axis_slot(name).is_none() {
                bail!("unknown fixed coordinate {name:?}");
            }
        }
        Ok(())
    }

    /// Provenance lines embedded as comments in CSV output.
    pub fn provenance(&self, command: &str, extra: &[String]) -> Vec<String> {
        let mut lines = vec![
            format!("ncphase {command}"),
            format!(
                "hbar={} mu={} nu={} backend={} tolerance={}",
                self.hbar, self.mu, self.nu, self.backend, self.tolerance
            ),
            format!(
                "m1={} m2={} c1={} c2={} c3={}",
                self.m1, self.m2, self.c1, self.c2, self.c3
            ),
        ];
        lines.extend(extra.iter().cloned());
        lines
    }
}

/// Map an axis name to its slot among (x1, x2, p1, p2). Normal-coordinate
/// names (y, q) and physical names (X, P) address the same four slots.
pub fn axis_slot(name: &str) -> Option<usize> {
    match name.to_lowercase().as_str() {
        "y1" | "x1" => Some(0),
        "y2" | "x2" => Some(1),
        "q1" | "p1" => Some(2),
        "q2" | "p2" => Some(3),
        _ => None,
    }
}
