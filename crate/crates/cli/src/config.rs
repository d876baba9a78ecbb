//! Run configuration: a `key=value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dmsc_analytics::LdThreshold;
use dmsc_bfv::HeParams;
use dmsc_market::TransportKind;

use crate::error::{CliError, Result};

/// Keys a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "seed", "repeat", "verify", "transport", "workload", "backend", "M", "N", "makers", "range_bits", "half_width",
    "rows", "chunk", "batch", "data", "model", "he_n", "threshold", "out", "results",
];

/// Raw settings, later entries override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", i + 1)))?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(CliError::Config(format!("config line {}: unknown key `{k}`", i + 1)));
            }
            map.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Settings(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| CliError::Config(format!("`{key}`: cannot parse `{v}`: {e}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workload {
    Ld,
    Lr,
}

impl FromStr for Workload {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ld" => Ok(Workload::Ld),
            "lr" => Ok(Workload::Lr),
            _ => Err(format!("unknown workload `{s}` (expected ld or lr)")),
        }
    }
}

impl Workload {
    pub fn name(self) -> &'static str {
        match self {
            Workload::Ld => "ld",
            Workload::Lr => "lr",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub workload: Workload,
    pub backend: String,
    /// LD instances; defaults to the data row count, or 10.
    pub m: Option<usize>,
    /// Bound on each pooled LD population.
    pub n: u64,
    pub makers: usize,
    pub range_bits: u32,
    pub half_width: f64,
    /// LR rows to score (all when unset).
    pub rows: Option<usize>,
    /// LR rows per session.
    pub chunk: usize,
    pub batch: bool,
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub he_params: HeParams,
    pub threshold: LdThreshold,
    pub seed: u64,
    pub repeat: usize,
    pub verify: bool,
    pub transport: TransportKind,
    /// Transcript destination.
    pub out: Option<PathBuf>,
    /// Per-item results destination.
    pub results: Option<PathBuf>,
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("`{key}`: `{v}` is not a boolean"))),
    }
}

fn parse_threshold(v: &str) -> Result<LdThreshold> {
    let bad = || CliError::Config(format!("`threshold`: `{v}` is not a rational num/den"));
    let (n, d) = v.split_once('/').unwrap_or((v, "1"));
    let n: u64 = n.trim().parse().map_err(|_| bad())?;
    let d: u64 = d.trim().parse().map_err(|_| bad())?;
    LdThreshold::new(n, d).map_err(|e| CliError::Config(format!("`threshold`: {e}")))
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let workload: Workload = s.parse_or("workload", Workload::Ld)?;
        let backend = s.get("backend").unwrap_or("gc").to_string();
        let bool_of = |k: &str, d: bool| s.get(k).map_or(Ok(d), |v| parse_bool(k, v));
        let he_n: usize = s.parse_or("he_n", 8192)?;
        let he_params = HeParams::preset(he_n).map_err(|e| CliError::Config(format!("`he_n`: {e}")))?;
        let transport = match s.get("transport") {
            None => TransportKind::InProc,
            Some(v) => v.parse().map_err(|e| CliError::Config(format!("`transport`: {e}")))?,
        };
        let cfg = RunConfig {
            workload,
            backend,
            m: s.get("M").map(|_| s.parse_or("M", 0)).transpose()?,
            n: s.parse_or("N", 200)?,
            makers: s.parse_or("makers", 1)?,
            range_bits: s.parse_or("range_bits", 10)?,
            half_width: s.parse_or("half_width", 8.0)?,
            rows: s.get("rows").map(|_| s.parse_or("rows", 0)).transpose()?,
            chunk: s.parse_or("chunk", 64)?,
            batch: bool_of("batch", false)?,
            data: s.get("data").map(PathBuf::from),
            model: s.get("model").map(PathBuf::from),
            he_params,
            threshold: s.get("threshold").map_or(Ok(LdThreshold::default()), parse_threshold)?,
            seed: s.parse_or("seed", 0)?,
            repeat: s.parse_or("repeat", 10)?,
            verify: bool_of("verify", true)?,
            transport,
            out: s.get("out").map(PathBuf::from),
            results: s.get("results").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that need no data. Each message names the constraint.
    pub fn validate(&self) -> Result<()> {
        let reject = |m: &str| Err(CliError::Config(m.to_string()));
        if self.repeat == 0 {
            return reject("`repeat` must be at least 1");
        }
        if self.m == Some(0) {
            return reject("`M` must be at least 1");
        }
        if self.makers == 0 {
            return reject("`makers` must be at least 1");
        }
        if self.n < 2 {
            return reject("`N` must be at least 2 so that allele margins can be positive");
        }
        if self.chunk == 0 {
            return reject("`chunk` must be at least 1");
        }
        if self.rows == Some(0) {
            return reject("`rows` must be at least 1");
        }
        if !(1..=16).contains(&self.range_bits) {
            return reject("`range_bits` must be between 1 and 16");
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return reject("`half_width` must be positive");
        }
        if self.batch && self.backend != "he" {
            return reject("`batch` applies only to the he backend");
        }
        if self.batch && self.workload != Workload::Ld {
            return reject("`batch` applies only to the ld workload");
        }
        Ok(())
    }
}
