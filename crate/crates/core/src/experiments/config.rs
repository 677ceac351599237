//! Experiment configuration and its canonical `key=value` text form.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GeoError, Result};
use crate::geometry::GeoParams;
use crate::tessellation::{build_tessellations, default_aspect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    /// 1-choice process: hitting times, k-connectivity, Hamilton construction.
    One,
    /// Online 2-choice rule g and the always-first baseline.
    Online,
    /// Offline choice-set construction at 2τ₂.
    Offline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointSchedule {
    /// τ·{1, 1.1, 1.5, 2, 4}.
    Geometric,
    /// τ·{1.0, 1.1, …, 4.0}.
    All,
}

impl CheckpointSchedule {
    /// Checkpoint factors in tenths of τ.
    pub fn tenths(self) -> Vec<usize> {
        match self {
            CheckpointSchedule::Geometric => vec![10, 11, 15, 20, 40],
            CheckpointSchedule::All => (10..=40).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, $($name:literal => $v:expr),+) => {
        impl FromStr for $ty {
            type Err = GeoError;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($v),)+
                    _ => Err(GeoError::Config(format!(concat!("unknown ", $what, " '{}'"), s))),
                }
            }
        }

        impl $ty {
            pub fn as_str(self) -> &'static str {
                $(if self == $v { return $name; })+
                unreachable!()
            }
        }
    };
}

keyword_enum!(ProcessKind, "process", "one" => ProcessKind::One, "online" => ProcessKind::Online, "offline" => ProcessKind::Offline);
keyword_enum!(CheckpointSchedule, "checkpoint schedule", "geometric" => CheckpointSchedule::Geometric, "all" => CheckpointSchedule::All);
keyword_enum!(OutputFormat, "format", "csv" => OutputFormat::Csv, "json" => OutputFormat::Json);

/// Everything that determines a batch of trials, plus where to put it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    /// Radii; more than one gives a sweep.
    pub r: Vec<f64>,
    pub k: Vec<usize>,
    /// Tessellation aspect; `None` means the default for d.
    pub c: Option<f64>,
    /// Fullness threshold override for every construction.
    pub m: Option<usize>,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub process: ProcessKind,
    pub checkpoints: CheckpointSchedule,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Worker threads; `None` leaves the choice to rayon.
    pub threads: Option<usize>,
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 2,
            r: vec![0.03],
            k: vec![1],
            c: None,
            m: None,
            epsilon: 0.5,
            trials: 100,
            seed: 0,
            process: ProcessKind::One,
            checkpoints: CheckpointSchedule::Geometric,
            out: None,
            format: OutputFormat::Csv,
            threads: None,
            trace: false,
        }
    }
}

/// Keys in canonical order. The ones after `checkpoints` only say how to run
/// and where to write, so they are left out of the hash.
pub const CONFIG_KEYS: [&str; 14] = [
    "d", "r", "k", "c", "M", "epsilon", "trials", "seed", "process", "checkpoints", "format", "out", "threads", "trace",
];
const HASHED_KEYS: usize = 10;

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| GeoError::Config(format!("invalid value '{v}' for key '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| parse(key, x)).collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses `key=value` lines over the defaults. Blank lines and `#`
    /// comments are skipped; unknown keys are errors.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GeoError::Config(format!("line {}: expected key=value, got '{line}'", no + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let auto = value == "auto";
        match key {
            "d" => self.d = parse(key, value)?,
            "r" => self.r = parse_list(key, value)?,
            "k" => self.k = parse_list(key, value)?,
            "c" => self.c = if auto { None } else { Some(parse(key, value)?) },
            "M" => self.m = if auto { None } else { Some(parse(key, value)?) },
            "epsilon" => self.epsilon = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "process" => self.process = value.parse()?,
            "checkpoints" => self.checkpoints = value.parse()?,
            "format" => self.format = value.parse()?,
            "out" => self.out = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "threads" => self.threads = if auto { None } else { Some(parse(key, value)?) },
            "trace" => self.trace = parse(key, value)?,
            _ => return Err(GeoError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        let opt = |o: Option<String>| o.unwrap_or_else(|| "auto".into());
        match key {
            "d" => self.d.to_string(),
            "r" => join(&self.r),
            "k" => join(&self.k),
            "c" => opt(self.c.map(|c| c.to_string())),
            "M" => opt(self.m.map(|m| m.to_string())),
            "epsilon" => self.epsilon.to_string(),
            "trials" => self.trials.to_string(),
            "seed" => self.seed.to_string(),
            "process" => self.process.as_str().into(),
            "checkpoints" => self.checkpoints.as_str().into(),
            "format" => self.format.as_str().into(),
            "out" => self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            "threads" => opt(self.threads.map(|t| t.to_string())),
            "trace" => self.trace.to_string(),
            _ => unreachable!("not a config key: {key}"),
        }
    }

    /// One `key=value` line per key, in [`CONFIG_KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(s, "{key}={}", self.value_of(key));
        }
        s
    }

    /// The result-determining keys only, in canonical form.
    pub fn to_hashed_text(&self) -> String {
        let mut s = String::new();
        for key in &CONFIG_KEYS[..HASHED_KEYS] {
            let _ = writeln!(s, "{key}={}", self.value_of(key));
        }
        s
    }

    /// SHA-256 of [`Self::to_hashed_text`], in hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_hashed_text()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Aspect actually used for tessellations.
    pub fn aspect(&self) -> f64 {
        self.c.unwrap_or_else(|| default_aspect(self.d))
    }

    pub fn max_k(&self) -> usize {
        self.k.iter().copied().max().unwrap_or(1)
    }

    /// Checks ranges and that every radius admits the tessellations.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GeoError::Config(msg));
        if self.r.is_empty() || self.k.is_empty() {
            return bad("r and k need at least one value".into());
        }
        if self.k.contains(&0) {
            return bad("every k must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon = {} must lie in (0, 1)", self.epsilon));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        for &r in &self.r {
            let params = GeoParams::new(self.d, r).map_err(|e| GeoError::Config(e.to_string()))?;
            params
                .loglog_inv_r()
                .map_err(|_| GeoError::Config(format!("r = {r} must be below 1/e")))?;
            build_tessellations(&params, self.aspect())?;
        }
        Ok(())
    }
}
