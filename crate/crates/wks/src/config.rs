//! Flat `key = value` run configuration.
//!
//! Keys carry a section prefix (`process.`, `sampling.`, `target.`,
//! `search.`, `mc.`, `sweep.`). A config file is read first and command-line
//! flags override it. Every value a command reads, including defaults, is
//! recorded so the output header can echo the resolved configuration.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{usage, CliError, Result};

/// Known keys and the flag that sets each one.
pub const KEYS: &[(&str, &str)] = &[
    ("process.B0", "--B0"),
    ("process.lambda", "--lambda"),
    ("process.cx", "--cx"),
    ("process.family", "--family"),
    ("process.spectrum", "--spectrum"),
    ("sampling.omega", "--omega"),
    ("sampling.T", "--T"),
    ("sampling.t", "--t"),
    ("sampling.s", "--s"),
    ("sampling.n", "--n"),
    ("sampling.z", "--z"),
    ("sampling.points", "--points"),
    ("sampling.samples", "--samples"),
    ("target.p", "--p"),
    ("target.eps", "--eps"),
    ("target.delta", "--delta"),
    ("target.theta", "--theta"),
    ("search.cap", "--cap"),
    ("search.relaxed", "--relaxed"),
    ("mc.seed", "--seed"),
    ("mc.trials", "--trials"),
    ("mc.grid", "--grid"),
    ("mc.metric", "--metric"),
    ("sweep.eps", "--eps-range"),
    ("sweep.delta", "--delta-range"),
    ("sweep.p", "--p-range"),
];

fn flag_for(key: &str) -> &'static str {
    KEYS.iter().find(|(k, _)| *k == key).map_or("", |(_, f)| f)
}

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeMap<String, String>>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut settings = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| usage!("{origin}:{}: expected key = value, got '{line}'", i + 1))?;
            let key = key.trim();
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(usage!("{origin}:{}: unknown key '{key}'", i + 1));
            }
            settings.values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(settings)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set<V: Display>(&mut self, key: &str, value: V) {
        debug_assert!(KEYS.iter().any(|(k, _)| *k == key), "unknown key {key}");
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn set_opt<V: Display>(&mut self, key: &str, value: Option<V>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn record(&self, key: &str, value: &str) {
        self.used.borrow_mut().insert(key.to_string(), value.to_string());
    }

    /// Records a derived value in the echo under `key`.
    pub fn note<V: Display>(&self, key: &str, value: V) {
        self.record(key, &value.to_string());
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => {
                let v = raw.parse().map_err(|_| usage!("invalid value '{raw}' for {} ({key})", flag_for(key)))?;
                self.record(key, raw);
                Ok(Some(v))
            }
        }
    }

    pub fn get_or<T: FromStr + Display>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, &default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| usage!("missing required {} (or {key} in --config)", flag_for(key)))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        self.get_or(key, false)
    }

    /// Resolved values read so far, sorted by key.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.used.borrow().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

/// Inclusive range `lo:hi:steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.hi } else { self.lo + h * i as f64 }).collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(format!("expected lo:hi:steps, got '{s}'"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad lower end in '{s}'"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad upper end in '{s}'"))?;
        let steps: usize = steps.parse().map_err(|_| format!("bad step count in '{s}'"))?;
        if steps == 0 || !(hi >= lo) {
            return Err(format!("range '{s}' needs lo <= hi and at least one step"));
        }
        Ok(Range { lo, hi, steps })
    }
}

impl Display for Range {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}
