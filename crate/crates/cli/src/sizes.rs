//! Pair and per-pair comparison counts, including the `auto` defaults
//! `m = ceil(d^2 log n)` and `K = 50 ceil(d^2 log^2 n / n^2)`.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

/// A count given explicitly or derived from `n` and `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "Raw")]
pub enum Size {
    Fixed(u64),
    Auto,
}

/// Config-file spelling: a bare number or a string.
#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Number(f64),
    Text(String),
}

impl TryFrom<Raw> for Size {
    type Error = String;

    fn try_from(raw: Raw) -> Result<Self, String> {
        match raw {
            Raw::Number(v) => v.to_string().parse(),
            Raw::Text(s) => s.parse(),
        }
    }
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Size::Auto);
        }
        match s.parse::<u64>() {
            Ok(v) if v > 0 => Ok(Size::Fixed(v)),
            _ => Err(format!("expected a positive count or `auto`, got `{s}`")),
        }
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Size::Fixed(v) => write!(f, "{v}"),
            Size::Auto => f.write_str("auto"),
        }
    }
}

/// Base of the logarithm in the `auto` formulas; natural by default.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "Raw")]
pub struct LogBase(pub f64);

impl TryFrom<Raw> for LogBase {
    type Error = String;

    fn try_from(raw: Raw) -> Result<Self, String> {
        match raw {
            Raw::Number(v) => v.to_string().parse(),
            Raw::Text(s) => s.parse(),
        }
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase(std::f64::consts::E)
    }
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        x.ln() / self.0.ln()
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "e" {
            return Ok(LogBase::default());
        }
        match s.parse::<f64>() {
            Ok(b) if b > 1.0 && b.is_finite() => Ok(LogBase(b)),
            _ => Err(format!("log base must be `e` or a number above 1, got `{s}`")),
        }
    }
}

pub fn auto_pairs(n: usize, d: usize, base: LogBase) -> u64 {
    ((d * d) as f64 * base.log(n as f64)).ceil() as u64
}

pub fn auto_trials(n: usize, d: usize, base: LogBase) -> u64 {
    let l = base.log(n as f64);
    50 * ((d * d) as f64 * l * l / (n * n) as f64).ceil() as u64
}

/// Resolves `m`, capped at the number of distinct pairs.
pub fn resolve_pairs(size: Size, n: usize, d: usize, base: LogBase) -> usize {
    let m = match size {
        Size::Fixed(v) => v,
        Size::Auto => auto_pairs(n, d, base),
    };
    let all = flrank::sampling::pair_count(n) as u64;
    if size == Size::Auto && m > all {
        log::info!("auto m = {m} exceeds the {all} available pairs; using all of them");
        return all as usize;
    }
    m as usize
}

pub fn resolve_trials(size: Size, n: usize, d: usize, base: LogBase) -> u64 {
    match size {
        Size::Fixed(v) => v,
        Size::Auto => auto_trials(n, d, base).max(1),
    }
}
