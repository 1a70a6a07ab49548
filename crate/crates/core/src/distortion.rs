//! Hamming, Euclidean and edit distortion over byte sequences.
//!
//! Values are kept as integers in each metric's native unit. For the
//! Euclidean metric that unit is the *squared* distance so that distortion
//! spheres have exact integer radii; [`Distortion::display_value`] takes the
//! square root for reporting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Hamming,
    Euclidean,
    Edit,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Hamming, Metric::Euclidean, Metric::Edit];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Hamming => "hamming",
            Metric::Euclidean => "euclidean",
            Metric::Edit => "edit",
        }
    }

    /// Whether representations must keep the length of the source object.
    pub fn preserves_length(self) -> bool {
        !matches!(self, Metric::Edit)
    }

    pub fn distortion(self, x: &[u8], y: &[u8]) -> Result<Distortion> {
        let raw = match self {
            Metric::Hamming => hamming(x, y)?,
            Metric::Euclidean => euclidean_sq(x, y)?,
            Metric::Edit => edit(x, y),
        };
        Ok(Distortion::new(self, raw))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(Metric::Hamming),
            "euclidean" => Ok(Metric::Euclidean),
            "edit" => Ok(Metric::Edit),
            other => Err(Error::Domain(format!("unknown metric {other:?}"))),
        }
    }
}

/// A distortion value in the native integer unit of its metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Distortion {
    metric: Metric,
    raw: u64,
}

impl Distortion {
    pub fn new(metric: Metric, raw: u64) -> Self {
        Distortion { metric, raw }
    }

    pub fn metric(self) -> Metric {
        self.metric
    }

    /// Hamming/edit count, or squared distance for Euclidean.
    pub fn raw(self) -> u64 {
        self.raw
    }

    /// The distortion as reported to users: `sqrt(raw)` for Euclidean.
    pub fn display_value(self) -> f64 {
        match self.metric {
            Metric::Euclidean => (self.raw as f64).sqrt(),
            _ => self.raw as f64,
        }
    }
}

fn same_length(x: &[u8], y: &[u8]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::IncomparableLengths {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Number of positions where `x` and `y` differ.
pub fn hamming(x: &[u8], y: &[u8]) -> Result<u64> {
    same_length(x, y)?;
    Ok(x.iter().zip(y).filter(|(a, b)| a != b).count() as u64)
}

/// Exact squared Euclidean distance between byte vectors.
pub fn euclidean_sq(x: &[u8], y: &[u8]) -> Result<u64> {
    same_length(x, y)?;
    Ok(x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = a as i64 - b as i64;
            (d * d) as u64
        })
        .sum())
}

/// Unit-cost Levenshtein distance, two-row dynamic program.
pub fn edit(x: &[u8], y: &[u8]) -> u64 {
    let (long, short) = if x.len() >= y.len() { (x, y) } else { (y, x) };
    if short.is_empty() {
        return long.len() as u64;
    }
    let mut prev: Vec<u64> = (0..=short.len() as u64).collect();
    let mut cur = vec![0u64; short.len() + 1];
    for (i, &a) in long.iter().enumerate() {
        cur[0] = i as u64 + 1;
        for (j, &b) in short.iter().enumerate() {
            let substitute = prev[j] + u64::from(a != b);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[short.len()]
}
