//! Line-oriented checkpoint files.
//!
//! ```text
//! ard-checkpoint v1 <seed> <iteration> <rng-state-hex>
//! <hex payload> <rate bits, 9 decimals> <native distortion>
//! ...
//! ```
//!
//! An empty payload is written as `-`. Rates are re-evaluated on load and
//! checked against the stored value, so the restored trade-offs are the
//! exact floating-point values the search computed. Candidate provenance is
//! not stored; restored members are tagged `Input` if they equal the source
//! and `Mutation` otherwise.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::pareto::{Objective, Pool, Provenance};

const MAGIC: &str = "ard-checkpoint";
const VERSION: &str = "v1";

/// Everything needed to continue a search bit-identically.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub seed: u64,
    pub iteration: u64,
    pub rng: ChaCha8Rng,
    pub pool: Pool,
}

/// Seed, stream and word position of the generator as one hex string.
pub fn rng_state_hex(rng: &ChaCha8Rng) -> String {
    let mut bytes = rng.get_seed().to_vec();
    bytes.extend_from_slice(&rng.get_stream().to_be_bytes());
    bytes.extend_from_slice(&rng.get_word_pos().to_be_bytes());
    hex::encode(bytes)
}

pub fn rng_from_hex(text: &str) -> Result<ChaCha8Rng> {
    let bytes = hex::decode(text).map_err(|e| Error::Checkpoint(format!("rng state: {e}")))?;
    if bytes.len() != 32 + 8 + 16 {
        return Err(Error::Checkpoint(format!(
            "rng state has {} bytes, expected 56",
            bytes.len()
        )));
    }
    let seed: [u8; 32] = bytes[..32].try_into().unwrap();
    let stream = u64::from_be_bytes(bytes[32..40].try_into().unwrap());
    let word_pos = u128::from_be_bytes(bytes[40..56].try_into().unwrap());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng.set_word_pos(word_pos);
    Ok(rng)
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{MAGIC} {VERSION} {} {} {}\n",
            self.seed,
            self.iteration,
            rng_state_hex(&self.rng)
        );
        for c in &self.pool.members {
            let payload = if c.payload.is_empty() {
                "-".to_string()
            } else {
                hex::encode(&c.payload)
            };
            out.push_str(&format!(
                "{payload} {:.9} {}\n",
                c.tradeoff.rate, c.tradeoff.distortion
            ));
        }
        out
    }

    pub fn parse(text: &str, objective: &Objective) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Checkpoint("empty file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != MAGIC {
            return Err(Error::Checkpoint(format!("bad header {header:?}")));
        }
        if fields[1] != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", fields[1])));
        }
        let number = |s: &str, what: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::Checkpoint(format!("bad {what} {s:?}")))
        };
        let seed = number(fields[2], "seed")?;
        let iteration = number(fields[3], "iteration")?;
        let rng = rng_from_hex(fields[4])?;

        let mut members = Vec::new();
        for (lineno, line) in lines.enumerate().map(|(i, l)| (i + 2, l)) {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Checkpoint(format!("line {lineno}: expected 3 fields")));
            }
            let payload = if parts[0] == "-" {
                Vec::new()
            } else {
                hex::decode(parts[0])
                    .map_err(|e| Error::Checkpoint(format!("line {lineno}: payload: {e}")))?
            };
            let rate: f64 = parts[1]
                .parse()
                .map_err(|_| Error::Checkpoint(format!("line {lineno}: bad rate")))?;
            let distortion = number(parts[2], "distortion")?;
            let provenance = if payload == objective.source() {
                Provenance::Input
            } else {
                Provenance::Mutation
            };
            let candidate = objective.candidate(payload, provenance)?;
            let t = candidate.tradeoff;
            let tolerance = 1e-8 * t.rate.abs().max(1.0);
            if t.distortion != distortion || (t.rate - rate).abs() > tolerance {
                return Err(Error::Checkpoint(format!(
                    "line {lineno}: stored trade-off ({rate}, {distortion}) does not match re-evaluation ({}, {})",
                    t.rate, t.distortion
                )));
            }
            members.push(candidate);
        }
        if members.is_empty() {
            return Err(Error::Checkpoint("no candidates".into()));
        }
        Ok(Checkpoint {
            seed,
            iteration,
            rng,
            pool: Pool::new(members),
        })
    }

    /// Writes to a sibling temporary file, then renames over `path`.
    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = Path::new(&tmp);
        {
            let mut f = fs::File::create(tmp).map_err(|e| Error::io(tmp, e))?;
            f.write_all(self.to_text().as_bytes())
                .and_then(|_| f.sync_all())
                .map_err(|e| Error::io(tmp, e))?;
        }
        fs::rename(tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, objective: &Objective) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, objective)
    }
}
