//! Representation alphabets.

use rand::Rng;

use crate::error::{Error, Result};

/// The symbols a representation may use. Either all 256 byte values or a
/// restricted sorted set, e.g. the symbols occurring in the source object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<u8>,
}

impl Alphabet {
    pub fn bytes() -> Self {
        Alphabet {
            symbols: (0..=255).collect(),
        }
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = u8>) -> Result<Self> {
        let mut symbols: Vec<u8> = symbols.into_iter().collect();
        symbols.sort_unstable();
        symbols.dedup();
        if symbols.len() < 2 {
            return Err(Error::Domain(format!(
                "alphabet needs at least two symbols, got {symbols:?}"
            )));
        }
        Ok(Alphabet { symbols })
    }

    /// Symbols occurring in `source` plus `extras`.
    pub fn auto(source: &[u8], extras: &[u8]) -> Result<Self> {
        Self::from_symbols(source.iter().chain(extras).copied())
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_full(&self) -> bool {
        self.symbols.len() == 256
    }

    pub fn contains(&self, b: u8) -> bool {
        self.symbols.binary_search(&b).is_ok()
    }

    pub fn covers(&self, data: &[u8]) -> bool {
        data.iter().all(|&b| self.contains(b))
    }

    pub fn random_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        self.symbols[rng.random_range(0..self.symbols.len())]
    }

    /// Closest symbol to `value`, ties towards the smaller one.
    pub fn nearest(&self, value: i64) -> u8 {
        *self
            .symbols
            .iter()
            .min_by_key(|&&s| ((s as i64 - value).abs(), s))
            .unwrap()
    }

    /// Comma-separated decimal symbols, or `bytes` for the full alphabet.
    pub fn describe(&self) -> String {
        if self.is_full() {
            return "bytes".to_string();
        }
        self.symbols
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text == "bytes" {
            return Ok(Self::bytes());
        }
        let symbols = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u8>()
                    .map_err(|_| Error::Domain(format!("bad alphabet symbol {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_symbols(symbols)
    }
}
