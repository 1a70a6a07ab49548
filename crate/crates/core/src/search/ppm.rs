//! A simplified order-3 PPM model used as a mutation sampler.
//!
//! Counts are collected for every context of order 0 to 3 in the training
//! text. Sampling starts at the longest available context and escapes with
//! method-C weights (`D / (T + D)` for `T` counted symbols of `D` kinds) to
//! lower orders, ending in a uniform distribution over the alphabet. Every
//! alphabet symbol therefore has positive probability in every context.
//! There is no exclusion and the model is not updated while sampling.

use std::collections::HashMap;

use rand::Rng;

use crate::alphabet::Alphabet;

pub const MAX_ORDER: usize = 3;

#[derive(Clone, Debug, Default)]
struct Counts {
    symbols: Vec<(u8, u32)>,
    total: u32,
}

impl Counts {
    fn add(&mut self, b: u8) {
        match self.symbols.iter_mut().find(|(s, _)| *s == b) {
            Some((_, c)) => *c += 1,
            None => self.symbols.push((b, 1)),
        }
        self.total += 1;
    }

    fn count(&self, b: u8) -> u32 {
        self.symbols
            .iter()
            .find(|(s, _)| *s == b)
            .map_or(0, |&(_, c)| c)
    }

    fn escape_weight(&self) -> u32 {
        self.symbols.len() as u32
    }
}

fn context_key(history: &[u8], order: usize) -> u32 {
    history[history.len() - order..]
        .iter()
        .fold(0u32, |k, &b| (k << 8) | b as u32)
}

#[derive(Clone, Debug)]
pub struct PpmModel {
    /// One table per order, keyed by the packed preceding bytes.
    tables: Vec<HashMap<u32, Counts>>,
    alphabet: Alphabet,
}

impl PpmModel {
    /// Trains over the full byte alphabet.
    pub fn train(source: &[u8]) -> Self {
        Self::train_with_alphabet(source, Alphabet::bytes())
    }

    pub fn train_with_alphabet(source: &[u8], alphabet: Alphabet) -> Self {
        let mut tables = vec![HashMap::new(); MAX_ORDER + 1];
        for (i, &b) in source.iter().enumerate() {
            for (order, table) in tables.iter_mut().enumerate() {
                if order > i {
                    break;
                }
                table
                    .entry(context_key(&source[..i], order))
                    .or_insert_with(Counts::default)
                    .add(b);
            }
        }
        PpmModel { tables, alphabet }
    }

    fn counts(&self, history: &[u8], order: usize) -> Option<&Counts> {
        if order > history.len() {
            return None;
        }
        self.tables[order].get(&context_key(history, order))
    }

    /// Probability of `symbol` following `history` under the sampling
    /// distribution.
    pub fn probability(&self, history: &[u8], symbol: u8) -> f64 {
        let mut reach = 1.0;
        let mut p = 0.0;
        for order in (0..=MAX_ORDER.min(history.len())).rev() {
            if let Some(c) = self.counts(history, order) {
                let denom = (c.total + c.escape_weight()) as f64;
                p += reach * c.count(symbol) as f64 / denom;
                reach *= c.escape_weight() as f64 / denom;
            }
        }
        if self.alphabet.contains(symbol) {
            p += reach / self.alphabet.size() as f64;
        }
        p
    }

    fn sample_next<R: Rng + ?Sized>(&self, history: &[u8], rng: &mut R) -> u8 {
        for order in (0..=MAX_ORDER.min(history.len())).rev() {
            let Some(c) = self.counts(history, order) else {
                continue;
            };
            let mut pick = rng.random_range(0..c.total + c.escape_weight());
            if pick < c.total {
                for &(s, n) in &c.symbols {
                    if pick < n {
                        return s;
                    }
                    pick -= n;
                }
            }
        }
        self.alphabet.random_symbol(rng)
    }

    /// Samples `length` bytes continuing `prefix`. The prefix only supplies
    /// the initial contexts; it is not learned from.
    pub fn sample<R: Rng + ?Sized>(&self, prefix: &[u8], length: usize, rng: &mut R) -> Vec<u8> {
        let keep = prefix.len().min(MAX_ORDER);
        let mut history = prefix[prefix.len() - keep..].to_vec();
        for _ in 0..length {
            let b = self.sample_next(&history, rng);
            history.push(b);
        }
        history.split_off(keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_length_sample_is_empty() {
        let m = PpmModel::train(b"anything");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(m.sample(b"any", 0, &mut rng).is_empty());
    }

    #[test]
    fn repeated_symbol_is_predicted() {
        let source = vec![b'a'; 1000];
        let m = PpmModel::train(&source);
        let p = m.probability(b"aaa", b'a');
        assert!(p > 0.99, "{p}");
        // Order-3 context "aaa" has T = 997, D = 1; lower orders add more mass.
        assert!(p >= 997.0 / 998.0);
    }

    #[test]
    fn empty_model_is_uniform() {
        let m = PpmModel::train(b"");
        for b in 0..=255u8 {
            assert_eq!(m.probability(b"xyz", b), 1.0 / 256.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut hist = [0usize; 256];
        for b in m.sample(b"", 256 * 400, &mut rng) {
            hist[b as usize] += 1;
        }
        // 400 expected per bucket, sd 20.
        assert!(hist.iter().all(|&h| (250..=550).contains(&h)));
    }

    #[test]
    fn every_byte_is_possible_everywhere() {
        let m = PpmModel::train(b"the cat sat on the mat with the hat");
        for ctx in [&b""[..], b"t", b"th", b"the", b"zzz", b"at "] {
            let total: f64 = (0..=255u8).map(|b| m.probability(ctx, b)).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((0..=255u8).all(|b| m.probability(ctx, b) > 0.0));
        }
    }

    #[test]
    fn restricted_alphabet_stays_inside() {
        let alphabet = Alphabet::from_symbols([0, 1]).unwrap();
        let m = PpmModel::train_with_alphabet(&[0, 1, 1, 0, 1], alphabet.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = m.sample(&[1, 0, 1], 500, &mut rng);
        assert!(alphabet.covers(&out));
        let total: f64 = [0u8, 1].iter().map(|&b| m.probability(&[0, 1], b)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
