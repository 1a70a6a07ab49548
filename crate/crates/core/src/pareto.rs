//! Trade-offs, dominance, pool reduction and rate-distortion curves.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::codec::{codelength, conditional_codelength_with, CodeLength};
use crate::distortion::{Distortion, Metric};
use crate::error::Result;
use crate::spheres::{log_sphere, universal_int_codelength};

/// Rate in bits and distortion in the metric's native integer unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeOff {
    pub rate: f64,
    pub distortion: u64,
}

impl TradeOff {
    pub fn new(rate: f64, distortion: u64) -> Self {
        TradeOff { rate, distortion }
    }

    /// Lexicographic order on (rate, distortion).
    fn lex_cmp(&self, other: &TradeOff) -> Ordering {
        self.rate
            .total_cmp(&other.rate)
            .then(self.distortion.cmp(&other.distortion))
    }
}

/// `a ≼ b`: `a` is no worse than `b` in both objectives. Reflexive.
pub fn dominates(a: &TradeOff, b: &TradeOff) -> bool {
    a.rate <= b.rate && a.distortion <= b.distortion
}

/// `a ≼ b` and `a ≠ b`.
pub fn strictly_dominates(a: &TradeOff, b: &TradeOff) -> bool {
    dominates(a, b) && a != b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Input,
    Crossover,
    Mutation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub payload: Vec<u8>,
    pub tradeoff: TradeOff,
    pub provenance: Provenance,
}

/// Fenwick tree counting inserted values by rank.
struct RankCounter {
    tree: Vec<usize>,
}

impl RankCounter {
    fn new(size: usize) -> Self {
        RankCounter {
            tree: vec![0; size + 1],
        }
    }

    fn add(&mut self, rank: usize, amount: usize) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += amount;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted values with rank `<= rank`.
    fn count_up_to(&self, rank: usize) -> usize {
        let mut i = rank + 1;
        let mut total = 0;
        while i > 0 {
            total += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        total
    }
}

/// Weakness of every trade-off: the number of entries that strictly
/// dominate it.
///
/// Entries are visited in lexicographic (rate, distortion) order and
/// inserted into a counter keyed by distortion rank; everything already
/// inserted with no larger distortion dominates the current entry. Groups
/// of identical trade-offs are queried before any of them is inserted, so
/// equal trade-offs never count each other. `O(m log m)`.
pub fn weakness_all(tradeoffs: &[TradeOff]) -> Vec<usize> {
    let m = tradeoffs.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| tradeoffs[i].lex_cmp(&tradeoffs[j]));

    let mut levels: Vec<u64> = tradeoffs.iter().map(|t| t.distortion).collect();
    levels.sort_unstable();
    levels.dedup();
    let rank_of = |d: u64| levels.binary_search(&d).unwrap();

    let mut counter = RankCounter::new(levels.len());
    let mut weakness = vec![0; m];
    let mut start = 0;
    while start < m {
        let head = tradeoffs[order[start]];
        let mut end = start + 1;
        while end < m && tradeoffs[order[end]].lex_cmp(&head) == Ordering::Equal {
            end += 1;
        }
        let rank = rank_of(head.distortion);
        let w = counter.count_up_to(rank);
        for &i in &order[start..end] {
            weakness[i] = w;
        }
        counter.add(rank, end - start);
        start = end;
    }
    weakness
}

/// Indices of the zero-weakness entries, in input order.
pub fn front_indices(tradeoffs: &[TradeOff]) -> Vec<usize> {
    weakness_all(tradeoffs)
        .into_iter()
        .enumerate()
        .filter_map(|(i, w)| (w == 0).then_some(i))
        .collect()
}

/// Whether the query point lies in the region dominated by `tradeoffs`.
pub fn in_profile(tradeoffs: &[TradeOff], query: &TradeOff) -> bool {
    tradeoffs.iter().any(|t| dominates(t, query))
}

/// Area of the dominated region inside the box `[0, ref_rate] x [0, ref_distortion]`.
pub fn hypervolume(tradeoffs: &[TradeOff], ref_rate: f64, ref_distortion: f64) -> f64 {
    let mut pts: Vec<TradeOff> = front_indices(tradeoffs)
        .into_iter()
        .map(|i| tradeoffs[i])
        .filter(|t| t.rate <= ref_rate && (t.distortion as f64) <= ref_distortion)
        .collect();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    let mut area = 0.0;
    for (k, p) in pts.iter().enumerate() {
        let next_rate = pts.get(k + 1).map_or(ref_rate, |q| q.rate);
        area += (next_rate - p.rate) * (ref_distortion - p.distortion as f64);
    }
    area
}

/// A finite collection of evaluated candidates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pool {
    pub members: Vec<Candidate>,
}

impl Pool {
    pub fn new(members: Vec<Candidate>) -> Self {
        Pool { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn tradeoffs(&self) -> Vec<TradeOff> {
        self.members.iter().map(|c| c.tradeoff).collect()
    }

    pub fn weakness(&self) -> Vec<usize> {
        weakness_all(&self.tradeoffs())
    }

    /// The zero-weakness members ("models"), in pool order.
    pub fn reduce(&self) -> Pool {
        let keep = front_indices(&self.tradeoffs());
        Pool::new(keep.into_iter().map(|i| self.members[i].clone()).collect())
    }

    /// Drops later members whose payload repeats an earlier one.
    pub fn dedup_payloads(&mut self) {
        let mut seen = HashSet::new();
        self.members.retain(|c| seen.insert(c.payload.clone()));
    }
}

/// The pair of objective functions for one source object, plus everything
/// needed to price the three-part code.
#[derive(Clone, Debug)]
pub struct Objective {
    source: Vec<u8>,
    metric: Metric,
    side: Vec<u8>,
    side_bits: CodeLength,
    alphabet_size: u64,
}

impl Objective {
    /// `alphabet_size` is `|Σ|` for the sphere terms: 256 for raw bytes, or
    /// the size of a restricted representation alphabet.
    pub fn new(source: Vec<u8>, metric: Metric, side: Vec<u8>, alphabet_size: u64) -> Self {
        let side_bits = codelength(&side);
        Objective {
            source,
            metric,
            side,
            side_bits,
            alphabet_size,
        }
    }

    pub fn source(&self) -> &[u8] {
        &self.source
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn side_info(&self) -> &[u8] {
        &self.side
    }

    pub fn alphabet_size(&self) -> u64 {
        self.alphabet_size
    }

    /// Conditional codelength of `y` given the side information.
    pub fn rate(&self, y: &[u8]) -> f64 {
        conditional_codelength_with(y, &self.side, self.side_bits).bits()
    }

    pub fn distortion(&self, y: &[u8]) -> Result<Distortion> {
        self.metric.distortion(&self.source, y)
    }

    pub fn evaluate(&self, y: &[u8]) -> Result<TradeOff> {
        let d = self.distortion(y)?;
        Ok(TradeOff::new(self.rate(y), d.raw()))
    }

    /// Three-part codelength of the source given `y` whose trade-off is
    /// already known: rate + universal code for the distortion + sphere term.
    pub fn three_part_for(&self, y: &[u8], tradeoff: &TradeOff) -> Result<f64> {
        let n = match self.metric {
            Metric::Edit => y.len(),
            _ => self.source.len(),
        } as u64;
        let d = Distortion::new(self.metric, tradeoff.distortion);
        let sphere = log_sphere(d, n, self.alphabet_size)?;
        Ok(tradeoff.rate + universal_int_codelength(d.raw()) + sphere.log2_size)
    }

    pub fn three_part_codelength(&self, y: &[u8]) -> Result<f64> {
        let t = self.evaluate(y)?;
        self.three_part_for(y, &t)
    }

    pub fn candidate(&self, payload: Vec<u8>, provenance: Provenance) -> Result<Candidate> {
        let tradeoff = self.evaluate(&payload)?;
        Ok(Candidate {
            payload,
            tradeoff,
            provenance,
        })
    }
}

/// One point of the approximated rate-distortion and codelength functions.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontPoint {
    pub rate: f64,
    /// Native integer distortion (squared for Euclidean).
    pub distortion: u64,
    /// Distortion in reporting units (square root for Euclidean).
    pub display_distortion: f64,
    pub three_part_codelength: f64,
    pub distortion_to_original: Option<f64>,
    pub payload: Vec<u8>,
}

/// Front points of a pool: one per distinct zero-weakness trade-off, sorted
/// by rate. Distortion is non-increasing along the result.
pub fn curves(pool: &Pool, objective: &Objective, original: Option<&[u8]>) -> Result<Vec<FrontPoint>> {
    let mut models = pool.reduce().members;
    models.sort_by(|a, b| a.tradeoff.lex_cmp(&b.tradeoff));
    models.dedup_by(|b, a| a.tradeoff == b.tradeoff);
    models
        .into_iter()
        .map(|c| {
            let display = Distortion::new(objective.metric(), c.tradeoff.distortion).display_value();
            let to_original = match original {
                Some(o) => Some(objective.metric().distortion(o, &c.payload)?.display_value()),
                None => None,
            };
            Ok(FrontPoint {
                rate: c.tradeoff.rate,
                distortion: c.tradeoff.distortion,
                display_distortion: display,
                three_part_codelength: objective.three_part_for(&c.payload, &c.tradeoff)?,
                distortion_to_original: to_original,
                payload: c.payload,
            })
        })
        .collect()
}

/// Tolerance in bits within which two three-part codelengths tie.
pub const CODELENGTH_TIE_BITS: f64 = 1e-6;

/// The lowest-rate point among those minimising the three-part codelength.
/// `None` for an empty slice.
pub fn minimal_sufficient_statistic(points: &[FrontPoint]) -> Option<&FrontPoint> {
    let best = points
        .iter()
        .map(|p| p.three_part_codelength)
        .fold(f64::INFINITY, f64::min);
    points
        .iter()
        .filter(|p| p.three_part_codelength <= best + CODELENGTH_TIE_BITS)
        .min_by(|a, b| a.rate.total_cmp(&b.rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(rate: f64, d: u64) -> TradeOff {
        TradeOff::new(rate, d)
    }

    fn naive_weakness(ts: &[TradeOff]) -> Vec<usize> {
        ts.iter()
            .map(|y| ts.iter().filter(|z| strictly_dominates(z, y)).count())
            .collect()
    }

    fn pool_of(ts: &[TradeOff]) -> Pool {
        Pool::new(
            ts.iter()
                .enumerate()
                .map(|(i, &tradeoff)| Candidate {
                    payload: (i as u32).to_le_bytes().to_vec(),
                    tradeoff,
                    provenance: Provenance::Mutation,
                })
                .collect(),
        )
    }

    fn point(rate: f64, l: f64) -> FrontPoint {
        FrontPoint {
            rate,
            distortion: 0,
            display_distortion: 0.0,
            three_part_codelength: l,
            distortion_to_original: None,
            payload: Vec::new(),
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&t(1.0, 5), &t(2.0, 6)));
        assert!(dominates(&t(1.0, 5), &t(1.0, 5)));
        assert!(!dominates(&t(1.0, 6), &t(2.0, 5)));
        assert!(!strictly_dominates(&t(1.0, 5), &t(1.0, 5)));
    }

    #[test]
    fn weakness_examples() {
        let ts = [t(1.0, 5), t(2.0, 3), t(3.0, 3), t(2.0, 6)];
        assert_eq!(weakness_all(&ts), vec![0, 0, 1, 2]);
        assert_eq!(weakness_all(&[t(4.0, 4)]), vec![0]);
        assert_eq!(weakness_all(&[t(4.0, 4), t(4.0, 4)]), vec![0, 0]);
    }

    #[test]
    fn reduce_examples() {
        let ts = [t(1.0, 5), t(2.0, 3), t(3.0, 3), t(2.0, 6)];
        assert_eq!(pool_of(&ts).reduce().tradeoffs(), vec![t(1.0, 5), t(2.0, 3)]);
        let single = pool_of(&[t(1.0, 1)]);
        assert_eq!(single.reduce(), single);
        let same = pool_of(&[t(2.0, 2); 3]);
        assert_eq!(same.reduce().len(), 3);
    }

    #[test]
    fn mss_examples() {
        let pts = [point(10.0, 100.0), point(20.0, 90.0), point(30.0, 90.0), point(40.0, 95.0)];
        assert_eq!(minimal_sufficient_statistic(&pts).unwrap().rate, 20.0);
        let one = [point(3.0, 7.0)];
        assert_eq!(minimal_sufficient_statistic(&one).unwrap(), &one[0]);
        assert!(minimal_sufficient_statistic(&[]).is_none());
    }

    #[test]
    fn three_part_at_zero_distortion() {
        let x = b"abracadabra abracadabra".to_vec();
        let z = b"cadabra".to_vec();
        let obj = Objective::new(x.clone(), Metric::Hamming, z.clone(), 256);
        let expected = crate::codec::conditional_codelength(&x, &z).bits() + universal_int_codelength(0);
        assert!((obj.three_part_codelength(&x).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn three_part_hamming_binary() {
        let x = vec![0u8, 1, 0, 1, 1, 0, 0, 1];
        let mut y = x.clone();
        y[0] ^= 1;
        y[5] ^= 1;
        let obj = Objective::new(x, Metric::Hamming, Vec::new(), 2);
        let expected = codelength(&y).bits() + universal_int_codelength(2) + 28f64.log2();
        assert!((obj.three_part_codelength(&y).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn three_part_propagates_length_errors() {
        let obj = Objective::new(vec![1, 2, 3], Metric::Hamming, Vec::new(), 256);
        assert!(obj.three_part_codelength(&[1, 2]).is_err());
    }

    #[test]
    fn curves_single_member() {
        let x = b"mississippi".to_vec();
        let obj = Objective::new(x.clone(), Metric::Edit, Vec::new(), 256);
        let pool = Pool::new(vec![obj.candidate(x.clone(), Provenance::Input).unwrap()]);
        let pts = curves(&pool, &obj, None).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].rate, codelength(&x).bits());
        assert_eq!(pts[0].distortion, 0);
        assert_eq!(pts[0].distortion_to_original, None);
        assert_eq!(pts[0].three_part_codelength, pts[0].rate + universal_int_codelength(0));
    }

    #[test]
    fn hypervolume_staircase() {
        let ts = [t(1.0, 3), t(2.0, 1), t(3.0, 2)];
        // (2-1)*(4-3) + (4-2)*(4-1)
        assert!((hypervolume(&ts, 4.0, 4.0) - 7.0).abs() < 1e-12);
    }

    fn arb_tradeoffs() -> impl Strategy<Value = Vec<TradeOff>> {
        proptest::collection::vec((0u32..20, 0u64..20), 1..200)
            .prop_map(|v| v.into_iter().map(|(r, d)| t(r as f64 * 0.5, d)).collect())
    }

    proptest! {
        #[test]
        fn fast_weakness_matches_naive(ts in arb_tradeoffs()) {
            prop_assert_eq!(weakness_all(&ts), naive_weakness(&ts));
        }

        #[test]
        fn reduce_is_idempotent(ts in arb_tradeoffs()) {
            let once = pool_of(&ts).reduce();
            prop_assert_eq!(once.reduce(), once.clone());
            prop_assert!(!once.is_empty());
        }

        #[test]
        fn reduce_preserves_profile(ts in arb_tradeoffs(), queries in proptest::collection::vec((0u32..25, 0u64..25), 50)) {
            let reduced = pool_of(&ts).reduce().tradeoffs();
            for (r, d) in queries {
                let q = t(r as f64 * 0.5, d);
                prop_assert_eq!(in_profile(&ts, &q), in_profile(&reduced, &q));
            }
        }

        #[test]
        fn mss_invariant_under_monotone_rate_rescaling(raw in proptest::collection::vec((0u32..50, 0u32..40), 1..30)) {
            let pts: Vec<FrontPoint> = raw.iter().map(|&(r, l)| point(r as f64, l as f64)).collect();
            let scaled: Vec<FrontPoint> = pts
                .iter()
                .map(|p| FrontPoint { rate: (p.rate + 1.0).ln() * 3.0 + 7.0, ..p.clone() })
                .collect();
            let a = pts.iter().position(|p| p == minimal_sufficient_statistic(&pts).unwrap());
            let b = scaled.iter().position(|p| p == minimal_sufficient_statistic(&scaled).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
