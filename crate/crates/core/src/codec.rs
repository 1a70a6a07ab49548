//! Idealised block-sorting compressor.
//!
//! The compressor never produces a bitstream. It runs the Burrows-Wheeler
//! transform over the whole input as a single block, applies move-to-front,
//! and then accumulates `-log2 p` for every token of an adaptive order-0
//! model. The resulting [`CodeLength`] is a real number of bits.
//!
//! The token model splits the MTF output into nonzero ranks and the runs of
//! zero ranks that follow them (a zero MTF rank means "same byte as the
//! previous BWT output", so zero runs are exactly the runs of the BWT
//! output). Both token streams are coded with a count-adaptive model that
//! escapes to a fixed code for values never seen before.
//!
//! Cost layout for an input of length `n`:
//!
//! * `log2(n + 1)` bits for the BWT primary index (the only header),
//! * the zero run preceding the first nonzero rank,
//! * for every nonzero rank: the rank, then the zero run that follows it.
//!
//! The input length is treated as known to the decoder, so the empty input
//! costs exactly zero bits.

use std::collections::HashMap;
use std::ops::{Add, Sub};
use std::sync::atomic::{AtomicU64, Ordering};

/// An idealised codelength in bits. Never negative.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct CodeLength(f64);

impl CodeLength {
    pub const ZERO: CodeLength = CodeLength(0.0);

    /// Wraps a bit count, clamping negative values to zero.
    pub fn from_bits(bits: f64) -> Self {
        CodeLength(bits.max(0.0))
    }

    pub fn bits(self) -> f64 {
        self.0
    }
}

impl Add for CodeLength {
    type Output = CodeLength;
    fn add(self, rhs: CodeLength) -> CodeLength {
        CodeLength(self.0 + rhs.0)
    }
}

/// Difference of two codelengths as a raw (possibly negative) bit count.
impl Sub for CodeLength {
    type Output = f64;
    fn sub(self, rhs: CodeLength) -> f64 {
        self.0 - rhs.0
    }
}

/// Output of the forward Burrows-Wheeler transform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BwtOutput {
    /// Last column of the sorted rotation matrix.
    pub last_column: Vec<u8>,
    /// Row of the sorted matrix holding the input itself.
    pub primary_index: usize,
}

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of times [`conditional_codelength`] clamped a negative difference
/// to zero since process start.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

/// Sorts all cyclic rotations of `input` by prefix doubling with counting
/// sorts. Returns the start offset of each rotation in sorted order together
/// with the final equivalence class of every offset. Identical rotations
/// share a class.
fn sort_rotations(input: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let n = input.len();
    let mut order = vec![0usize; n];
    let mut class = vec![0usize; n];
    if n == 0 {
        return (order, class);
    }

    let mut counts = vec![0usize; 256.max(n)];
    for &b in input {
        counts[b as usize] += 1;
    }
    for i in 1..256 {
        counts[i] += counts[i - 1];
    }
    for i in (0..n).rev() {
        let b = input[i] as usize;
        counts[b] -= 1;
        order[counts[b]] = i;
    }
    let mut classes = 1;
    class[order[0]] = 0;
    for i in 1..n {
        if input[order[i]] != input[order[i - 1]] {
            classes += 1;
        }
        class[order[i]] = classes - 1;
    }

    let mut shifted = vec![0usize; n];
    let mut next_class = vec![0usize; n];
    let mut k = 1;
    while k < n && classes < n {
        for i in 0..n {
            shifted[i] = (order[i] + n - k) % n;
        }
        counts[..classes].iter_mut().for_each(|c| *c = 0);
        for &s in &shifted {
            counts[class[s]] += 1;
        }
        for i in 1..classes {
            counts[i] += counts[i - 1];
        }
        for &s in shifted.iter().rev() {
            let c = class[s];
            counts[c] -= 1;
            order[counts[c]] = s;
        }
        next_class[order[0]] = 0;
        classes = 1;
        for i in 1..n {
            let cur = (class[order[i]], class[(order[i] + k) % n]);
            let prev = (class[order[i - 1]], class[(order[i - 1] + k) % n]);
            if cur != prev {
                classes += 1;
            }
            next_class[order[i]] = classes - 1;
        }
        std::mem::swap(&mut class, &mut next_class);
        k *= 2;
    }
    (order, class)
}

/// Forward Burrows-Wheeler transform over all cyclic rotations (no sentinel).
///
/// When several rotations are identical (periodic input) the primary index
/// is the first row of that group, i.e. ties are broken by rotation offset.
pub fn bwt(input: &[u8]) -> BwtOutput {
    let n = input.len();
    if n == 0 {
        return BwtOutput {
            last_column: Vec::new(),
            primary_index: 0,
        };
    }
    let (order, class) = sort_rotations(input);
    let last_column = order.iter().map(|&s| input[(s + n - 1) % n]).collect();
    // Classes are dense ranks in sorted order, so the first row of the
    // original's class is the number of rows in smaller classes.
    let primary_index = order.iter().filter(|&&s| class[s] < class[0]).count();
    BwtOutput {
        last_column,
        primary_index,
    }
}

/// Inverse of [`bwt`]. Used to check invertibility; the compressor itself
/// never decodes.
pub fn inverse_bwt(transformed: &BwtOutput) -> Vec<u8> {
    let last = &transformed.last_column;
    let n = last.len();
    if n == 0 {
        return Vec::new();
    }
    let mut starts = [0usize; 256];
    for &b in last {
        starts[b as usize] += 1;
    }
    let mut sum = 0;
    for s in starts.iter_mut() {
        let c = *s;
        *s = sum;
        sum += c;
    }
    let mut seen = [0usize; 256];
    let lf: Vec<usize> = last
        .iter()
        .map(|&b| {
            let r = starts[b as usize] + seen[b as usize];
            seen[b as usize] += 1;
            r
        })
        .collect();

    let mut out = vec![0u8; n];
    let mut row = transformed.primary_index;
    for slot in out.iter_mut().rev() {
        *slot = last[row];
        row = lf[row];
    }
    out
}

fn identity_list() -> [u8; 256] {
    std::array::from_fn(|i| i as u8)
}

/// Move-to-front with the recency list initialised to `0..=255`.
pub fn mtf(input: &[u8]) -> Vec<u8> {
    let mut list = identity_list();
    input
        .iter()
        .map(|&byte| {
            let pos = list.iter().position(|&b| b == byte).unwrap();
            list.copy_within(..pos, 1);
            list[0] = byte;
            pos as u8
        })
        .collect()
}

/// Inverse of [`mtf`].
pub fn inverse_mtf(ranks: &[u8]) -> Vec<u8> {
    let mut list = identity_list();
    ranks
        .iter()
        .map(|&r| {
            let pos = r as usize;
            let byte = list[pos];
            list.copy_within(..pos, 1);
            list[0] = byte;
            byte
        })
        .collect()
}

/// Idealised Elias-gamma length for `v >= 1`.
fn gamma_bits(v: usize) -> f64 {
    debug_assert!(v >= 1);
    (2 * (usize::BITS - 1 - v.leading_zeros()) + 1) as f64
}

/// Adaptive frequency model with a method-C escape: a seen value costs
/// `log2((T + D) / c)`, an unseen one `log2((T + D) / D)` plus its fallback
/// code, where `T` counts coded tokens and `D` distinct values. The escape
/// is free before the first token and disappears once every value of a
/// finite alphabet has been seen.
struct EscapeModel {
    counts: HashMap<usize, u32>,
    total: u32,
    alphabet: Option<usize>,
}

impl EscapeModel {
    fn new(alphabet: Option<usize>) -> Self {
        EscapeModel {
            counts: HashMap::new(),
            total: 0,
            alphabet,
        }
    }

    fn code(&mut self, value: usize, fallback: impl FnOnce(usize) -> f64) -> f64 {
        let distinct = self.counts.len();
        let exhausted = self.alphabet == Some(distinct);
        let denom = if exhausted {
            self.total as f64
        } else {
            self.total as f64 + distinct as f64
        };
        let cost = match self.counts.get(&value) {
            Some(&c) => denom.log2() - (c as f64).log2(),
            None => {
                let escape = if self.total == 0 {
                    0.0
                } else {
                    denom.log2() - (distinct as f64).log2()
                };
                escape + fallback(distinct)
            }
        };
        *self.counts.entry(value).or_insert(0) += 1;
        self.total += 1;
        cost
    }
}

/// Bits for the MTF rank stream under the run/rank token model.
fn mtf_stream_bits(ranks: &[u8]) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    // Nonzero ranks 1..=255; unseen ranks are uniform over the unseen ones.
    let mut rank_model = EscapeModel::new(Some(255));
    let mut run_model = EscapeModel::new(None);
    let mut run_code = |len: usize| run_model.code(len, |_| gamma_bits(len + 1));

    let mut bits = 0.0;
    let mut run = 0usize;
    let mut iter = ranks.iter();
    for &r in iter.by_ref() {
        if r == 0 {
            run += 1;
            continue;
        }
        bits += run_code(run);
        run = 0;
        bits += rank_model.code(r as usize, |distinct| ((255 - distinct) as f64).log2());
    }
    bits + run_code(run)
}

/// Idealised codelength of `input` in bits: BWT, MTF, then the adaptive
/// token model, plus `log2(n + 1)` for the primary index.
pub fn codelength(input: &[u8]) -> CodeLength {
    if input.is_empty() {
        return CodeLength::ZERO;
    }
    let transformed = bwt(input);
    let ranks = mtf(&transformed.last_column);
    let index_bits = ((input.len() + 1) as f64).log2();
    CodeLength::from_bits(index_bits + mtf_stream_bits(&ranks))
}

/// `codelength(side ++ y) - codelength(side)` given a precomputed
/// `codelength(side)`. Negative differences are clamped to zero and counted.
pub fn conditional_codelength_with(y: &[u8], side: &[u8], side_bits: CodeLength) -> CodeLength {
    if y.is_empty() {
        return CodeLength::ZERO;
    }
    if side.is_empty() {
        return codelength(y);
    }
    let mut joined = Vec::with_capacity(side.len() + y.len());
    joined.extend_from_slice(side);
    joined.extend_from_slice(y);
    let diff = codelength(&joined) - side_bits;
    if diff < 0.0 {
        CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
    }
    CodeLength::from_bits(diff)
}

/// Codelength of `y` given side information `z`, approximated as
/// `L(zy) - L(z)` with no separator between the two.
pub fn conditional_codelength(y: &[u8], z: &[u8]) -> CodeLength {
    conditional_codelength_with(y, z, codelength(z))
}
