//! Exhaustive ground-truth fronts for tiny instances.
//!
//! Every representation over a (usually restricted) alphabet is enumerated
//! and evaluated. Length-preserving metrics enumerate strings of the source
//! length; edit distortion enumerates lengths `1..=|x| + extra_length`.

use rayon::prelude::*;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::pareto::{curves, Candidate, FrontPoint, Objective, Pool, Provenance};

/// Cap on the number of representations enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimit(pub u128);

impl Default for OracleLimit {
    fn default() -> Self {
        OracleLimit(1 << 24)
    }
}

/// The enumerated representation space.
#[derive(Clone, Debug)]
pub struct OracleSpace {
    pub alphabet: Alphabet,
    pub lengths: std::ops::RangeInclusive<usize>,
}

impl OracleSpace {
    pub fn for_objective(objective: &Objective, alphabet: Alphabet, extra_length: usize) -> Self {
        let n = objective.source().len();
        let lengths = if objective.metric().preserves_length() {
            n..=n
        } else {
            1..=n + extra_length
        };
        OracleSpace { alphabet, lengths }
    }

    pub fn size(&self) -> u128 {
        let sigma = self.alphabet.size() as u128;
        self.lengths
            .clone()
            .map(|len| sigma.checked_pow(len as u32).unwrap_or(u128::MAX))
            .fold(0u128, |acc, s| acc.saturating_add(s))
    }

    /// All strings of one length, in lexicographic order of alphabet index.
    fn decode(&self, len: usize, mut index: u128) -> Vec<u8> {
        let symbols = self.alphabet.symbols();
        let sigma = symbols.len() as u128;
        let mut out = vec![0u8; len];
        for slot in out.iter_mut().rev() {
            *slot = symbols[(index % sigma) as usize];
            index /= sigma;
        }
        out
    }

    /// Every representation in the space.
    pub fn iter(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        let sigma = self.alphabet.size() as u128;
        self.lengths
            .clone()
            .flat_map(move |len| (0..sigma.pow(len as u32)).map(move |i| self.decode(len, i)))
    }
}

const CHUNK: u128 = 1 << 12;

/// Exact Pareto front of `objective` over `space`.
pub fn exhaustive_front_in(objective: &Objective, space: &OracleSpace, limit: OracleLimit) -> Result<Vec<FrontPoint>> {
    let required = space.size();
    if required > limit.0 {
        return Err(Error::SpaceTooLarge {
            required,
            limit: limit.0,
        });
    }
    let sigma = space.alphabet.size() as u128;
    let mut jobs = Vec::new();
    for len in space.lengths.clone() {
        let count = sigma.pow(len as u32);
        let mut start = 0;
        while start < count {
            jobs.push((len, start, (start + CHUNK).min(count)));
            start += CHUNK;
        }
    }
    let partial: Vec<Vec<Candidate>> = jobs
        .into_par_iter()
        .map(|(len, start, end)| {
            let members = (start..end)
                .map(|i| objective.candidate(space.decode(len, i), Provenance::Mutation))
                .collect::<Result<Vec<_>>>()?;
            Ok(Pool::new(members).reduce().members)
        })
        .collect::<Result<_>>()?;
    let merged = Pool::new(partial.into_iter().flatten().collect());
    curves(&merged, objective, None)
}

/// Oracle front with the space derived from the objective: the given
/// alphabet, the source length (or `1..=|x|+1` for edit distortion).
pub fn exhaustive_front(objective: &Objective, alphabet: Alphabet, limit: OracleLimit) -> Result<Vec<FrontPoint>> {
    let space = OracleSpace::for_objective(objective, alphabet, 1);
    exhaustive_front_in(objective, &space, limit)
}
