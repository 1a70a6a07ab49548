//! Genetic search for the rate-distortion front.
//!
//! The pool starts as the source object alone. Each iteration draws a batch
//! of offspring (crossover of two uniform parents, or mutation of one),
//! evaluates them in parallel, merges them into the pool, and then drops
//! dominated members at random. Members of zero weakness are never dropped,
//! so the dominated region of the pool only grows.

mod checkpoint;
mod operators;
mod ppm;

use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::distortion::Metric;
use crate::error::{Error, Result};
use crate::pareto::{curves, Candidate, FrontPoint, Objective, Pool, Provenance};

pub use checkpoint::{rng_from_hex, rng_state_hex, Checkpoint};
pub use operators::{
    crossover, crossover_at, geometric, mutate, ppm_mutation, ppm_mutation_at, random_split,
    small_mutation,
};
pub use ppm::PpmModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Sharpness of the drop sigmoid, `> 1`.
    pub alpha: f64,
    pub small_mutation_prob: f64,
    /// Mean block length for crossover and PPM mutation.
    pub geometric_mean: f64,
    /// Standard deviation of the Euclidean mutator.
    pub gaussian_sigma: f64,
    pub offspring_per_iteration: usize,
    pub crossover_fraction: f64,
    pub seed: u64,
    pub max_iterations: u64,
    /// Optional wall-clock budget; runs stopped by it are not reproducible.
    pub time_budget_secs: Option<f64>,
    /// Checkpoint period in iterations; 0 writes only the final state.
    pub checkpoint_every: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            alpha: 4.0,
            small_mutation_prob: 0.25,
            geometric_mean: 5.0,
            gaussian_sigma: 10.0,
            offspring_per_iteration: 32,
            crossover_fraction: 0.5,
            seed: 0,
            max_iterations: 1000,
            time_budget_secs: None,
            checkpoint_every: 100,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64, name: &str| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} = {p} is not a probability")))
            }
        };
        prob(self.small_mutation_prob, "small_mutation_prob")?;
        prob(self.crossover_fraction, "crossover_fraction")?;
        if !(self.alpha > 1.0) {
            return Err(Error::Domain(format!("alpha = {} must exceed 1", self.alpha)));
        }
        if !(self.geometric_mean > 0.0) {
            return Err(Error::Domain(format!(
                "geometric_mean = {} must be positive",
                self.geometric_mean
            )));
        }
        if !(self.gaussian_sigma > 0.0) {
            return Err(Error::Domain("gaussian_sigma must be positive".into()));
        }
        if self.offspring_per_iteration == 0 {
            return Err(Error::Domain("offspring_per_iteration must be positive".into()));
        }
        Ok(())
    }

    /// Iterations needed for at least `evaluations` offspring.
    pub fn iterations_for(&self, evaluations: u64) -> u64 {
        evaluations.div_ceil(self.offspring_per_iteration as u64)
    }
}

/// Probability of dropping the `i`-th (1-based) of `n` positive-weakness
/// candidates: `1 / (1 + (n / (i - 1/2) - 1)^alpha)`.
pub fn drop_probability(i: usize, n: usize, alpha: f64) -> Result<f64> {
    if i == 0 || i > n {
        return Err(Error::Domain(format!("index {i} outside 1..={n}")));
    }
    let base = n as f64 / (i as f64 - 0.5) - 1.0;
    Ok(1.0 / (1.0 + base.powf(alpha)))
}

/// Keeps every zero-weakness member; the others are ranked by
/// (weakness, rate) and the `i`-th of `n` is dropped with
/// [`drop_probability`]. Survivors keep their pool order.
pub fn select<R: Rng + ?Sized>(pool: Pool, weakness: &[usize], alpha: f64, rng: &mut R) -> Pool {
    debug_assert_eq!(pool.len(), weakness.len());
    let mut ranked: Vec<usize> = (0..pool.len()).filter(|&i| weakness[i] > 0).collect();
    ranked.sort_by(|&a, &b| {
        weakness[a].cmp(&weakness[b]).then(
            pool.members[a]
                .tradeoff
                .rate
                .total_cmp(&pool.members[b].tradeoff.rate),
        )
    });
    let n = ranked.len();
    let mut keep = vec![true; pool.len()];
    for (pos, &idx) in ranked.iter().enumerate() {
        let p = drop_probability(pos + 1, n, alpha).unwrap();
        if rng.random_bool(p) {
            keep[idx] = false;
        }
    }
    Pool::new(
        pool.members
            .into_iter()
            .zip(keep)
            .filter_map(|(c, k)| k.then_some(c))
            .collect(),
    )
}

/// A running search: objective, pool, generator and iteration count.
pub struct Search {
    objective: Objective,
    alphabet: Alphabet,
    config: SearchConfig,
    pool: Pool,
    rng: ChaCha8Rng,
    iteration: u64,
}

impl Search {
    /// Starts from a pool holding only the source object.
    pub fn new(objective: Objective, alphabet: Alphabet, config: SearchConfig) -> Result<Self> {
        config.validate()?;
        if objective.source().is_empty() {
            return Err(Error::Domain("cannot search around an empty object".into()));
        }
        if !alphabet.covers(objective.source()) {
            return Err(Error::Domain(
                "source object uses symbols outside the representation alphabet".into(),
            ));
        }
        let input = objective.candidate(objective.source().to_vec(), Provenance::Input)?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Search {
            objective,
            alphabet,
            config,
            pool: Pool::new(vec![input]),
            rng,
            iteration: 0,
        })
    }

    pub fn resume(
        objective: Objective,
        alphabet: Alphabet,
        config: SearchConfig,
        checkpoint: Checkpoint,
    ) -> Result<Self> {
        config.validate()?;
        if checkpoint.seed != config.seed {
            return Err(Error::Checkpoint(format!(
                "checkpoint seed {} differs from configured seed {}",
                checkpoint.seed, config.seed
            )));
        }
        Ok(Search {
            objective,
            alphabet,
            config,
            pool: checkpoint.pool,
            rng: checkpoint.rng,
            iteration: checkpoint.iteration,
        })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn pool(&self) -> &Pool {
        &self.pool
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn evaluations(&self) -> u64 {
        self.iteration * self.config.offspring_per_iteration as u64
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            seed: self.config.seed,
            iteration: self.iteration,
            rng: self.rng.clone(),
            pool: self.pool.clone(),
        }
    }

    fn offspring(&mut self) -> Vec<(Vec<u8>, Provenance)> {
        let metric: Metric = self.objective.metric();
        let members = &self.pool.members;
        let rng = &mut self.rng;
        (0..self.config.offspring_per_iteration)
            .map(|_| {
                if rng.random_bool(self.config.crossover_fraction) {
                    let a = &members[rng.random_range(0..members.len())].payload;
                    let b = &members[rng.random_range(0..members.len())].payload;
                    let child = match (a.is_empty(), b.is_empty()) {
                        (false, false) => crossover(a, b, self.config.geometric_mean, rng),
                        (true, _) => b.clone(),
                        (false, true) => a.clone(),
                    };
                    (child, Provenance::Crossover)
                } else {
                    let p = &members[rng.random_range(0..members.len())].payload;
                    let child = if p.is_empty() {
                        p.clone()
                    } else {
                        mutate(p, metric, &self.alphabet, &self.config, rng)
                    };
                    (child, Provenance::Mutation)
                }
            })
            .collect()
    }

    /// One generation: breed, evaluate, merge, deduplicate, select.
    pub fn step(&mut self) -> Result<()> {
        let children = self.offspring();
        let mut seen: HashSet<&[u8]> = self.pool.members.iter().map(|c| c.payload.as_slice()).collect();
        let fresh: Vec<(Vec<u8>, Provenance)> = children
            .iter()
            .filter(|(p, _)| seen.insert(p.as_slice()))
            .cloned()
            .collect();
        let objective = &self.objective;
        let evaluated: Vec<Candidate> = fresh
            .into_par_iter()
            .map(|(payload, provenance)| objective.candidate(payload, provenance))
            .collect::<Result<_>>()?;

        let mut pool = std::mem::take(&mut self.pool);
        pool.members.extend(evaluated);
        let weakness = pool.weakness();
        self.pool = select(pool, &weakness, self.config.alpha, &mut self.rng);
        self.iteration += 1;
        Ok(())
    }

    /// Steps until `limit` iterations (or the time budget) are reached,
    /// checkpointing every `checkpoint_every` iterations and at the end.
    pub fn run_until(&mut self, limit: u64, checkpoint_path: Option<&Path>) -> Result<()> {
        let started = Instant::now();
        while self.iteration < limit {
            if let Some(budget) = self.config.time_budget_secs {
                if started.elapsed().as_secs_f64() >= budget {
                    break;
                }
            }
            self.step()?;
            if let Some(path) = checkpoint_path {
                let every = self.config.checkpoint_every;
                if every > 0 && self.iteration.is_multiple_of(every) {
                    self.checkpoint().write_atomic(path)?;
                }
            }
        }
        if let Some(path) = checkpoint_path {
            self.checkpoint().write_atomic(path)?;
        }
        Ok(())
    }

    pub fn run(&mut self, checkpoint_path: Option<&Path>) -> Result<()> {
        self.run_until(self.config.max_iterations, checkpoint_path)
    }

    pub fn front(&self, original: Option<&[u8]>) -> Result<Vec<FrontPoint>> {
        curves(&self.pool, &self.objective, original)
    }
}

/// Result of a completed search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub reduced: Pool,
    pub points: Vec<FrontPoint>,
    pub iterations: u64,
}

/// Runs a full search over the byte alphabet without checkpoints.
pub fn run(x: &[u8], metric: Metric, side_info: &[u8], config: SearchConfig) -> Result<SearchOutcome> {
    let objective = Objective::new(x.to_vec(), metric, side_info.to_vec(), 256);
    let mut search = Search::new(objective, Alphabet::bytes(), config)?;
    search.run(None)?;
    Ok(SearchOutcome {
        reduced: search.pool().reduce(),
        points: search.front(None)?,
        iterations: search.iteration(),
    })
}
