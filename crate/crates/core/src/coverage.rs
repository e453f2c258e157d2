//! Monte Carlo coverage: draw many measurements from a known state, build
//! the confidence domain for each, and count how often it contains the true
//! quantity.
//!
//! Trials are split into fixed-size chunks. Chunk `k` draws from its own
//! stream seeded by `derive_seed(seed, k)`, so the hit count depends only on
//! `(seed, trials)` and not on how many threads run the chunks.

use rayon::prelude::*;
use serde::Serialize;

use crate::confidence::{Construction, Prepared, TrueState};
use crate::error::{domain, Error, Result};
use crate::measurement::{simulate_with, NormalState};
use crate::rng::{derive_seed, NormalStream};

/// Trials per chunk.
pub const CHUNK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageExperiment {
    pub truth: TrueState,
    pub construction: Construction,
    pub n: usize,
    /// Second sample size; only read for two-sample constructions.
    pub m: usize,
    pub gamma: f64,
    pub trials: u64,
    pub seed: u64,
}

impl CoverageExperiment {
    /// A one-sample experiment.
    pub fn single(state: NormalState, construction: Construction, n: usize, gamma: f64, trials: u64, seed: u64) -> Self {
        CoverageExperiment { truth: TrueState::Single(state), construction, n, m: 0, gamma, trials, seed }
    }

    /// A two-sample mean difference experiment; the known scales are taken
    /// from the two states.
    pub fn mean_diff(first: NormalState, second: NormalState, n: usize, m: usize, gamma: f64, trials: u64, seed: u64) -> Self {
        CoverageExperiment {
            truth: TrueState::Pair(first, second),
            construction: Construction::MeanDiff { sigma1: first.sigma(), sigma2: second.sigma() },
            n,
            m,
            gamma,
            trials,
            seed,
        }
    }

    pub fn chunk_count(&self) -> u64 {
        self.trials.div_ceil(CHUNK_TRIALS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageReport {
    pub hits: u64,
    pub trials: u64,
    pub fraction: f64,
    pub gamma: f64,
    /// `sqrt(gamma (1 - gamma) / trials)`
    pub stderr: f64,
    /// Trials whose domain could not be built (zero spread); counted as misses.
    pub degenerate_count: u64,
}

impl CoverageReport {
    fn from_counts(hits: u64, degenerate: u64, trials: u64, gamma: f64) -> Self {
        CoverageReport {
            hits,
            trials,
            fraction: hits as f64 / trials as f64,
            gamma,
            stderr: (gamma * (1.0 - gamma) / trials as f64).sqrt(),
            degenerate_count: degenerate,
        }
    }

    /// `|fraction - gamma| <= k * stderr`
    pub fn within(&self, k: f64) -> bool {
        (self.fraction - self.gamma).abs() <= k * self.stderr
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChunkCounts {
    pub hits: u64,
    pub degenerate: u64,
}

impl std::ops::Add for ChunkCounts {
    type Output = ChunkCounts;
    fn add(self, o: ChunkCounts) -> ChunkCounts {
        ChunkCounts { hits: self.hits + o.hits, degenerate: self.degenerate + o.degenerate }
    }
}

fn validate(exp: &CoverageExperiment) -> Result<Prepared> {
    if exp.trials == 0 {
        return Err(domain("need at least one trial"));
    }
    match (exp.construction.is_two_sample(), &exp.truth) {
        (true, TrueState::Pair(..)) | (false, TrueState::Single(_)) => {}
        _ => return Err(domain("true state shape does not match the construction")),
    }
    Prepared::new(exp.construction, exp.gamma, exp.n, exp.m)
}

/// Runs chunk `index` of the declared schedule.
pub fn run_chunk(exp: &CoverageExperiment, prepared: &Prepared, index: u64) -> Result<ChunkCounts> {
    let start = index * CHUNK_TRIALS;
    let count = CHUNK_TRIALS.min(exp.trials.saturating_sub(start));
    let mut stream = NormalStream::new(derive_seed(exp.seed, index));
    let mut out = ChunkCounts::default();
    for _ in 0..count {
        let (x, y) = match exp.truth {
            TrueState::Single(s) => (simulate_with(&mut stream, s, exp.n), None),
            TrueState::Pair(a, b) => {
                let x = simulate_with(&mut stream, a, exp.n);
                (x, Some(simulate_with(&mut stream, b, exp.m)))
            }
        };
        match prepared.covers(&x, y.as_ref(), &exp.truth) {
            Ok(true) => out.hits += 1,
            Ok(false) => {}
            Err(Error::Degenerate(_)) => out.degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Runs the experiment on the global thread pool.
pub fn run_coverage(exp: &CoverageExperiment) -> Result<CoverageReport> {
    let prepared = validate(exp)?;
    let total = (0..exp.chunk_count())
        .into_par_iter()
        .map(|k| run_chunk(exp, &prepared, k))
        .try_reduce(ChunkCounts::default, |a, b| Ok(a + b))?;
    Ok(CoverageReport::from_counts(total.hits, total.degenerate, exp.trials, exp.gamma))
}

/// Runs the experiment on a dedicated pool of `threads` workers.
pub fn run_coverage_with_threads(exp: &CoverageExperiment, threads: usize) -> Result<CoverageReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_coverage(exp))
}

/// Runs the chunks one after another on the calling thread.
pub fn run_coverage_sequential(exp: &CoverageExperiment) -> Result<CoverageReport> {
    let prepared = validate(exp)?;
    let mut total = ChunkCounts::default();
    for k in 0..exp.chunk_count() {
        total = total + run_chunk(exp, &prepared, k)?;
    }
    Ok(CoverageReport::from_counts(total.hits, total.degenerate, exp.trials, exp.gamma))
}
