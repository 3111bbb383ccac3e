//! The Popescu-Rohrlich box: `a XOR b = x AND y` with uniform marginals.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{BehaviorTable, Scenario};
use crate::scalar::Real;

/// Generator used for sampling, recorded in every log.
pub const SAMPLER_RNG: &str = "ChaCha8Rng";

/// Number of independent streams a sample is split into. Shard `k` draws
/// from stream `k` of the generator seeded with the user seed, so the
/// result does not depend on the thread count.
pub const SAMPLE_SHARDS: u64 = 16;

pub fn pr_box_behavior<T: Real>() -> BehaviorTable<T> {
    let s = Scenario::CHSH;
    let mut probs = vec![T::zero(); s.cells()];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                probs[s.index(x, y, a, a ^ (x & y))] = T::lit(0.5);
            }
        }
    }
    BehaviorTable::new(s, probs).expect("PR box is a valid table")
}

/// `E11 + E12 + E21 - E22` of a binary two-setting behavior.
pub fn chsh_of_behavior<T: Real>(b: &BehaviorTable<T>) -> Result<T> {
    b.scenario().require(Scenario::CHSH)?;
    Ok(b.correlator(0, 0)? + b.correlator(0, 1)? + b.correlator(1, 0)? - b.correlator(1, 1)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleLog {
    pub seed: u64,
    pub n: u64,
    /// Counts per flat `(x, y, a, b)` cell.
    pub counts: Vec<u64>,
    pub rng: &'static str,
    pub shards: u64,
}

impl SampleLog {
    /// Conditional frequencies `count / count(x, y)`; setting pairs that
    /// were never drawn are filled uniformly.
    pub fn empirical<T: Real>(&self) -> Result<BehaviorTable<T>> {
        let s = Scenario::CHSH;
        let per = s.outcome_pairs();
        let mut probs = vec![T::zero(); s.cells()];
        for (pair, chunk) in self.counts.chunks(per).enumerate() {
            let total: u64 = chunk.iter().sum();
            for (k, c) in chunk.iter().enumerate() {
                probs[pair * per + k] = if total == 0 {
                    T::one() / T::from_usize(per).unwrap()
                } else {
                    T::from_u64(*c).unwrap() / T::from_u64(total).unwrap()
                };
            }
        }
        BehaviorTable::new(s, probs)
    }

    pub fn empirical_chsh<T: Real>(&self) -> Result<T> {
        chsh_of_behavior(&self.empirical::<T>()?)
    }
}

fn sample_shard(seed: u64, shard: u64, n: u64) -> Vec<u64> {
    let s = Scenario::CHSH;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut counts = vec![0u64; s.cells()];
    for _ in 0..n {
        let x = rng.random_range(0..2usize);
        let y = rng.random_range(0..2usize);
        let a = rng.random_range(0..2usize);
        counts[s.index(x, y, a, a ^ (x & y))] += 1;
    }
    counts
}

/// Draws `n` rounds with uniformly random settings.
pub fn sample_pr_box(seed: u64, n: u64) -> Result<SampleLog> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "sample count",
            value: 0.0,
            range: ">= 1",
        });
    }
    let counts = (0..SAMPLE_SHARDS)
        .into_par_iter()
        .map(|k| {
            let share = n / SAMPLE_SHARDS + u64::from(k < n % SAMPLE_SHARDS);
            sample_shard(seed, k, share)
        })
        .reduce(
            || vec![0u64; Scenario::CHSH.cells()],
            |mut acc, c| {
                acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
                acc
            },
        );
    Ok(SampleLog {
        seed,
        n,
        counts,
        rng: SAMPLER_RNG,
        shards: SAMPLE_SHARDS,
    })
}
