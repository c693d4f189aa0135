//! Chunked enumeration of permutations and of Monte Carlo samples.
//!
//! Work is split into fixed-size chunks whose boundaries do not depend on the
//! number of worker threads; chunk results are merged in chunk order, so the
//! output is the same for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Permutations per exact-enumeration chunk.
pub(crate) const PERMUTATION_CHUNK: u128 = 720;
/// Samples per Monte Carlo chunk. Chunk `c` draws from ChaCha8 stream `c`.
pub const SAMPLE_CHUNK: u64 = 4096;
/// Identifies the sampling scheme in reports.
pub const GENERATOR: &str = "chacha8(seed_from_u64(seed), stream=chunk, chunk=4096)";

pub fn factorial(m: usize) -> Option<u128> {
    (1..=m as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// The `index`-th permutation of `1..=m` in lexicographic order.
pub fn unrank_permutation(m: usize, mut index: u128) -> Vec<usize> {
    let mut pool: Vec<usize> = (1..=m).collect();
    let mut out = Vec::with_capacity(m);
    for k in (0..m).rev() {
        let block = factorial(k).expect("caller checked m! fits");
        let pick = (index / block) as usize;
        index %= block;
        out.push(pool.remove(pick));
    }
    out
}

/// Advances to the next permutation in lexicographic order; false after the
/// last one.
pub fn next_permutation(order: &mut [usize]) -> bool {
    let Some(pivot) = order.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let successor = order
        .iter()
        .rposition(|&x| x > order[pivot])
        .expect("pivot has a larger element after it");
    order.swap(pivot, successor);
    order[pivot + 1..].reverse();
    true
}

pub(crate) fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Folds every permutation of `1..=m`, in lexicographic order within each
/// chunk, then merges chunk accumulators left to right. `visit` receives the
/// lexicographic rank along with the permutation.
pub(crate) fn fold_permutations<A, I, F, M>(
    m: usize,
    workers: usize,
    init: I,
    visit: F,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, u128, &[usize]) -> Result<()> + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let total = factorial(m).ok_or(Error::Overflow("m!"))?;
    let chunks = total.div_ceil(PERMUTATION_CHUNK);
    let chunk_ids: Vec<u128> = (0..chunks).collect();
    let parts = with_workers(workers, || {
        chunk_ids
            .par_iter()
            .map(|&c| {
                let start = c * PERMUTATION_CHUNK;
                let len = PERMUTATION_CHUNK.min(total - start);
                let mut order = unrank_permutation(m, start);
                let mut acc = init();
                for k in 0..len {
                    visit(&mut acc, start + k, &order)?;
                    if k + 1 < len {
                        next_permutation(&mut order);
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<A>>>()
    })??;
    Ok(parts.into_iter().fold(init(), merge))
}

/// Folds `samples` draws. `visit` gets the chunk's RNG and the global sample
/// index and is responsible for drawing whatever it needs.
pub(crate) fn fold_samples<A, I, F, M>(
    samples: u64,
    seed: u64,
    workers: usize,
    init: I,
    visit: F,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &mut ChaCha8Rng, u64) -> Result<()> + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let chunk_ids: Vec<u64> = (0..chunks).collect();
    let parts = with_workers(workers, || {
        chunk_ids
            .par_iter()
            .map(|&c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c);
                let start = c * SAMPLE_CHUNK;
                let end = (start + SAMPLE_CHUNK).min(samples);
                let mut acc = init();
                for s in start..end {
                    visit(&mut acc, &mut rng, s)?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<A>>>()
    })??;
    Ok(parts.into_iter().fold(init(), merge))
}
