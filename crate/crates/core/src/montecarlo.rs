use rayon::prelude::*;

use crate::channel::{stream, SimRng};

/// Trials per independently seeded chunk.
pub(crate) const CHUNK: u64 = 8192;

/// Runs `trials` trials split into fixed-size chunks, each with its own
/// stream keyed by `(seed, chunk index)`, and sums the per-chunk counters.
///
/// Chunk boundaries and seeds never depend on the thread count, and the
/// merge is an integer sum, so the result is identical for any degree of
/// parallelism.
pub(crate) fn run_chunked<const K: usize, F>(seed: u64, trials: u64, work: F) -> [u64; K]
where
    F: Fn(&mut SimRng, u64) -> [u64; K] + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(trials - c * CHUNK);
            let mut rng = stream(seed, &[c]);
            work(&mut rng, n)
        })
        .reduce(|| [0; K], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        })
}
