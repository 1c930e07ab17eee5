//! Reproducible random streams.
//!
//! Every randomized operation takes a `u64` seed. Parallel work is split into
//! a fixed number of chunks independent of the thread count; chunk `i` draws
//! from ChaCha8 seeded with `seed` on stream `i`, so results depend only on
//! the seed and the chunking.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Splits `n` draws into `chunks` contiguous pieces, as (index, size).
pub fn chunks(n: u64, chunks: u64) -> Vec<(u64, u64)> {
    let chunks = chunks.max(1);
    (0..chunks)
        .map(|i| (i, n / chunks + u64::from(i < n % chunks)))
        .filter(|&(_, k)| k > 0)
        .collect()
}
