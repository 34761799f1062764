//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit generator. Streams are
//! identified by a `(seed, stream)` pair; child streams are derived from a
//! parent by mixing a textual label and an index into the stream id, so the
//! randomness consumed by a computation depends only on the root seed and the
//! names of the sub-computations, never on thread scheduling.
//!
//! Derivation rule: `child(label, i).stream = mix(mix(stream ^ fnv1a(label)) ^ i)`
//! where `mix` is the SplitMix64 finalizer. The seed is inherited unchanged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator used by every sampler in the crate.
pub type SimRng = ChaCha8Rng;

/// Number of samples drawn from one derived stream in chunked Monte Carlo loops.
pub const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        RngSeed { seed, stream }
    }

    pub fn child(&self, label: &str, index: u64) -> RngSeed {
        let stream = mix64(mix64(self.stream ^ fnv1a(label)) ^ index);
        RngSeed { seed: self.seed, stream }
    }

    pub fn rng(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

impl std::fmt::Display for RngSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{:016x}", self.seed, self.stream)
    }
}

/// Runs `n` independent draws split into fixed-size chunks, one derived
/// stream per chunk, in parallel. The output order (and therefore every
/// value) is independent of the number of worker threads.
pub fn par_draws<T, F>(seed: &RngSeed, label: &str, n: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let nested: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.child(label, c as u64).rng();
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    nested.into_iter().flatten().collect()
}

/// Fallible variant of [`par_draws`]; the first error (in chunk order) wins.
pub fn try_par_draws<T, E, F>(seed: &RngSeed, label: &str, n: usize, draw: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(&mut SimRng) -> Result<T, E> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let nested: Vec<Result<Vec<T>, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.child(label, c as u64).rng();
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for chunk in nested {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Like [`try_par_draws`], but the closure also receives the global index
/// of the draw, for loops over a fixed list of inputs.
pub fn try_par_indexed<T, E, F>(seed: &RngSeed, label: &str, n: usize, draw: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut SimRng) -> Result<T, E> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let nested: Vec<Result<Vec<T>, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.child(label, c as u64).rng();
            let end = n.min((c + 1) * CHUNK);
            (c * CHUNK..end).map(|i| draw(i, &mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for chunk in nested {
        out.extend(chunk?);
    }
    Ok(out)
}
