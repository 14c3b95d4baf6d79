//! Seeded random streams and order-stable parallel reduction.
//!
//! Every Monte Carlo routine splits its sample budget into fixed-size chunks.
//! Chunk `i` draws from a ChaCha8 generator seeded with the caller's seed and
//! switched to stream `i`, so the samples a chunk sees never depend on which
//! worker runs it. Chunk results are collected in index order and folded
//! sequentially; the result is bit-identical for any rayon pool size.
//!
//! Sub-seeds for nested work (trials, sweep cells) come from [`derive_seed`]:
//! FNV-1a over the tag bytes, XOR-ed with the parent seed and the index, then
//! passed through the SplitMix64 finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ops::Range;

/// Samples handled by one chunk in the parallel Monte Carlo loops.
pub const CHUNK: usize = 8192;

pub type StreamRng = ChaCha8Rng;

/// Generator for chunk `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent child seed for `(tag, index)` under `seed`.
pub fn derive_seed(seed: u64, tag: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(splitmix64(seed ^ h).wrapping_add(splitmix64(index)))
}

/// Runs `f` over `n` items split into chunks of `chunk`, in parallel, and
/// returns the per-chunk results in chunk order.
pub fn map_chunks<T, F>(n: usize, chunk: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, Range<usize>) -> T + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let lo = c * chunk;
            let hi = (lo + chunk).min(n);
            f(&mut rng, lo..hi)
        })
        .collect()
}

/// Running first and second moments of a scalar sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: u64,
    /// Set when the parameters fall where the estimator is known to degrade.
    pub warning: Option<String>,
}

impl McEstimate {
    pub fn from_moments(m: &Moments) -> Self {
        McEstimate {
            value: m.mean(),
            std_err: m.std_err(),
            samples: m.n,
            warning: None,
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.std_err *= factor.abs();
        self
    }

    pub fn with_warning(mut self, warning: Option<String>) -> Self {
        self.warning = warning;
        self
    }
}

/// Sample budget and seed for Monte Carlo backed operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: DEFAULT_SAMPLES, seed: 0 }
    }
}

/// Default Monte Carlo budget.
pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// Folds chunk moments in order.
pub fn merge_moments(parts: Vec<Moments>) -> Moments {
    parts.into_iter().fold(Moments::default(), Moments::merge)
}
