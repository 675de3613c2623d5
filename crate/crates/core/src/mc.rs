//! Seeded, worker-count-invariant Monte Carlo plumbing.
//!
//! Sample indices are cut into fixed chunks of [`CHUNK`] samples. Chunk `c`
//! of job `tag` under `seed` always draws from ChaCha8 stream `c` of the key
//! `(seed, tag)`, and per-chunk results are combined in chunk order, so the
//! output does not depend on how rayon schedules the chunks.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Samples per substream.
pub const CHUNK: usize = 2048;

/// The generator for chunk `index` of job `tag`.
pub fn substream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    key[16..24].copy_from_slice(b"wgraph\0\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Job tag from a job id and up to three sub-indices.
pub fn tag(job: u16, a: u64, b: u64, c: u64) -> u64 {
    (u64::from(job) << 48) ^ (a << 32) ^ (b << 16) ^ c
}

/// Runs `f` over the chunks of `0..n` in parallel; results in chunk order.
pub fn map_chunks<T, F>(n: usize, seed: u64, tag: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>, &mut ChaCha8Rng) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, tag, c as u64);
            let lo = c * CHUNK;
            f(lo..(lo + CHUNK).min(n), &mut rng)
        })
        .collect()
}

/// Runs `f(i, rng_i)` for `i in 0..count` in parallel, each with its own
/// substream `i`; results in index order.
pub fn map_streams<T, F>(count: usize, seed: u64, tag: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| f(i, &mut substream(seed, tag, i as u64)))
        .collect()
}

/// Counts the samples for which `hit` returns true.
pub fn count_hits<F>(n: usize, seed: u64, tag: u64, hit: F) -> Proportion
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let hits = map_chunks(n, seed, tag, |range, rng| range.filter(|_| hit(rng)).count() as u64)
        .into_iter()
        .sum();
    Proportion { hits, n: n as u64 }
}

/// Draws `n` samples of `sample`, in index order.
pub fn collect_samples<F>(n: usize, seed: u64, tag: u64, sample: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    map_chunks(n, seed, tag, |range, rng| range.map(|_| sample(rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

/// A binomial proportion estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub n: u64,
}

impl Proportion {
    pub fn p_hat(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.hits as f64 / self.n as f64
        }
    }

    /// Binomial standard error `√(p(1−p)/n)`.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let p = self.p_hat();
        (p * (1.0 - p) / self.n as f64).sqrt()
    }

    /// z-score of `self − other` under independent binomial errors; zero
    /// when both standard errors vanish and the estimates agree.
    pub fn z_score(&self, other: &Proportion) -> f64 {
        let diff = self.p_hat() - other.p_hat();
        let se = (self.stderr().powi(2) + other.stderr().powi(2)).sqrt();
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            }
        } else {
            diff / se
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| collect_samples(10_000, 42, 7, |r| r.gen::<f64>()))
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.len(), 10_000);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn streams_differ_by_seed_and_tag() {
        let a: u64 = substream(1, 0, 0).gen();
        let b: u64 = substream(2, 0, 0).gen();
        let c: u64 = substream(1, 1, 0).gen();
        let d: u64 = substream(1, 0, 1).gen();
        assert!(a != b && a != c && a != d);
    }

    #[test]
    fn proportion_statistics() {
        let p = Proportion { hits: 25, n: 100 };
        assert_eq!(p.p_hat(), 0.25);
        assert!((p.stderr() - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        let zero = Proportion { hits: 0, n: 100 };
        assert_eq!(zero.z_score(&zero), 0.0);
        let hits = count_hits(50_000, 3, 0, |r| r.gen::<f64>() < 0.3);
        assert!((hits.p_hat() - 0.3).abs() < 4.0 * hits.stderr());
    }
}
