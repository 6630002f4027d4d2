//! Deterministic, worker-count independent Monte Carlo plumbing.
//!
//! Work is cut into fixed-size chunks; chunk `c` draws from a ChaCha stream
//! keyed by `(seed, c)`, and chunk results are merged in chunk order. The
//! result is therefore bit-identical for any number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub(crate) const CHUNK: usize = 2048;

/// Streaming mean / variance accumulator (Welford, merged with Chan's rule).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

pub(crate) fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `n` draws in parallel chunks; `draw` writes one sample per call into
/// the per-chunk accumulators (one per output dimension).
pub(crate) fn run_chunked<F>(n: usize, dims: usize, seed: u64, draw: F) -> Vec<RunningStats>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Vec<RunningStats>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut acc = vec![RunningStats::default(); dims];
            let mut buf = vec![0.0; dims];
            for _ in 0..len {
                draw(&mut rng, &mut buf);
                for (a, v) in acc.iter_mut().zip(buf.iter()) {
                    a.push(*v);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![RunningStats::default(); dims];
    for part in &partial {
        for (t, p) in total.iter_mut().zip(part.iter()) {
            t.merge(p);
        }
    }
    total
}

/// Caps the global worker pool at `PLANNER_THREADS` when that variable is set.
/// Must run before any parallel work; later calls are no-ops.
pub fn configure_threads_from_env() {
    if let Some(n) = std::env::var("PLANNER_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.25).collect();
        let mut seq = RunningStats::default();
        xs.iter().for_each(|x| seq.push(*x));
        let mut a = RunningStats::default();
        let mut b = RunningStats::default();
        xs[..313].iter().for_each(|x| a.push(*x));
        xs[313..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert_eq!(a.n, seq.n);
        assert!((a.mean - seq.mean).abs() < 1e-12);
        assert!((a.variance() - seq.variance()).abs() < 1e-9);
    }

    #[test]
    fn chunked_result_is_independent_of_pool_size() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                run_chunked(10_000, 2, 7, |rng, out| {
                    let u: f64 = rng.random();
                    out[0] = u;
                    out[1] = u * u;
                })
            })
        };
        assert_eq!(run(1), run(4));
    }
}
