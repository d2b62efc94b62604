//! Counter-based Monte Carlo streams.
//!
//! Sample `i` of a run with seed `s` draws its random numbers from the
//! ChaCha8 keystream keyed by `s`, stream `i / BLOCK_LEN`, at a fixed word
//! offset within that stream. Blocks are evaluated in parallel and reduced in
//! block order, so estimates are bit-identical for any thread count.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{point_at, UnitVec3};

/// Samples per stream block.
pub const BLOCK_LEN: u64 = 4096;

/// Generator for block `block` of the run keyed by `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

/// Averages `sample(rng)` over `n` draws. Every call of `sample` must consume
/// the same number of random words for the per-sample stream positions to be
/// fixed.
pub fn estimate<F>(n: u64, seed: u64, sample: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK_LEN);
    let partials: Vec<Sums> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(seed, block);
            let len = BLOCK_LEN.min(n - block * BLOCK_LEN);
            let mut s = Sums::default();
            for _ in 0..len {
                let v = sample(&mut rng);
                s.n += 1;
                s.sum += v;
                s.sum_sq += v * v;
            }
            s
        })
        .collect();
    let total = partials.iter().fold(Sums::default(), |acc, s| Sums {
        n: acc.n + s.n,
        sum: acc.sum + s.sum,
        sum_sq: acc.sum_sq + s.sum_sq,
    });
    summarize(total)
}

fn summarize(s: Sums) -> Estimate {
    if s.n == 0 {
        return Estimate {
            mean: f64::NAN,
            std_err: f64::NAN,
            samples: 0,
        };
    }
    let n = s.n as f64;
    let mean = s.sum / n;
    let std_err = if s.n > 1 {
        let var = ((s.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Estimate {
        mean,
        std_err,
        samples: s.n,
    }
}

/// Uniform point on the unit sphere (Archimedes: the coordinate along any
/// axis is uniform on [-1, 1]). Consumes two `f64` draws.
pub fn uniform_on_sphere<R: Rng + ?Sized>(rng: &mut R) -> UnitVec3 {
    let cos_tau = 2.0 * rng.random::<f64>() - 1.0;
    let mu = TAU * rng.random::<f64>();
    point_at(mu, cos_tau.clamp(-1.0, 1.0).acos())
}

/// Polar angle distributed with density `sin(tau) / 2` on [0, pi].
pub fn polar_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos().min(PI)
}

/// Azimuth uniform on [0, 2 pi).
pub fn azimuth<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    TAU * rng.random::<f64>()
}
