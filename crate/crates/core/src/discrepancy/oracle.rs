//! Monte Carlo estimate of the defining integrals `∫ D²`.
//!
//! This path evaluates the discrepancy function pointwise and never touches the
//! closed forms, so it serves as an independent check of them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::DiscrepancyKind;
use crate::error::{Error, Result};
use crate::points::WeightedPointSet;
use crate::scalar::Scalar;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Unbiased estimate of the squared discrepancy with its standard error.
///
/// Samples are split into fixed chunks; chunk `c` draws from the ChaCha8
/// stream `c` under `seed`, and chunk results are combined in order, so the
/// output depends only on `(set, kind, samples, seed)`.
pub fn l2_discrepancy_oracle<S: Scalar>(
    set: &WeightedPointSet<S>,
    kind: DiscrepancyKind,
    samples: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "at least 100 samples required, got {samples}"
        )));
    }
    if set.is_empty() {
        return Ok(OracleEstimate {
            estimate: 0.0,
            std_error: 0.0,
        });
    }
    let d = set.dim();
    let points = set.to_f64_points();
    let weights: Vec<f64> = set.weights().iter().map(Scalar::to_f64).collect();
    let total: f64 = weights.iter().sum();

    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(samples - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                draw_anchors(kind, &mut rng, &mut x, &mut y);
                let disc = discrepancy_at(&points, &weights, total, &x, &y);
                let v = disc * disc;
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));

    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    // The extreme domain {y > x} has volume 2^{-d}.
    let scale = match kind {
        DiscrepancyKind::Extreme => 0.5f64.powi(d as i32),
        _ => 1.0,
    };
    Ok(OracleEstimate {
        estimate: scale * mean,
        std_error: scale * (var / n).sqrt(),
    })
}

fn draw_anchors(kind: DiscrepancyKind, rng: &mut ChaCha8Rng, x: &mut [f64], y: &mut [f64]) {
    match kind {
        DiscrepancyKind::Star => {
            x.fill(0.0);
            y.iter_mut().for_each(|v| *v = rng.gen());
        }
        DiscrepancyKind::Extreme => {
            for (a, b) in x.iter_mut().zip(y.iter_mut()) {
                let (u, v): (f64, f64) = (rng.gen(), rng.gen());
                (*a, *b) = if u <= v { (u, v) } else { (v, u) };
            }
        }
        DiscrepancyKind::Periodic => {
            x.iter_mut().for_each(|v| *v = rng.gen());
            y.iter_mut().for_each(|v| *v = rng.gen());
        }
    }
}

fn discrepancy_at(points: &[Vec<f64>], weights: &[f64], total: f64, x: &[f64], y: &[f64]) -> f64 {
    let volume: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| if a < b { b - a } else { 1.0 - a + b })
        .product();
    let inside: f64 = points
        .iter()
        .zip(weights)
        .filter(|(z, _)| {
            z.iter()
                .zip(x.iter().zip(y))
                .all(|(zk, (xk, yk))| super::in_periodic_interval(xk, yk, zk))
        })
        .map(|(_, w)| w)
        .sum();
    inside - total * volume
}
