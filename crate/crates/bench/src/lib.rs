//! Shared fixtures for the benchmarks.

use tordisc_core::latin::{sample_coordinate_permuted, WeakLatinHypercube};
use tordisc_core::{GridWeights, WeightedPointSet};

/// A fixed pseudo-random weak Latin hypercube of order `m` in `d` dimensions.
pub fn hypercube(m: usize, d: usize) -> WeakLatinHypercube {
    let h0 = WeakLatinHypercube::cyclic(m, d).expect("valid shape");
    sample_coordinate_permuted(&h0, 0x5eed ^ ((m as u64) << 8) ^ d as u64)
}

pub fn indicator(m: usize, d: usize) -> GridWeights<f64> {
    hypercube(m, d).indicator()
}

pub fn point_set(m: usize, d: usize) -> WeightedPointSet<f64> {
    hypercube(m, d).to_point_set()
}
