use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{sample_coordinate_permuted_with, WeakLatinHypercube};
use crate::error::{Error, Result};
use crate::grid::GridWeights;
use crate::points::WeightedPointSet;
use crate::scalar::Scalar;

/// Hypercubes of a common `(M, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeFamily {
    members: Vec<WeakLatinHypercube>,
    disjoint: bool,
}

impl HypercubeFamily {
    pub fn new(members: Vec<WeakLatinHypercube>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty hypercube family".into()))?;
        if let Some(h) = members
            .iter()
            .find(|h| h.order() != first.order() || h.dim() != first.dim())
        {
            return Err(Error::InvalidArgument(format!(
                "family mixes (M, d) = ({}, {}) and ({}, {})",
                first.order(),
                first.dim(),
                h.order(),
                h.dim()
            )));
        }
        let disjoint = members
            .iter()
            .enumerate()
            .all(|(i, a)| members[..i].iter().all(|b| a.is_disjoint_from(b)));
        Ok(Self { members, disjoint })
    }

    pub fn members(&self) -> &[WeakLatinHypercube] {
        &self.members
    }

    pub fn is_disjoint(&self) -> bool {
        self.disjoint
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sum of the member indicators.
    pub fn union_weights<S: Scalar>(&self) -> GridWeights<S> {
        let grid = self.members[0].grid();
        let mut w = GridWeights::zeros(grid);
        let one = S::one();
        for h in &self.members {
            for c in h.cells() {
                w.add(c, &one);
            }
        }
        w
    }

    pub fn union_point_set<S: Scalar>(&self) -> WeightedPointSet<S> {
        self.union_weights::<S>().to_point_set()
    }
}

/// `H_j(m) = (H_0(m) + j) mod M` for `j = 0,…,r−1`.
pub fn disjoint_family_from(h0: &WeakLatinHypercube, r: usize) -> Result<HypercubeFamily> {
    let m = h0.order();
    if r == 0 || r > m {
        return Err(Error::InvalidArgument(format!("need 1 <= r <= M = {m}, got r = {r}")));
    }
    let members = (0..r)
        .map(|j| {
            let table = h0.table().iter().map(|&v| (v + j) % m).collect();
            WeakLatinHypercube::new_unchecked(m, h0.dim(), table)
        })
        .collect();
    Ok(HypercubeFamily {
        members,
        disjoint: true,
    })
}

/// Shifts of a coordinate-permuted cyclic hypercube.
pub fn disjoint_family(order: usize, dim: usize, r: usize, seed: u64) -> Result<HypercubeFamily> {
    let base = WeakLatinHypercube::cyclic(order, dim)?;
    let h0 = sample_coordinate_permuted_with(&base, &mut ChaCha8Rng::seed_from_u64(seed));
    disjoint_family_from(&h0, r)
}
