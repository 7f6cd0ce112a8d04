use super::check_permutation;
use crate::error::{Error, Result};
use crate::grid::{GridWeights, TorusGrid};
use crate::points::WeightedPointSet;
use crate::scalar::Scalar;

/// The diagonal set `{(σ_1(m), …, σ_d(m)) : m = 0,…,M−1}` of `M` points.
///
/// Experimental: no identity from the weak-hypercube theory applies here.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrongLatinHypercube {
    order: usize,
    perms: Vec<Vec<usize>>,
}

impl StrongLatinHypercube {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        let order = perms.first().map_or(0, Vec::len);
        if order == 0 || perms.len() < 2 {
            return Err(Error::InvalidArgument(
                "strong Latin hypercubes need d >= 2 nonempty permutations".into(),
            ));
        }
        for p in &perms {
            if p.len() != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    got: p.len(),
                });
            }
            check_permutation(p)?;
        }
        Ok(Self { order, perms })
    }

    /// All coordinates equal: the main diagonal.
    pub fn diagonal(order: usize, dim: usize) -> Result<Self> {
        Self::new((0..dim).map(|_| (0..order).collect()).collect())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.perms.len()
    }

    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// Swaps `σ_axis(a)` and `σ_axis(b)`.
    pub fn swap(&mut self, axis: usize, a: usize, b: usize) {
        self.perms[axis].swap(a, b);
    }

    pub fn points(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|m| self.perms.iter().map(|p| p[m]).collect())
            .collect()
    }

    pub fn grid(&self) -> TorusGrid {
        TorusGrid::new(self.order, self.dim()).expect("validated shape")
    }

    pub fn indicator<S: Scalar>(&self) -> GridWeights<S> {
        let g = self.grid();
        GridWeights::indicator(g, self.points().iter().map(|p| g.index(p)))
    }

    pub fn to_point_set<S: Scalar>(&self) -> WeightedPointSet<S> {
        self.indicator::<S>().to_point_set()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections_are_permutations() {
        let s = StrongLatinHypercube::new(vec![vec![0, 1, 2], vec![2, 0, 1], vec![1, 2, 0]]).unwrap();
        assert_eq!(s.points(), vec![vec![0, 2, 1], vec![1, 0, 2], vec![2, 1, 0]]);
        assert_eq!(s.to_point_set::<f64>().len(), 3);
        assert!(StrongLatinHypercube::new(vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(StrongLatinHypercube::new(vec![vec![0, 1]]).is_err());
    }
}
