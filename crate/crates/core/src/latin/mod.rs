//! Weak Latin hypercubes: point sets on the grid meeting every row exactly once.
//!
//! A weak `M`-Latin hypercube in `d` dimensions is stored as a function
//! `H: {0,…,M−1}^{d−1} → {0,…,M−1}`. Its point set is `{(m, H(m))}`, so rows
//! along the last axis are met once automatically and the remaining `d−1`
//! axes are checked by [`validate`].

mod enumerate;
mod family;
mod sample;
mod strong;

pub use enumerate::{count_all, enumerate_all, enumerate_in_order, estimated_count, is_enumerable, Enumerator};
pub use family::{disjoint_family, disjoint_family_from, HypercubeFamily};
pub use sample::{
    jacobson_matthews, random_permutations, sample_coordinate_permuted, sample_coordinate_permuted_with,
    sample_uniform, LatinSquareChain, UniformMethod, UniformSampler,
};
pub use strong::StrongLatinHypercube;

use crate::error::{Error, Result};
use crate::grid::{GridWeights, TorusGrid};
use crate::points::WeightedPointSet;
use crate::scalar::{grid_coord, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeakLatinHypercube {
    order: usize,
    dim: usize,
    table: Vec<usize>,
}

/// Row-major index of `coords` in base `order`.
pub(crate) fn flat_index(coords: &[usize], order: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * order + c)
}

pub(crate) fn unflatten(mut index: usize, order: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % order;
        index /= order;
    }
}

fn check_shape(order: usize, dim: usize) -> Result<()> {
    if order == 0 || dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "weak Latin hypercubes need M >= 1 and d >= 2, got M = {order}, d = {dim}"
        )));
    }
    Ok(())
}

/// Checks the row property of a hypercube table.
///
/// Rows are scanned axis by axis in the grid's row order, and the first row
/// whose point count differs from 1 is reported.
pub fn validate(order: usize, dim: usize, table: &[usize]) -> Result<()> {
    check_shape(order, dim)?;
    let domain = order.pow(dim as u32 - 1);
    if table.len() != domain {
        return Err(Error::TableShape {
            expected: domain,
            got: table.len(),
        });
    }
    if let Some((position, &value)) = table.iter().enumerate().find(|(_, &v)| v >= order) {
        return Err(Error::ValueOutOfRange { position, value, order });
    }
    let mut coords = vec![0; dim - 1];
    let mut counts = vec![0usize; domain];
    for axis in 0..dim - 1 {
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, &v) in table.iter().enumerate() {
            unflatten(i, order, &mut coords);
            let others = coords
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != axis)
                .fold(0, |acc, (_, &c)| acc * order + c);
            counts[others * order + v] += 1;
        }
        if let Some((row, &count)) = counts.iter().enumerate().find(|(_, &c)| c != 1) {
            let mut fixed = vec![0; dim - 1];
            unflatten(row, order, &mut fixed);
            return Err(Error::RowViolation { axis, fixed, count });
        }
    }
    Ok(())
}

/// Checks that `sigma` is a bijection of `{0,…,N−1}`.
pub fn check_permutation(sigma: &[usize]) -> Result<()> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for (i, &s) in sigma.iter().enumerate() {
        if s >= n {
            return Err(Error::NotPermutation(format!("sigma({i}) = {s} is not below {n}")));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::NotPermutation(format!("value {s} appears twice")));
        }
    }
    Ok(())
}

/// The permutation set `X(σ) = {(m/N, σ(m)/N)}`.
pub fn permutation_set<S: Scalar>(sigma: &[usize]) -> Result<WeightedPointSet<S>> {
    Ok(WeakLatinHypercube::from_permutation(sigma.to_vec())?.to_point_set())
}

/// Number of coordinates in which `m` and `n` differ.
pub fn hamming_delta(m: &[usize], n: &[usize]) -> Result<usize> {
    if m.len() != n.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            got: n.len(),
        });
    }
    Ok(m.iter().zip(n).filter(|(a, b)| a != b).count())
}

impl WeakLatinHypercube {
    pub fn new(order: usize, dim: usize, table: Vec<usize>) -> Result<Self> {
        validate(order, dim, &table)?;
        Ok(Self { order, dim, table })
    }

    pub(crate) fn new_unchecked(order: usize, dim: usize, table: Vec<usize>) -> Self {
        debug_assert!(validate(order, dim, &table).is_ok());
        Self { order, dim, table }
    }

    pub fn from_permutation(sigma: Vec<usize>) -> Result<Self> {
        check_permutation(&sigma)?;
        if sigma.is_empty() {
            return Err(Error::NotPermutation("empty permutation".into()));
        }
        Ok(Self {
            order: sigma.len(),
            dim: 2,
            table: sigma,
        })
    }

    /// `H(m) = (m_1 + … + m_{d−1}) mod M`.
    pub fn cyclic(order: usize, dim: usize) -> Result<Self> {
        check_shape(order, dim)?;
        let domain = order.pow(dim as u32 - 1);
        let mut coords = vec![0; dim - 1];
        let table = (0..domain)
            .map(|i| {
                unflatten(i, order, &mut coords);
                coords.iter().sum::<usize>() % order
            })
            .collect();
        Ok(Self { order, dim, table })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Values of `H` in row-major order over `(m_1,…,m_{d−1})`.
    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn into_table(self) -> Vec<usize> {
        self.table
    }

    pub fn value(&self, domain: &[usize]) -> usize {
        self.table[flat_index(domain, self.order)]
    }

    /// `M^{d−1}`.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn grid(&self) -> TorusGrid {
        TorusGrid::new(self.order, self.dim).expect("validated shape")
    }

    /// Integer coordinates `(m, H(m))` of every point, in domain order.
    pub fn points(&self) -> Vec<Vec<usize>> {
        let mut coords = vec![0; self.dim - 1];
        self.table
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                unflatten(i, self.order, &mut coords);
                let mut p = coords.clone();
                p.push(v);
                p
            })
            .collect()
    }

    /// Grid cell indices of the points.
    pub fn cells(&self) -> Vec<usize> {
        // with coordinate 0 most significant, (m, v) has index m·M + v
        self.table
            .iter()
            .enumerate()
            .map(|(i, &v)| i * self.order + v)
            .collect()
    }

    /// `X(H) = (1/M) H` with unit weights.
    pub fn to_point_set<S: Scalar>(&self) -> WeightedPointSet<S> {
        let points = self
            .points()
            .into_iter()
            .map(|p| p.into_iter().map(|c| grid_coord(c, self.order)).collect())
            .collect();
        let weights = vec![S::one(); self.len()];
        WeightedPointSet::from_parts_unchecked(self.dim, points, weights)
    }

    pub fn indicator<S: Scalar>(&self) -> GridWeights<S> {
        GridWeights::indicator(self.grid(), self.cells())
    }

    pub fn is_disjoint_from(&self, other: &Self) -> bool {
        self.order == other.order
            && self.dim == other.dim
            && self.table.iter().zip(&other.table).all(|(a, b)| a != b)
    }

    /// The hypercube `{(σ_1(m_1), …, σ_d(m_d)) : m ∈ H}`.
    pub fn permute_coordinates(&self, perms: &[Vec<usize>]) -> Result<Self> {
        if perms.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: perms.len(),
            });
        }
        for p in perms {
            check_permutation(p)?;
            if p.len() != self.order {
                return Err(Error::NotPermutation(format!(
                    "permutation of length {} applied to order {}",
                    p.len(),
                    self.order
                )));
            }
        }
        let (domain_perms, value_perm) = perms.split_at(self.dim - 1);
        let mut table = vec![0; self.table.len()];
        let mut coords = vec![0; self.dim - 1];
        for (i, &v) in self.table.iter().enumerate() {
            unflatten(i, self.order, &mut coords);
            for (c, p) in coords.iter_mut().zip(domain_perms) {
                *c = p[*c];
            }
            table[flat_index(&coords, self.order)] = value_perm[0][v];
        }
        Ok(Self::new_unchecked(self.order, self.dim, table))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn validation_examples() {
        assert!(WeakLatinHypercube::new(4, 2, vec![0, 1, 2, 3]).is_ok());
        assert!(WeakLatinHypercube::new(2, 3, vec![0, 1, 1, 0]).is_ok());
        let err = WeakLatinHypercube::new(2, 3, vec![0, 0, 0, 0]).unwrap_err();
        assert_eq!(
            err,
            Error::RowViolation {
                axis: 0,
                fixed: vec![0, 0],
                count: 2
            }
        );
        assert!(matches!(
            WeakLatinHypercube::new(2, 3, vec![0, 1, 1]),
            Err(Error::TableShape { .. })
        ));
        assert!(matches!(
            WeakLatinHypercube::new(2, 2, vec![0, 2]),
            Err(Error::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn cyclic_is_valid() {
        for (m, d) in [(1, 2), (3, 2), (4, 3), (3, 4), (2, 5)] {
            let h = WeakLatinHypercube::cyclic(m, d).unwrap();
            assert!(validate(m, d, h.table()).is_ok());
            assert_eq!(h.len(), m.pow(d as u32 - 1));
        }
    }

    #[test]
    fn point_sets() {
        let h = WeakLatinHypercube::new(2, 3, vec![0, 1, 1, 0]).unwrap();
        let x = h.to_point_set::<Rational>();
        let half = Rational::ratio(1, 2);
        let z = Rational::ratio(0, 1);
        assert_eq!(
            x.points(),
            &[
                vec![z.clone(), z.clone(), z.clone()],
                vec![z.clone(), half.clone(), half.clone()],
                vec![half.clone(), z.clone(), half.clone()],
                vec![half.clone(), half.clone(), z.clone()],
            ]
        );
        let x = permutation_set::<Rational>(&[1, 2, 0]).unwrap();
        assert_eq!(x.points()[2], vec![Rational::ratio(2, 3), z.clone()]);
        assert_eq!(permutation_set::<f64>(&[0]).unwrap().points(), &[vec![0.0, 0.0]]);
        assert!(permutation_set::<f64>(&[0, 0]).is_err());
        assert!(permutation_set::<f64>(&[1, 2]).is_err());
    }

    #[test]
    fn cells_match_grid_index() {
        let h = WeakLatinHypercube::cyclic(3, 3).unwrap();
        let g = h.grid();
        let direct: Vec<usize> = h.points().iter().map(|p| g.index(p)).collect();
        assert_eq!(h.cells(), direct);
    }

    #[test]
    fn indicator_meets_every_row_once() {
        let h = WeakLatinHypercube::cyclic(3, 4).unwrap();
        let w = h.indicator::<Rational>();
        for row in h.grid().rows() {
            assert_eq!(w.row_sum(&row), Rational::ratio(1, 1));
        }
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_delta(&[1, 2], &[1, 2]).unwrap(), 0);
        assert_eq!(hamming_delta(&[0, 0], &[1, 0]).unwrap(), 1);
        assert_eq!(hamming_delta(&[0, 1, 2], &[2, 1, 0]).unwrap(), 2);
        assert!(hamming_delta(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn coordinate_permutation_keeps_validity() {
        let h = WeakLatinHypercube::cyclic(4, 3).unwrap();
        let perms = vec![vec![1, 0, 3, 2], vec![3, 1, 2, 0], vec![2, 3, 0, 1]];
        let p = h.permute_coordinates(&perms).unwrap();
        assert!(validate(4, 3, p.table()).is_ok());
        let id: Vec<Vec<usize>> = (0..3).map(|_| (0..4).collect()).collect();
        assert_eq!(h.permute_coordinates(&id).unwrap(), h);
    }
}
