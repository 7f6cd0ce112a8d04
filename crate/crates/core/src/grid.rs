//! The discretized torus `(1/M){0,…,M-1}^d`, its rows, and weight arrays on it.

use crate::error::{Error, Result};
use crate::points::WeightedPointSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::scalar::{grid_coord, zero, Rational, Scalar};

/// Grid of resolution `order` (M) in `dim` (d) dimensions.
///
/// Cells are indexed row-major with coordinate 0 most significant. Points are
/// stored as integer coordinates and only embedded as `m/M` on demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    order: usize,
    dim: usize,
}

impl TorusGrid {
    pub fn new(order: usize, dim: usize) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(Error::InvalidGrid { order, dim });
        }
        Ok(Self { order, dim })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `M^d`.
    pub fn cell_count(&self) -> usize {
        self.order.pow(self.dim as u32)
    }

    /// Number of rows along one axis, `M^{d-1}`.
    pub fn rows_per_axis(&self) -> usize {
        self.order.pow(self.dim as u32 - 1)
    }

    /// Total number of rows, `d·M^{d-1}`.
    pub fn row_count(&self) -> usize {
        self.dim * self.rows_per_axis()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        coords.iter().fold(0, |acc, &c| {
            debug_assert!(c < self.order);
            acc * self.order + c
        })
    }

    pub fn coords(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        self.coords_into(index, &mut out);
        out
    }

    pub fn coords_into(&self, mut index: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = index % self.order;
            index /= self.order;
        }
    }

    /// Embeds integer coordinates as the point `m/M ∈ [0,1)^d`.
    pub fn embed<S: Scalar>(&self, coords: &[usize]) -> Vec<S> {
        coords.iter().map(|&c| grid_coord(c, self.order)).collect()
    }

    /// The row through `coords` along `axis` (0-based).
    pub fn row_through(&self, axis: usize, coords: &[usize]) -> Row {
        let fixed = coords
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != axis)
            .map(|(_, &c)| c)
            .collect();
        Row { axis, fixed }
    }

    /// Dense index in `0..row_count()`: axis-major, then row-major over the fixed coordinates.
    pub fn row_index(&self, row: &Row) -> usize {
        let within = row.fixed.iter().fold(0, |acc, &c| acc * self.order + c);
        row.axis * self.rows_per_axis() + within
    }

    pub fn row_from_index(&self, index: usize) -> Row {
        let per_axis = self.rows_per_axis();
        let axis = index / per_axis;
        let mut rest = index % per_axis;
        let mut fixed = vec![0; self.dim - 1];
        for slot in fixed.iter_mut().rev() {
            *slot = rest % self.order;
            rest /= self.order;
        }
        Row { axis, fixed }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row> + '_ {
        (0..self.row_count()).map(move |i| self.row_from_index(i))
    }

    /// Cell indices of the `M` points in `row`, ordered by the free coordinate.
    pub fn row_cells(&self, row: &Row) -> Vec<usize> {
        let mut coords = Vec::with_capacity(self.dim);
        (0..self.order)
            .map(|free| {
                coords.clear();
                coords.extend_from_slice(&row.fixed[..row.axis]);
                coords.push(free);
                coords.extend_from_slice(&row.fixed[row.axis..]);
                self.index(&coords)
            })
            .collect()
    }
}

/// A `k`-row: the `M` grid points that differ only in coordinate `axis`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    /// 0-based axis that varies along the row.
    pub axis: usize,
    /// The other `d-1` coordinates, in axis order.
    pub fixed: Vec<usize>,
}

/// A weight function `w: G → S`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWeights<S> {
    grid: TorusGrid,
    weights: Vec<S>,
}

impl<S: Scalar> GridWeights<S> {
    pub fn new(grid: TorusGrid, weights: Vec<S>) -> Result<Self> {
        if weights.len() != grid.cell_count() {
            return Err(Error::WeightLength {
                expected: grid.cell_count(),
                got: weights.len(),
            });
        }
        Ok(Self { grid, weights })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, zero())
    }

    pub fn constant(grid: TorusGrid, value: S) -> Self {
        Self {
            grid,
            weights: vec![value; grid.cell_count()],
        }
    }

    /// `w_r(x) = r/M` for every cell, so every row sums to `r`.
    pub fn constant_row_sum(grid: TorusGrid, r: &S) -> Self {
        Self::constant(grid, r.clone() / &S::from_usize(grid.order()))
    }

    /// 0/1 indicator of the given cells.
    pub fn indicator(grid: TorusGrid, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut w = Self::zeros(grid);
        for c in cells {
            w.weights[c] = S::one();
        }
        w
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn get(&self, cell: usize) -> &S {
        &self.weights[cell]
    }

    pub fn set(&mut self, cell: usize, value: S) {
        self.weights[cell] = value;
    }

    pub fn add(&mut self, cell: usize, value: &S) {
        self.weights[cell] += value;
    }

    pub fn total(&self) -> S {
        self.weights.iter().fold(zero(), |acc, w| acc + w)
    }

    pub fn row_sum(&self, row: &Row) -> S {
        self.grid
            .row_cells(row)
            .into_iter()
            .fold(zero(), |acc, c| acc + &self.weights[c])
    }

    /// Cells with nonzero weight, in index order.
    pub fn support(&self) -> impl Iterator<Item = (usize, &S)> {
        self.weights.iter().enumerate().filter(|(_, w)| !w.is_zero())
    }

    /// The weighted point set `{(m/M, w(m)) : w(m) ≠ 0}`.
    pub fn to_point_set(&self) -> WeightedPointSet<S> {
        let (points, weights) = self
            .support()
            .map(|(c, w)| (self.grid.embed(&self.grid.coords(c)), w.clone()))
            .unzip();
        WeightedPointSet::from_parts_unchecked(self.grid.dim(), points, weights)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> GridWeights<T> {
        GridWeights {
            grid: self.grid,
            weights: self.weights.iter().map(f).collect(),
        }
    }
}

impl GridWeights<Rational> {
    /// Places a rational point set on the coarsest grid containing it: `M` is
    /// the least common multiple of all coordinate denominators.
    pub fn from_rational_points(set: &WeightedPointSet<Rational>, max_cells: usize) -> Result<Self> {
        let lcm = set
            .points()
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let order = lcm.to_usize().filter(|m| {
            m.checked_pow(set.dim() as u32).is_some_and(|cells| cells <= max_cells)
        });
        let Some(order) = order else {
            return Err(Error::Infeasible {
                reason: format!("common grid of order {lcm} in dimension {} exceeds {max_cells} cells", set.dim()),
                estimate: format!("{lcm}^{}", set.dim()),
            });
        };
        let grid = TorusGrid::new(order, set.dim())?;
        let m = Rational::from_usize(order);
        let mut w = Self::zeros(grid);
        let mut coords = vec![0; set.dim()];
        for (p, weight) in set.iter() {
            for (k, c) in p.iter().enumerate() {
                coords[k] = (c.clone() * &m).to_integer().to_usize().expect("coordinate in [0, 1)");
            }
            w.add(grid.index(&coords), weight);
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snaps_points_to_common_grid() {
        let q = Rational::ratio;
        let set = WeightedPointSet::new(2, vec![vec![q(1, 2), q(1, 3)], vec![q(0, 1), q(5, 6)]], vec![q(1, 1), q(2, 1)]).unwrap();
        let w = GridWeights::from_rational_points(&set, 1000).unwrap();
        assert_eq!(w.grid().order(), 6);
        assert_eq!(w.get(w.grid().index(&[3, 2])), &q(1, 1));
        assert_eq!(w.get(w.grid().index(&[0, 5])), &q(2, 1));
        assert!(matches!(GridWeights::from_rational_points(&set, 35), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn index_round_trip() {
        let g = TorusGrid::new(3, 4).unwrap();
        for i in 0..g.cell_count() {
            assert_eq!(g.index(&g.coords(i)), i);
        }
        assert_eq!(g.index(&[0, 0, 1, 2]), 5);
    }

    #[test]
    fn rows_partition_the_grid_per_axis() {
        let g = TorusGrid::new(3, 3).unwrap();
        for axis in 0..g.dim() {
            let mut hits = vec![0; g.cell_count()];
            for row in g.rows().filter(|r| r.axis == axis) {
                let cells = g.row_cells(&row);
                assert_eq!(cells.len(), g.order());
                for c in cells {
                    hits[c] += 1;
                }
            }
            assert!(hits.iter().all(|&h| h == 1));
        }
        // every point lies in exactly d rows
        let mut hits = vec![0; g.cell_count()];
        for row in g.rows() {
            for c in g.row_cells(&row) {
                hits[c] += 1;
            }
        }
        assert!(hits.iter().all(|&h| h == g.dim()));
    }

    #[test]
    fn row_index_round_trip() {
        let g = TorusGrid::new(4, 3).unwrap();
        for i in 0..g.row_count() {
            assert_eq!(g.row_index(&g.row_from_index(i)), i);
        }
        let x = [1, 2, 3];
        for axis in 0..3 {
            let row = g.row_through(axis, &x);
            assert!(g.row_cells(&row).contains(&g.index(&x)));
        }
    }

    #[test]
    fn single_cell_torus() {
        let g = TorusGrid::new(1, 2).unwrap();
        assert_eq!(g.cell_count(), 1);
        assert_eq!(g.row_count(), 2);
        assert_eq!(g.row_cells(&g.row_from_index(1)), vec![0]);
        assert!(TorusGrid::new(0, 2).is_err());
        assert!(TorusGrid::new(2, 0).is_err());
    }

    #[test]
    fn constant_row_sum_weights() {
        let g = TorusGrid::new(3, 2).unwrap();
        let w = GridWeights::<Rational>::constant_row_sum(g, &Rational::ratio(2, 1));
        for row in g.rows() {
            assert_eq!(w.row_sum(&row), Rational::ratio(2, 1));
        }
        assert!(GridWeights::<f64>::new(g, vec![0.0; 8]).is_err());
    }
}
