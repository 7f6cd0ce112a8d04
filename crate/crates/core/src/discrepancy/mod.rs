//! Star, extreme and periodic L2-discrepancy of weighted point sets.
//!
//! The closed-form (Warnock-type) evaluators here are the reference values;
//! [`oracle`] estimates the defining integrals directly, [`spectral`] evaluates
//! the periodic case on the grid through a multidimensional DFT, and
//! [`fourier`] holds the truncated Fourier series (periodic L2 and diaphony).

pub mod fourier;
pub mod oracle;
pub mod spectral;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::points::WeightedPointSet;
use num_traits::One;

use crate::grid::TorusGrid;
use crate::scalar::{one, zero, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscrepancyKind {
    /// Boxes anchored at the origin.
    Star,
    /// All ordinary boxes `[x, y)` with `x < y`.
    Extreme,
    /// All periodic boxes on the torus.
    Periodic,
}

impl DiscrepancyKind {
    pub const ALL: [DiscrepancyKind; 3] = [Self::Star, Self::Extreme, Self::Periodic];

    pub fn name(self) -> &'static str {
        match self {
            Self::Star => "star",
            Self::Extreme => "extreme",
            Self::Periodic => "periodic",
        }
    }
}

impl fmt::Display for DiscrepancyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiscrepancyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Self::Star),
            "extreme" => Ok(Self::Extreme),
            "periodic" => Ok(Self::Periodic),
            other => Err(Error::InvalidArgument(format!("unknown discrepancy kind `{other}`"))),
        }
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `z ∈ [x, y)` for the periodic interval on `[0, 1)`.
#[inline]
pub(crate) fn in_periodic_interval<S: PartialOrd>(x: &S, y: &S, z: &S) -> bool {
    if x < y {
        x <= z && z < y
    } else {
        z >= x || z < y
    }
}

/// Lebesgue measure of the periodic box `[x, y)`.
pub fn box_volume<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    check_dims(x.len(), y.len())?;
    Ok(x.iter().zip(y).fold(one::<S>(), |acc, (a, b)| {
        let side = if a < b {
            b.clone() - a
        } else {
            one::<S>() - a + b
        };
        acc * side
    }))
}

/// `D_(X,w)(x, y) = Σ_{z ∈ [x,y)} w(z) − (Σ_z w(z)) |[x, y)|`.
pub fn discrepancy_function<S: Scalar>(set: &WeightedPointSet<S>, x: &[S], y: &[S]) -> Result<S> {
    check_dims(set.dim(), x.len())?;
    let volume = box_volume(x, y)?;
    let inside = set
        .iter()
        .filter(|(z, _)| {
            z.iter()
                .zip(x.iter().zip(y))
                .all(|(zk, (xk, yk))| in_periodic_interval(xk, yk, zk))
        })
        .fold(zero::<S>(), |acc, (_, w)| acc + w);
    Ok(inside - &(set.total_weight() * &volume))
}

/// Squared L2-discrepancy by the weighted Warnock-type closed forms.
///
/// The result can be a tiny negative number in float mode; it is not clamped
/// (see [`is_rounding_negative`]).
pub fn l2_discrepancy_warnock<S: Scalar>(set: &WeightedPointSet<S>, kind: DiscrepancyKind) -> S {
    let d = set.dim() as u32;
    let total = set.total_weight();
    let total_sq = total.clone() * &total;
    let pts = set.points();
    let w = set.weights();

    let pair_factor = |a: &S, b: &S| -> S {
        match kind {
            DiscrepancyKind::Star => one::<S>() - &a.max_of(b),
            DiscrepancyKind::Extreme => a.min_of(b) - &(a.clone() * b),
            DiscrepancyKind::Periodic => {
                let diff = (a.clone() - b).abs();
                S::ratio(1, 2) - &diff + &(diff.clone() * &diff)
            }
        }
    };
    let kernel = |i: usize, j: usize| -> S {
        pts[i]
            .iter()
            .zip(&pts[j])
            .fold(one::<S>(), |acc, (a, b)| acc * pair_factor(a, b))
    };

    // Σ_{x,y} w(x)w(y) K(x,y) with the symmetric off-diagonal counted twice.
    let mut row_terms = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        let mut off = zero::<S>();
        for j in 0..i {
            off += w[j].clone() * kernel(i, j);
        }
        let diag = w[i].clone() * kernel(i, i);
        row_terms.push(w[i].clone() * &(S::int(2) * off + diag));
    }
    let pair_sum = crate::scalar::pairwise_sum(&row_terms);

    let boundary = |f: &dyn Fn(&S) -> S| -> S {
        let terms: Vec<S> = pts
            .iter()
            .zip(w)
            .map(|(p, wi)| wi.clone() * p.iter().fold(one::<S>(), |acc, c| acc * f(c)))
            .collect();
        crate::scalar::pairwise_sum(&terms)
    };
    let half_pow = S::int(2).powu(d - 1);

    match kind {
        DiscrepancyKind::Star => {
            let b = boundary(&|c: &S| one::<S>() - &(c.clone() * c));
            total_sq / &S::int(3).powu(d) - &(total * &b / &half_pow) + &pair_sum
        }
        DiscrepancyKind::Extreme => {
            let b = boundary(&|c: &S| c.clone() * &(one::<S>() - c));
            total_sq / &S::int(12).powu(d) - &(total * &b / &half_pow) + &pair_sum
        }
        DiscrepancyKind::Periodic => pair_sum - &(total_sq / &S::int(3).powu(d)),
    }
}

/// Squared discrepancy of grid points `m/M` with unit weights (repeated cells
/// count with multiplicity), using integer arithmetic for the double sums.
///
/// Falls back to [`l2_discrepancy_warnock`] if an intermediate sum overflows `i128`.
pub fn l2_discrepancy_grid_exact(grid: TorusGrid, cells: &[usize], kind: DiscrepancyKind) -> Rational {
    match grid_sums(grid, cells, kind) {
        Some(sums) => sums.exact(grid, cells.len(), kind),
        None => {
            let pts = cells.iter().map(|&c| grid.embed(&grid.coords(c))).collect();
            let set = WeightedPointSet::from_parts_unchecked(grid.dim(), pts, vec![Rational::one(); cells.len()]);
            l2_discrepancy_warnock(&set, kind)
        }
    }
}

/// Float evaluation of [`l2_discrepancy_grid_exact`].
pub fn l2_discrepancy_grid_f64(grid: TorusGrid, cells: &[usize], kind: DiscrepancyKind) -> f64 {
    match grid_sums(grid, cells, kind) {
        Some(sums) => sums.float(grid, cells.len(), kind),
        None => l2_discrepancy_grid_exact(grid, cells, kind).to_f64(),
    }
}

/// Integer numerators of the Warnock sums for points `a/M`:
/// `pair = ΣΣ Π k(a, b)`, `boundary = Σ Π b(a)`, with per-axis denominators
/// `2M²` (periodic) or `M²` (star boundary, extreme) and `M` (star pair).
struct GridSums {
    pair: i128,
    boundary: i128,
}

fn grid_sums(grid: TorusGrid, cells: &[usize], kind: DiscrepancyKind) -> Option<GridSums> {
    let m = grid.order() as i128;
    let coords: Vec<Vec<i128>> = cells
        .iter()
        .map(|&c| grid.coords(c).into_iter().map(|v| v as i128).collect())
        .collect();
    let factor = |a: i128, b: i128| -> i128 {
        match kind {
            DiscrepancyKind::Star => m - a.max(b),
            DiscrepancyKind::Extreme => m * a.min(b) - a * b,
            DiscrepancyKind::Periodic => {
                let k = (a - b).abs();
                m * m - 2 * k * m + 2 * k * k
            }
        }
    };
    let mut pair: i128 = 0;
    for (i, x) in coords.iter().enumerate() {
        for (j, y) in coords.iter().enumerate().take(i + 1) {
            let mut prod: i128 = 1;
            for (&a, &b) in x.iter().zip(y) {
                prod = prod.checked_mul(factor(a, b))?;
            }
            let mult = if i == j { 1 } else { 2 };
            pair = pair.checked_add(prod.checked_mul(mult)?)?;
        }
    }
    let mut boundary: i128 = 0;
    if kind != DiscrepancyKind::Periodic {
        for x in &coords {
            let mut prod: i128 = 1;
            for &a in x {
                let f = match kind {
                    DiscrepancyKind::Star => m * m - a * a,
                    _ => a * (m - a),
                };
                prod = prod.checked_mul(f)?;
            }
            boundary = boundary.checked_add(prod)?;
        }
    }
    Some(GridSums { pair, boundary })
}

impl GridSums {
    fn exact(&self, grid: TorusGrid, n: usize, kind: DiscrepancyKind) -> Rational {
        let d = grid.dim() as u32;
        let m = Rational::from_usize(grid.order());
        let n = Rational::from_usize(n);
        let big = |v: i128| Rational::from_integer(num_bigint::BigInt::from(v));
        let m2d = m.powu(2 * d);
        match kind {
            DiscrepancyKind::Periodic => {
                big(self.pair) / (Rational::int(2) * &m * &m).powu(d) - n.clone() * &n / Rational::int(3).powu(d)
            }
            DiscrepancyKind::Star => {
                n.clone() * &n / Rational::int(3).powu(d) - n * big(self.boundary) / (Rational::int(2).powu(d - 1) * m2d)
                    + big(self.pair) / m.powu(d)
            }
            DiscrepancyKind::Extreme => {
                n.clone() * &n / Rational::int(12).powu(d)
                    - n * big(self.boundary) / (Rational::int(2).powu(d - 1) * &m2d)
                    + big(self.pair) / m2d
            }
        }
    }

    fn float(&self, grid: TorusGrid, n: usize, kind: DiscrepancyKind) -> f64 {
        let d = grid.dim() as i32;
        let m = grid.order() as f64;
        let n = n as f64;
        let m2d = m.powi(2 * d);
        match kind {
            DiscrepancyKind::Periodic => self.pair as f64 / (2.0 * m * m).powi(d) - n * n / 3f64.powi(d),
            DiscrepancyKind::Star => {
                n * n / 3f64.powi(d) - n * self.boundary as f64 / (2f64.powi(d - 1) * m2d) + self.pair as f64 / m.powi(d)
            }
            DiscrepancyKind::Extreme => {
                n * n / 12f64.powi(d) - n * self.boundary as f64 / (2f64.powi(d - 1) * m2d) + self.pair as f64 / m2d
            }
        }
    }
}

/// Float-mode squared discrepancies in `[-1e-12, 0)` are rounding noise, not errors.
pub fn is_rounding_negative<S: Scalar>(value: &S) -> bool {
    !S::EXACT && value.is_negative() && value.to_f64() >= -1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn set(points: Vec<Vec<Rational>>) -> WeightedPointSet<Rational> {
        let d = points.first().map_or(1, Vec::len);
        WeightedPointSet::unweighted(d, points).unwrap()
    }

    #[test]
    fn box_volume_examples() {
        assert!((box_volume(&[0.2], &[0.7]).unwrap() - 0.5).abs() < 1e-15);
        assert!((box_volume(&[0.7], &[0.2]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(box_volume(&[q(0, 1), q(0, 1)], &[q(0, 1), q(0, 1)]).unwrap(), q(1, 1));
        assert!(box_volume(&[q(0, 1)], &[q(0, 1), q(0, 1)]).is_err());
    }

    #[test]
    fn discrepancy_function_examples() {
        let x = set(vec![vec![q(0, 1)]]);
        assert_eq!(discrepancy_function(&x, &[q(0, 1)], &[q(1, 2)]).unwrap(), q(1, 2));
        assert_eq!(discrepancy_function(&x, &[q(1, 2)], &[q(0, 1)]).unwrap(), q(-1, 2));
        let x = set(vec![vec![q(0, 1), q(0, 1)], vec![q(1, 2), q(1, 2)]]);
        let v = discrepancy_function(&x, &[q(0, 1), q(0, 1)], &[q(3, 4), q(3, 4)]).unwrap();
        assert_eq!(v, q(7, 8));
    }

    #[test]
    fn warnock_single_point_values() {
        let x = set(vec![vec![q(0, 1)]]);
        assert_eq!(l2_discrepancy_warnock(&x, DiscrepancyKind::Star), q(1, 3));
        let x = set(vec![vec![q(0, 1), q(0, 1)]]);
        let p = l2_discrepancy_warnock(&x, DiscrepancyKind::Periodic);
        let e = l2_discrepancy_warnock(&x, DiscrepancyKind::Extreme);
        assert_eq!(p, q(5, 36));
        assert_eq!(e, q(1, 144));
        assert_eq!(p - q(4, 1) * e, q(1, 9));
    }

    #[test]
    fn warnock_empty_set_is_zero() {
        let x = WeightedPointSet::<Rational>::empty(3);
        for kind in DiscrepancyKind::ALL {
            assert_eq!(l2_discrepancy_warnock(&x, kind), q(0, 1));
        }
    }

    #[test]
    fn grid_exact_matches_warnock() {
        let g = TorusGrid::new(5, 3).unwrap();
        let cells = [0, 7, 31, 31, 88, 124];
        let pts: Vec<Vec<Rational>> = cells.iter().map(|&c| g.embed(&g.coords(c))).collect();
        let set = WeightedPointSet::from_parts_unchecked(3, pts, vec![q(1, 1); cells.len()]);
        for kind in DiscrepancyKind::ALL {
            let exact = l2_discrepancy_grid_exact(g, &cells, kind);
            assert_eq!(exact, l2_discrepancy_warnock(&set, kind));
            assert!((l2_discrepancy_grid_f64(g, &cells, kind) - exact.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn rounding_flag() {
        assert!(is_rounding_negative(&-1e-14f64));
        assert!(!is_rounding_negative(&-1e-6f64));
        assert!(!is_rounding_negative(&q(-1, 1_000_000_000)));
    }

    #[test]
    fn kind_parsing() {
        for kind in DiscrepancyKind::ALL {
            assert_eq!(kind.name().parse::<DiscrepancyKind>().unwrap(), kind);
        }
        assert!("diagonal".parse::<DiscrepancyKind>().is_err());
    }
}
