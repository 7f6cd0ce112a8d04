//! Periodic and extreme T-energies of grid weights, the excess
//! `ex_T(w) = E^p(w) − E^e(w)`, and the row decomposition
//!
//! ```text
//! ex_T(w) − ex_T(w_r) = Σ_{R row} g_R(w, r) · (Σ_{x ∈ R} w(x) − r),
//! g_R(w, r) = Σ_x α^x_R w(x) + α^r_R r.
//! ```
//!
//! Subsets `P, Q ⊆ [d]` are d-bit masks throughout.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridWeights, TorusGrid};
use crate::scalar::{one, zero, Rational, Scalar};
use crate::triple::SampledTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKind {
    Extreme,
    Periodic,
}

fn check_order<S: Scalar>(triple: &SampledTriple<S>, grid: TorusGrid) -> Result<()> {
    if triple.order() != grid.order() {
        return Err(Error::InvalidArgument(format!(
            "triple sampled at M = {} used on grid with M = {}",
            triple.order(),
            grid.order()
        )));
    }
    Ok(())
}

/// Extreme or periodic T-energy by direct pairwise summation over the support.
///
/// * `E^p(w) = Σ_{x,y} w(x) w(y) Π_k η_p(x_k, y_k)`
/// * `E^e(w) = −2 (Σ_x w(x)) Σ_x w(x) Π_k η_e¹(x_k) + Σ_{x,y} w(x) w(y) Π_k η_e²(x_k, y_k)`
pub fn energy<S: Scalar>(triple: &SampledTriple<S>, w: &GridWeights<S>, kind: EnergyKind) -> Result<S> {
    let grid = w.grid();
    check_order(triple, grid)?;
    let support: Vec<(Vec<usize>, S)> = w
        .support()
        .map(|(c, v)| (grid.coords(c), v.clone()))
        .collect();
    let kernel = |a: &[usize], b: &[usize]| -> S {
        a.iter().zip(b).fold(one::<S>(), |acc, (&m, &n)| match kind {
            EnergyKind::Periodic => acc * triple.pair(m, n),
            EnergyKind::Extreme => acc * triple.e2(m, n),
        })
    };
    let mut row_terms = Vec::with_capacity(support.len());
    for (i, (xi, wi)) in support.iter().enumerate() {
        let mut off = zero::<S>();
        for (xj, wj) in &support[..i] {
            off += wj.clone() * kernel(xi, xj);
        }
        row_terms.push(wi.clone() * &(S::int(2) * off + wi.clone() * kernel(xi, xi)));
    }
    let pair_sum = crate::scalar::pairwise_sum(&row_terms);
    match kind {
        EnergyKind::Periodic => Ok(pair_sum),
        EnergyKind::Extreme => {
            let boundary = support.iter().fold(zero::<S>(), |acc, (x, wx)| {
                acc + wx.clone() * x.iter().fold(one::<S>(), |p, &m| p * triple.e1(m))
            });
            Ok(pair_sum - S::int(2) * w.total() * boundary)
        }
    }
}

pub fn excess<S: Scalar>(triple: &SampledTriple<S>, w: &GridWeights<S>) -> Result<S> {
    Ok(energy(triple, w, EnergyKind::Periodic)? - energy(triple, w, EnergyKind::Extreme)?)
}

/// `ex_T(w_r) = M^{d-2} (T^d + (Mη(0) − T)^d) r²`, the excess of any weight
/// whose rows all sum to `r`.
pub fn constant_row_sum_excess<S: Scalar>(triple: &SampledTriple<S>, dim: usize, r: &S) -> S {
    let c = triple.constants();
    let m = S::from_usize(triple.order());
    let d = dim as u32;
    let complement = m.clone() * &c.eta0 - &c.t;
    scaled_power(&m, d as i64 - 2) * (c.t.powu(d) + complement.powu(d)) * r * r
}

/// `base^exp` for possibly negative `exp`.
fn scaled_power<S: Scalar>(base: &S, exp: i64) -> S {
    if exp >= 0 {
        base.powu(exp as u32)
    } else {
        one::<S>() / &base.powu((-exp) as u32)
    }
}

/// `Lp² − 2^d Le²` for the union of `r` disjoint weak `M`-Latin hypercubes:
/// `r² ((2M²+1)^d + (M²−1)^d − (1+2^d) M^{2d}) / (6^d M²)`.
pub fn hypercube_excess_identity(order: usize, dim: usize, r: usize) -> Rational {
    let m = Rational::from_usize(order);
    let m2 = m.clone() * &m;
    let d = dim as u32;
    let numer = (Rational::int(2) * &m2 + Rational::int(1)).powu(d)
        + (m2.clone() - Rational::int(1)).powu(d)
        - (Rational::int(1) + Rational::int(2).powu(d)) * m2.powu(d);
    let r = Rational::from_usize(r);
    r.clone() * &r * numer / (Rational::int(6).powu(d) * m2)
}

/// `γ(P, Q)`: 2 for `P = Q = ∅`; 0 for `P = Q = [d]` and when exactly one of
/// `P, Q` is empty; `−2(−1)^{#P+#Q}` otherwise.
pub fn gamma(p: u32, q: u32, dim: usize) -> i64 {
    let full = (1u32 << dim) - 1;
    match (p, q) {
        (0, 0) => 2,
        (p, q) if p == full && q == full => 0,
        (p, 0) if p != 0 => 0,
        (0, q) if q != 0 => 0,
        (p, q) => {
            if (p.count_ones() + q.count_ones()) % 2 == 0 {
                -2
            } else {
                2
            }
        }
    }
}

/// One nonzero `(P, Q)` term with its scalar prefactor
/// `γ(P,Q) / (2d − #P − #Q) · η(0)^{d − #(P∪Q)}`.
#[derive(Debug, Clone)]
struct PointTerm<S> {
    p: u32,
    q: u32,
    coeff: S,
}

/// The coefficients `α^x_R`, `α^r_R` for every row `R` and grid point `x`.
///
/// Construction sums `2^{2d}` subset pairs per entry over `d·M^{2d-1}` entries;
/// past `d = 5` this gets expensive.
#[derive(Debug, Clone)]
pub struct CoefficientTable<S> {
    grid: TorusGrid,
    triple: SampledTriple<S>,
    point_terms: Vec<PointTerm<S>>,
    alpha_point: Vec<S>,
    alpha_r: Vec<S>,
}

impl<S: Scalar> CoefficientTable<S> {
    pub fn new(triple: &SampledTriple<S>, grid: TorusGrid) -> Result<Self> {
        check_order(triple, grid)?;
        let d = grid.dim();
        if d < 2 {
            return Err(Error::InvalidArgument("the row decomposition needs d >= 2".into()));
        }
        let subsets = 1u32 << d;
        let eta0 = triple.constants().eta0.clone();
        let mut point_terms = Vec::new();
        for p in 0..subsets {
            for q in 0..subsets {
                let g = gamma(p, q, d);
                if g == 0 {
                    continue;
                }
                let divisor = 2 * d as i64 - (p.count_ones() + q.count_ones()) as i64;
                assert!(divisor >= 1, "nonzero gamma with zero divisor at P={p:b} Q={q:b}");
                let coeff = S::ratio(g, divisor) * eta0.powu(d as u32 - (p | q).count_ones());
                point_terms.push(PointTerm { p, q, coeff });
            }
        }
        let mut table = Self {
            grid,
            triple: triple.clone(),
            point_terms,
            alpha_point: Vec::new(),
            alpha_r: Vec::new(),
        };
        let cells = grid.cell_count();
        let rows: Vec<(Vec<S>, S)> = (0..grid.row_count())
            .into_par_iter()
            .map(|ri| {
                let row = grid.row_from_index(ri);
                let mut rep = row.fixed.clone();
                rep.insert(row.axis, 0);
                let alphas = (0..cells)
                    .map(|xc| table.alpha_point_raw(row.axis, &grid.coords(xc), &rep))
                    .collect();
                (alphas, table.alpha_r_raw(row.axis, &rep))
            })
            .collect();
        let mut alpha_point = Vec::with_capacity(grid.row_count() * cells);
        let mut alpha_r = Vec::with_capacity(grid.row_count());
        for (a, r) in rows {
            alpha_point.extend(a);
            alpha_r.push(r);
        }
        table.alpha_point = alpha_point;
        table.alpha_r = alpha_r;
        Ok(table)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// `α^x_{R_k(y)}` evaluated from its defining sum over `P, Q ⊆ [d]` with `k ∉ Q`.
    /// `y_k` is ignored by construction.
    pub fn alpha_point_raw(&self, axis: usize, x: &[usize], y: &[usize]) -> S {
        let tr = &self.triple;
        let mut total = zero::<S>();
        for term in &self.point_terms {
            if term.q & (1 << axis) != 0 {
                continue;
            }
            let mut prod = term.coeff.clone();
            for l in 0..x.len() {
                let bit = 1 << l;
                match (term.p & bit != 0, term.q & bit != 0) {
                    (true, false) => prod *= tr.eta(x[l]),
                    (false, true) => prod *= tr.eta(y[l]),
                    (true, true) => prod *= tr.pair(x[l], y[l]),
                    (false, false) => {}
                }
            }
            total += prod;
        }
        total
    }

    /// `α^r_{R_k(x)}` from its defining sum over `Q ≠ [d]`, `k ∉ P∖Q`. `x_k` is ignored.
    pub fn alpha_r_raw(&self, axis: usize, x: &[usize]) -> S {
        let d = self.grid.dim();
        let full = (1u32 << d) - 1;
        let tr = &self.triple;
        let c = tr.constants();
        let m = S::from_usize(self.grid.order());
        let m_pow = m.powu(d as u32 - 1);
        let t_over_m = c.t.clone() / &m;
        let mut total = zero::<S>();
        for p in 0..=full {
            for q in 0..full {
                let only_p = p & !q;
                if only_p & (1 << axis) != 0 {
                    continue;
                }
                let g = gamma(p, q, d);
                if g == 0 {
                    continue;
                }
                let np = p.count_ones() as i64;
                let nq = q.count_ones() as i64;
                let d_i = d as i64;
                let first = d_i - only_p.count_ones() as i64;
                let second = 2 * d_i - np - nq;
                assert!(first >= 1 && second >= 1);
                let mut prod = m_pow.clone() * S::ratio((d_i - nq) * g, first * second)
                    * t_over_m.powu(nq as u32)
                    * c.eta0.powu(d as u32 - (p | q).count_ones());
                for (l, &xl) in x.iter().enumerate() {
                    if only_p & (1 << l) != 0 {
                        prod *= tr.eta(xl);
                    }
                }
                total += prod;
            }
        }
        total
    }

    /// `α^x_R` from the table.
    pub fn alpha_point(&self, row_index: usize, cell: usize) -> &S {
        &self.alpha_point[row_index * self.grid.cell_count() + cell]
    }

    /// `α^r_R` from the table.
    pub fn alpha_r(&self, row_index: usize) -> &S {
        &self.alpha_r[row_index]
    }

    /// `g_R(w, r)`.
    pub fn g(&self, row_index: usize, w: &GridWeights<S>, r: &S) -> S {
        let cells = self.grid.cell_count();
        let row = &self.alpha_point[row_index * cells..(row_index + 1) * cells];
        let lin = w
            .support()
            .fold(zero::<S>(), |acc, (c, wc)| acc + row[c].clone() * wc);
        lin + self.alpha_r[row_index].clone() * r
    }

    fn rows_of(&self, cell: usize) -> Vec<usize> {
        let coords = self.grid.coords(cell);
        (0..self.grid.dim())
            .map(|k| self.grid.row_index(&self.grid.row_through(k, &coords)))
            .collect()
    }

    /// `Σ_k α^x_{R_k(y)} + Σ_k α^y_{R_k(x)}`: the right-hand coefficient of `w(x) w(y)`.
    pub fn pair_coefficient(&self, x: usize, y: usize) -> S {
        let a = self
            .rows_of(y)
            .into_iter()
            .fold(zero::<S>(), |acc, r| acc + self.alpha_point(r, x));
        self.rows_of(x)
            .into_iter()
            .fold(a, |acc, r| acc + self.alpha_point(r, y))
    }

    /// Coefficient of `w(x) w(y)`, `x ≠ y`, in `ex_T(w)`:
    /// `2Πη_p(x,y) + 2Π[η(0)−η(x)] + 2Π[η(0)−η(y)] − 2Π[η(0)−η(x)−η(y)+η_p(x,y)]`.
    pub fn excess_pair_coefficient(&self, x: usize, y: usize) -> S {
        let tr = &self.triple;
        let xs = self.grid.coords(x);
        let ys = self.grid.coords(y);
        let (mut pp, mut ex, mut ey, mut e2) = (one::<S>(), one::<S>(), one::<S>(), one::<S>());
        for (&a, &b) in xs.iter().zip(&ys) {
            pp *= tr.pair(a, b);
            ex *= tr.e1(a);
            ey *= tr.e1(b);
            e2 *= tr.e2(a, b);
        }
        S::int(2) * (pp + ex + ey - e2)
    }

    /// Coefficient of `w(x)²` in `ex_T(w)`: `Πη_p(x,x) + 2Π[η(0)−η(x)] − Π[η(0)−2η(x)+η_p(x,x)]`.
    pub fn excess_square_coefficient(&self, x: usize) -> S {
        self.excess_pair_coefficient(x, x) / &S::int(2)
    }

    /// `Σ_k α^x_{R_k(x)}`.
    pub fn diagonal_coefficient(&self, x: usize) -> S {
        self.rows_of(x)
            .into_iter()
            .fold(zero::<S>(), |acc, r| acc + self.alpha_point(r, x))
    }

    /// `Σ_k α^r_{R_k(x)}`.
    pub fn point_alpha_r_sum(&self, x: usize) -> S {
        self.rows_of(x)
            .into_iter()
            .fold(zero::<S>(), |acc, r| acc + self.alpha_r(r))
    }

    /// `Σ_{R row} α^x_R`.
    pub fn row_alpha_point_sum(&self, x: usize) -> S {
        (0..self.grid.row_count()).fold(zero::<S>(), |acc, r| acc + self.alpha_point(r, x))
    }

    /// `Σ_{R row} α^r_R`.
    pub fn total_alpha_r(&self) -> S {
        self.alpha_r.iter().fold(zero::<S>(), |acc, v| acc + v)
    }
}

/// Both sides of the row decomposition, evaluated independently.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessReport<S> {
    /// `ex_T(w)`
    pub excess: S,
    /// `ex_T(w_r)`
    pub constant_excess: S,
    /// `Σ_R g_R(w, r) (Σ_{x∈R} w(x) − r)`
    pub decomposition_rhs: S,
    /// `(excess − constant_excess) − decomposition_rhs`
    pub residual: S,
}

/// Left side from the energies of `w` and `w_r`, right side from the coefficient table.
pub fn excess_decomposition<S: Scalar>(
    table: &CoefficientTable<S>,
    w: &GridWeights<S>,
    r: &S,
) -> Result<ExcessReport<S>> {
    let grid = table.grid();
    if w.grid() != grid {
        return Err(Error::InvalidArgument("weight grid differs from coefficient grid".into()));
    }
    let ex = excess(&table.triple, w)?;
    let wr = GridWeights::constant_row_sum(grid, r);
    let ex_r = excess(&table.triple, &wr)?;
    let terms: Vec<S> = (0..grid.row_count())
        .map(|ri| {
            let row = grid.row_from_index(ri);
            let slack = w.row_sum(&row) - r;
            if slack.is_zero() {
                zero()
            } else {
                table.g(ri, w, r) * slack
            }
        })
        .collect();
    let rhs = crate::scalar::pairwise_sum(&terms);
    let residual = ex.clone() - &ex_r - &rhs;
    Ok(ExcessReport {
        excess: ex,
        constant_excess: ex_r,
        decomposition_rhs: rhs,
        residual,
    })
}
