//! Simulated annealing over weak Latin hypercubes for small periodic
//! L2-discrepancy.
//!
//! The objective is `Lp² = −N²/3^d + Σ_x S(x)` with cached partial sums
//! `S(x) = Σ_{y ∈ X} Π_k η(|x_k − y_k|)`, `η(s) = 1/2 − s + s²`. The search
//! runs in `f64`; the winner is re-scored exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discrepancy::{l2_discrepancy_grid_exact, l2_discrepancy_grid_f64, DiscrepancyKind};
use crate::energy::hypercube_excess_identity;
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::latin::{random_permutations, LatinSquareChain, StrongLatinHypercube, WeakLatinHypercube};
use crate::scalar::{Rational, Scalar};
use crate::stats::{expected_lp_squared, lp_lower_bound};

/// `splitmix64(master + index)`: seeds for independent restarts.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The object being optimized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Design {
    Weak(WeakLatinHypercube),
    /// Experimental: `σ_1` is kept as the identity.
    Strong(StrongLatinHypercube),
}

impl Design {
    pub fn grid(&self) -> TorusGrid {
        match self {
            Self::Weak(h) => h.grid(),
            Self::Strong(s) => s.grid(),
        }
    }

    pub fn points(&self) -> Vec<Vec<usize>> {
        match self {
            Self::Weak(h) => h.points(),
            Self::Strong(s) => s.points(),
        }
    }

    pub fn cells(&self) -> Vec<usize> {
        let g = self.grid();
        self.points().iter().map(|p| g.index(p)).collect()
    }

    pub fn lp2_exact(&self) -> Rational {
        l2_discrepancy_grid_exact(self.grid(), &self.cells(), DiscrepancyKind::Periodic)
    }

    pub fn lp2_f64(&self) -> f64 {
        l2_discrepancy_grid_f64(self.grid(), &self.cells(), DiscrepancyKind::Periodic)
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Self::Weak(h) => crate::latin::validate(h.order(), h.dim(), h.table()).is_ok(),
            Self::Strong(s) => StrongLatinHypercube::new(s.permutations().to_vec()).is_ok(),
        }
    }

    /// A random starting design.
    pub fn random<R: Rng + ?Sized>(order: usize, dim: usize, strong: bool, rng: &mut R) -> Result<Self> {
        if strong {
            let mut perms = random_permutations(order, dim, rng);
            perms[0] = (0..order).collect();
            Ok(Self::Strong(StrongLatinHypercube::new(perms)?))
        } else {
            let h0 = WeakLatinHypercube::cyclic(order, dim)?;
            Ok(Self::Weak(crate::latin::sample_coordinate_permuted_with(&h0, rng)))
        }
    }
}

/// New coordinates for some point slots.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Move {
    pub changes: Vec<(usize, Vec<usize>)>,
}

impl Move {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }
}

fn fingerprint(points: &[Vec<usize>]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in points {
        for &c in p {
            h = (h ^ c as u64).wrapping_mul(0x0000_0100_0000_01b3);
        }
        h = (h ^ 0xff).wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Current design with cached partial sums.
#[derive(Debug, Clone)]
pub struct SearchState {
    design: Design,
    points: Vec<Vec<usize>>,
    eta_abs: Vec<f64>,
    partial: Vec<f64>,
    checksum: u64,
    shift: f64,
    moves_applied: usize,
    full_recomputes: usize,
}

impl SearchState {
    pub fn new(design: Design) -> Self {
        let g = design.grid();
        let m = g.order() as f64;
        let eta_abs = (0..g.order())
            .map(|k| {
                let s = k as f64 / m;
                0.5 - s + s * s
            })
            .collect();
        let points = design.points();
        let n = points.len() as f64;
        let mut state = Self {
            design,
            points,
            eta_abs,
            partial: Vec::new(),
            checksum: 0,
            shift: n * n / 3f64.powi(g.dim() as i32),
            moves_applied: 0,
            full_recomputes: 0,
        };
        state.refresh();
        state
    }

    #[inline]
    fn kernel(&self, x: &[usize], y: &[usize]) -> f64 {
        x.iter()
            .zip(y)
            .map(|(&a, &b)| self.eta_abs[a.abs_diff(b)])
            .product()
    }

    fn sum_over_points(&self, y: &[usize]) -> f64 {
        self.points.iter().map(|x| self.kernel(x, y)).sum()
    }

    /// Rebuilds every partial sum from scratch.
    pub fn refresh(&mut self) {
        self.partial = self.points.iter().map(|y| self.sum_over_points(y)).collect();
        self.checksum = fingerprint(&self.points);
        self.full_recomputes += 1;
    }

    fn ensure_fresh(&mut self) {
        if fingerprint(&self.points) != self.checksum {
            self.refresh();
        }
    }

    /// Replaces the design; the cache is rebuilt lazily once the checksum
    /// no longer matches.
    pub fn reset_to(&mut self, design: Design) {
        assert_eq!(design.grid(), self.design.grid(), "grid changed");
        self.points = design.points();
        self.design = design;
        let n = self.points.len() as f64;
        self.shift = n * n / 3f64.powi(self.design.grid().dim() as i32);
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn moves_applied(&self) -> usize {
        self.moves_applied
    }

    pub fn full_recomputes(&self) -> usize {
        self.full_recomputes
    }

    /// Cached `Lp²`.
    pub fn lp2(&mut self) -> f64 {
        self.ensure_fresh();
        self.partial.iter().sum::<f64>() - self.shift
    }

    /// `Lp²` by the Warnock formula, ignoring the cache.
    pub fn lp2_from_scratch(&self) -> f64 {
        self.design.lp2_f64()
    }

    /// A random validity-preserving move:
    /// * `d = 2`: swap two values of the permutation;
    /// * `d = 3`: Jacobson–Matthews ±1 moves until the square is proper again;
    /// * `d ≥ 4`: swap two values of one coordinate permutation;
    /// * strong designs: swap two entries of one of `σ_2, …, σ_d`.
    pub fn propose_move<R: Rng + ?Sized>(&self, rng: &mut R) -> Move {
        let g = self.design.grid();
        let (m, d) = (g.order(), g.dim());
        if m < 2 {
            return Move::default();
        }
        let pick_pair = |rng: &mut R| {
            let a = rng.gen_range(0..m);
            let mut b = rng.gen_range(0..m - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        };
        let with_value = |slot: usize, v: usize| {
            let mut p = self.points[slot].clone();
            *p.last_mut().expect("d >= 2") = v;
            (slot, p)
        };
        match &self.design {
            Design::Strong(s) => {
                let axis = rng.gen_range(1..s.dim());
                let (a, b) = pick_pair(rng);
                let mut pa = self.points[a].clone();
                let mut pb = self.points[b].clone();
                std::mem::swap(&mut pa[axis], &mut pb[axis]);
                Move {
                    changes: vec![(a, pa), (b, pb)],
                }
            }
            Design::Weak(h) if d == 2 => {
                let (a, b) = pick_pair(rng);
                let t = h.table();
                Move {
                    changes: vec![with_value(a, t[b]), with_value(b, t[a])],
                }
            }
            Design::Weak(h) if d == 3 => {
                let mut chain = LatinSquareChain::from_square(h).expect("d = 3");
                chain.step_active(rng);
                while !chain.is_proper() {
                    chain.step_active(rng);
                }
                let next = chain.square().expect("proper");
                let changes = h
                    .table()
                    .iter()
                    .zip(next.table())
                    .enumerate()
                    .filter(|(_, (a, b))| a != b)
                    .map(|(slot, (_, &v))| with_value(slot, v))
                    .collect();
                Move { changes }
            }
            Design::Weak(h) => {
                let axis = rng.gen_range(0..d);
                let (a, b) = pick_pair(rng);
                let t = h.table();
                let mut changes = Vec::new();
                if axis == d - 1 {
                    for (slot, &v) in t.iter().enumerate() {
                        if v == a {
                            changes.push(with_value(slot, b));
                        } else if v == b {
                            changes.push(with_value(slot, a));
                        }
                    }
                } else {
                    let stride = m.pow((d - 2 - axis) as u32);
                    for (slot, p) in self.points.iter().enumerate() {
                        let c = p[axis];
                        if c == a || c == b {
                            let other = if c == a { b } else { a };
                            let partner = slot + other * stride - c * stride;
                            if t[slot] != t[partner] {
                                changes.push(with_value(slot, t[partner]));
                            }
                        }
                    }
                }
                Move { changes }
            }
        }
    }

    /// Change in `Lp²` if `mv` were applied:
    /// `2(Σ_b S_X(b) − Σ_a S(a)) + K(A,A) − 2K(A,B) + K(B,B)` for removed
    /// points `A` and inserted points `B`.
    pub fn delta_lp2(&mut self, mv: &Move) -> f64 {
        self.ensure_fresh();
        let removed: Vec<&[usize]> = mv.changes.iter().map(|(s, _)| self.points[*s].as_slice()).collect();
        let added: Vec<&[usize]> = mv.changes.iter().map(|(_, p)| p.as_slice()).collect();
        let cross = |xs: &[&[usize]], ys: &[&[usize]]| -> f64 {
            xs.iter().map(|x| ys.iter().map(|y| self.kernel(x, y)).sum::<f64>()).sum()
        };
        let gained: f64 = added.iter().map(|b| self.sum_over_points(b)).sum();
        let lost: f64 = mv.changes.iter().map(|(s, _)| self.partial[*s]).sum();
        2.0 * (gained - lost) + cross(&removed, &removed) - 2.0 * cross(&removed, &added) + cross(&added, &added)
    }

    pub fn apply(&mut self, mv: &Move) {
        if mv.is_empty() {
            return;
        }
        self.ensure_fresh();
        let mut changed = vec![false; self.points.len()];
        for (slot, _) in &mv.changes {
            changed[*slot] = true;
        }
        for (i, x) in self.points.iter().enumerate() {
            if changed[i] {
                continue;
            }
            let mut s = self.partial[i];
            for (slot, new) in &mv.changes {
                s += self.kernel(x, new) - self.kernel(x, &self.points[*slot]);
            }
            self.partial[i] = s;
        }
        for (slot, new) in &mv.changes {
            self.points[*slot] = new.clone();
        }
        for (slot, _) in &mv.changes {
            self.partial[*slot] = self.sum_over_points(&self.points[*slot]);
        }
        match &mut self.design {
            Design::Weak(h) => {
                let mut table = h.table().to_vec();
                for (slot, p) in &mv.changes {
                    table[*slot] = *p.last().expect("d >= 2");
                }
                *h = WeakLatinHypercube::new(h.order(), h.dim(), table).expect("moves preserve validity");
            }
            Design::Strong(s) => {
                let mut perms = s.permutations().to_vec();
                for (slot, p) in &mv.changes {
                    for (axis, &c) in p.iter().enumerate() {
                        perms[axis][*slot] = c;
                    }
                }
                *s = StrongLatinHypercube::new(perms).expect("moves preserve validity");
            }
        }
        self.checksum = fingerprint(&self.points);
        self.moves_applied += 1;
    }
}

/// Geometric cooling `T_i = t0 · cooling^i` for `budget` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Defaults to the standard deviation of 100 random-move deltas.
    pub t0: Option<f64>,
    pub cooling: f64,
    pub budget: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            t0: None,
            cooling: 0.999,
            budget: 100_000,
        }
    }
}

impl Schedule {
    fn validate(&self) -> Result<()> {
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidArgument(format!("cooling factor {} not in (0, 1)", self.cooling)));
        }
        if let Some(t0) = self.t0 {
            if !(t0 >= 0.0 && t0.is_finite()) {
                return Err(Error::InvalidArgument(format!("initial temperature {t0} is invalid")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub lp2: f64,
    pub temperature: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct AnnealResult {
    pub best: Design,
    pub best_lp2: f64,
    pub best_lp2_exact: Rational,
    pub start_lp2: f64,
    pub t0: f64,
    pub seed: u64,
    pub trace: Vec<TraceEntry>,
}

fn default_t0<R: Rng + ?Sized>(state: &mut SearchState, rng: &mut R) -> f64 {
    let deltas: Vec<f64> = (0..100)
        .map(|_| {
            let mv = state.propose_move(rng);
            state.delta_lp2(&mv)
        })
        .collect();
    let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
    (deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (deltas.len() - 1) as f64).sqrt()
}

/// One annealing chain from a random start.
pub fn anneal(order: usize, dim: usize, schedule: Schedule, seed: u64, strong: bool) -> Result<AnnealResult> {
    schedule.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Design::random(order, dim, strong, &mut rng)?;
    anneal_from(start, schedule, &mut rng, seed)
}

/// Annealing from a given design. Ties and improvements are always accepted;
/// a worse move is accepted with probability `exp(−Δ/T)`.
pub fn anneal_from(start: Design, schedule: Schedule, rng: &mut ChaCha8Rng, seed: u64) -> Result<AnnealResult> {
    schedule.validate()?;
    let mut state = SearchState::new(start);
    let start_lp2 = state.lp2();
    let t0 = match schedule.t0 {
        Some(t) => t,
        None if schedule.budget == 0 => 0.0,
        None => default_t0(&mut state, rng),
    };
    let mut best = state.design().clone();
    let mut best_lp2 = start_lp2;
    let mut current = start_lp2;
    let mut temperature = t0;
    let mut trace = Vec::with_capacity(schedule.budget);
    for step in 0..schedule.budget {
        let mv = state.propose_move(rng);
        let delta = state.delta_lp2(&mv);
        let accepted = delta <= 0.0 || (temperature > 0.0 && rng.gen::<f64>() < (-delta / temperature).exp());
        if accepted {
            state.apply(&mv);
            current += delta;
            if current < best_lp2 {
                best_lp2 = current;
                best = state.design().clone();
            }
        }
        trace.push(TraceEntry {
            step,
            lp2: current,
            temperature,
            accepted,
        });
        temperature *= schedule.cooling;
    }
    let best_lp2_exact = best.lp2_exact();
    Ok(AnnealResult {
        best_lp2: best_lp2_exact.to_f64(),
        best,
        best_lp2_exact,
        start_lp2,
        t0,
        seed,
        trace,
    })
}

/// Independent chains in parallel with seeds `derive_seed(seed, i)`; the
/// minimum by exact score wins (ties by restart index).
pub fn anneal_restarts(
    order: usize,
    dim: usize,
    schedule: Schedule,
    restarts: usize,
    seed: u64,
    strong: bool,
) -> Result<(AnnealResult, Vec<Rational>)> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let runs: Vec<AnnealResult> = (0..restarts as u64)
        .into_par_iter()
        .map(|i| anneal(order, dim, schedule, derive_seed(seed, i), strong))
        .collect::<Result<_>>()?;
    let scores: Vec<Rational> = runs.iter().map(|r| r.best_lp2_exact.clone()).collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.best_lp2_exact.cmp(&b.best_lp2_exact).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("restarts >= 1");
    Ok((best, scores))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub order: usize,
    pub dim: usize,
    pub points: usize,
    pub best_lp2: Rational,
    /// Weak designs only: the exact zero-frequency bound and the expectation.
    pub lower_bound_lp2: Option<Rational>,
    pub lp_simplified_bound: Option<f64>,
    pub expected_lp2: Option<Rational>,
    pub ratio_to_bound: Option<f64>,
    pub ratio_to_expectation: Option<f64>,
    /// `2^{−d}(Lp² − identity)`, weak designs only.
    pub le2: Option<Rational>,
}

pub fn benchmark_report(result: &AnnealResult) -> Result<BenchmarkReport> {
    let g = result.best.grid();
    let (m, d) = (g.order(), g.dim());
    let best = result.best_lp2_exact.clone();
    let weak = matches!(result.best, Design::Weak(_));
    let (lower, simplified, expected, le2) = if weak {
        let b = lp_lower_bound(m, d)?;
        let e = if m >= 2 { Some(expected_lp_squared(m, d)?) } else { None };
        let le2 = (best.clone() - hypercube_excess_identity(m, d, 1)) / Rational::int(2).powu(d as u32);
        (Some(b.lp2_exact), Some(b.lp_simplified), e, Some(le2))
    } else {
        (None, None, None, None)
    };
    let ratio = |den: &Option<Rational>| {
        den.as_ref()
            .filter(|v| v.to_f64() > 0.0)
            .map(|v| best.to_f64() / v.to_f64())
    };
    Ok(BenchmarkReport {
        order: m,
        dim: d,
        points: result.best.points().len(),
        ratio_to_bound: ratio(&lower),
        ratio_to_expectation: ratio(&expected),
        best_lp2: best.clone(),
        lower_bound_lp2: lower,
        lp_simplified_bound: simplified,
        expected_lp2: expected,
        le2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weak_state(order: usize, dim: usize, seed: u64) -> (SearchState, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Design::random(order, dim, false, &mut rng).unwrap();
        (SearchState::new(d), rng)
    }

    #[test]
    fn delta_matches_recompute_all_move_kinds() {
        for (m, d) in [(7, 2), (5, 3), (3, 4), (3, 5)] {
            let (mut st, mut rng) = weak_state(m, d, 3);
            for _ in 0..50 {
                let mv = st.propose_move(&mut rng);
                let before = st.lp2_from_scratch();
                let delta = st.delta_lp2(&mv);
                st.apply(&mv);
                let after = st.lp2_from_scratch();
                assert!(((after - before) - delta).abs() < 1e-9, "m={m} d={d}");
                assert!(st.design().is_valid());
            }
        }
    }

    #[test]
    fn strong_moves_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut st = SearchState::new(Design::random(6, 3, true, &mut rng).unwrap());
        for _ in 0..50 {
            let mv = st.propose_move(&mut rng);
            let delta = st.delta_lp2(&mv);
            let before = st.lp2();
            st.apply(&mv);
            assert!((st.lp2() - before - delta).abs() < 1e-9);
            assert!((st.lp2() - st.lp2_from_scratch()).abs() < 1e-9);
        }
    }

    #[test]
    fn order_two_permutation_move_swaps() {
        let h = WeakLatinHypercube::from_permutation(vec![0, 1]).unwrap();
        let mut st = SearchState::new(Design::Weak(h));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mv = st.propose_move(&mut rng);
        st.apply(&mv);
        assert_eq!(st.design(), &Design::Weak(WeakLatinHypercube::from_permutation(vec![1, 0]).unwrap()));
    }

    #[test]
    fn stale_cache_is_detected() {
        let (mut st, mut rng) = weak_state(5, 2, 1);
        let before = st.full_recomputes();
        let other = Design::random(5, 2, false, &mut rng).unwrap();
        st.reset_to(other.clone());
        assert!((st.lp2() - other.lp2_f64()).abs() < 1e-12);
        assert_eq!(st.full_recomputes(), before + 1);
    }

    #[test]
    fn zero_budget_returns_start() {
        let s = Schedule {
            budget: 0,
            ..Schedule::default()
        };
        let r = anneal(5, 2, s, 4, false).unwrap();
        assert!(r.trace.is_empty());
        assert_eq!(r.best_lp2_exact, r.best.lp2_exact());
        assert!((r.best_lp2 - r.start_lp2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_schedule() {
        let s = Schedule {
            cooling: 1.0,
            ..Schedule::default()
        };
        assert!(anneal(4, 2, s, 0, false).is_err());
    }

    #[test]
    fn seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 100);
    }
}
