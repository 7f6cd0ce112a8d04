//! Random weak Latin hypercubes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{enumerate_all, is_enumerable, WeakLatinHypercube};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformMethod {
    /// Shuffle for `d = 2`, the Latin-square chain for `d = 3`, index
    /// sampling otherwise.
    Auto,
    /// Exactly uniform: shuffle for `d = 2`, index sampling from a full
    /// enumeration otherwise.
    Exact,
    /// The Jacobson–Matthews chain (`d = 3` only).
    Chain,
}

#[derive(Debug, Clone)]
enum Backend {
    Shuffle,
    Indexed(Vec<WeakLatinHypercube>),
    Chain { burn_in: usize },
}

/// Reusable sampler; enumerated instances are enumerated once.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    order: usize,
    dim: usize,
    backend: Backend,
}

impl UniformSampler {
    /// `burn_in` defaults to `10·M³` chain steps.
    pub fn new(order: usize, dim: usize, method: UniformMethod, burn_in: Option<usize>) -> Result<Self> {
        if order == 0 || dim < 2 {
            return Err(Error::InvalidArgument(format!("no hypercubes for M = {order}, d = {dim}")));
        }
        let chain = || Backend::Chain {
            burn_in: burn_in.unwrap_or(10 * order.pow(3)),
        };
        let indexed = || -> Result<Backend> {
            if !is_enumerable(order, dim) {
                return Err(Error::Infeasible {
                    reason: format!(
                        "uniform sampling for M = {order}, d = {dim} needs a full enumeration; \
                         use the coordinate-permuted sampler instead"
                    ),
                    estimate: format!("{:.3e}", super::estimated_count(order, dim)),
                });
            }
            Ok(Backend::Indexed(enumerate_all(order, dim)?.collect()))
        };
        let backend = match (method, dim) {
            (_, 2) => Backend::Shuffle,
            (UniformMethod::Auto, 3) | (UniformMethod::Chain, 3) => chain(),
            (UniformMethod::Chain, _) => {
                return Err(Error::InvalidArgument("the Latin-square chain needs d = 3".into()))
            }
            _ => indexed()?,
        };
        Ok(Self { order, dim, backend })
    }

    /// `true` unless the chain backend is in use.
    pub fn is_exact(&self) -> bool {
        !matches!(self.backend, Backend::Chain { .. })
    }

    pub fn method_name(&self) -> &'static str {
        match self.backend {
            Backend::Shuffle => "shuffle",
            Backend::Indexed(_) => "enumerate-index",
            Backend::Chain { .. } => "jacobson-matthews",
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WeakLatinHypercube {
        match &self.backend {
            Backend::Shuffle => {
                let mut sigma: Vec<usize> = (0..self.order).collect();
                sigma.shuffle(rng);
                WeakLatinHypercube::new_unchecked(self.order, 2, sigma)
            }
            Backend::Indexed(all) => all[rng.gen_range(0..all.len())].clone(),
            Backend::Chain { burn_in } => jacobson_matthews(self.order, *burn_in, rng),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// One uniform draw with the default method.
pub fn sample_uniform(order: usize, dim: usize, seed: u64) -> Result<WeakLatinHypercube> {
    let sampler = UniformSampler::new(order, dim, UniformMethod::Auto, None)?;
    Ok(sampler.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
}

/// `d` independent uniform permutations of `{0,…,M−1}`.
pub fn random_permutations<R: Rng + ?Sized>(order: usize, dim: usize, rng: &mut R) -> Vec<Vec<usize>> {
    (0..dim)
        .map(|_| {
            let mut p: Vec<usize> = (0..order).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}

/// `{(σ_1(m_1),…,σ_d(m_d)) : m ∈ H_0}` for independent uniform `σ_k`.
/// Not uniform over all hypercubes in general.
pub fn sample_coordinate_permuted_with<R: Rng + ?Sized>(h0: &WeakLatinHypercube, rng: &mut R) -> WeakLatinHypercube {
    let perms = random_permutations(h0.order(), h0.dim(), rng);
    h0.permute_coordinates(&perms).expect("permutations of matching order")
}

pub fn sample_coordinate_permuted(h0: &WeakLatinHypercube, seed: u64) -> WeakLatinHypercube {
    sample_coordinate_permuted_with(h0, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// The ±1 incidence cube of a Latin square, possibly improper (one entry −1).
#[derive(Debug, Clone)]
pub struct LatinSquareChain {
    order: usize,
    cube: Vec<i8>,
    improper: Option<(usize, usize, usize)>,
}

impl LatinSquareChain {
    /// Starts from the square `L(r, c) = table[r·M + c]`, which must be Latin.
    pub fn from_square(square: &WeakLatinHypercube) -> Result<Self> {
        if square.dim() != 3 {
            return Err(Error::InvalidArgument("Latin-square chain needs d = 3".into()));
        }
        let m = square.order();
        let mut cube = vec![0i8; m * m * m];
        for (i, &s) in square.table().iter().enumerate() {
            cube[i * m + s] = 1;
        }
        Ok(Self {
            order: m,
            cube,
            improper: None,
        })
    }

    #[inline]
    fn at(&self, r: usize, c: usize, s: usize) -> usize {
        (r * self.order + c) * self.order + s
    }

    pub fn is_proper(&self) -> bool {
        self.improper.is_none()
    }

    /// One move of the chain. From a proper square the chain holds with
    /// probability 1/2; without this it is periodic for `M = 2`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.improper.is_none() && rng.gen_bool(0.5) {
            return;
        }
        self.step_active(rng);
    }

    /// One ±1 move without holding.
    pub fn step_active<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let m = self.order;
        if m < 2 {
            return;
        }
        let (r, c, s, r2, c2, s2);
        match self.improper {
            None => {
                r = rng.gen_range(0..m);
                c = rng.gen_range(0..m);
                let current = (0..m).find(|&v| self.cube[self.at(r, c, v)] == 1).expect("proper cell");
                let mut pick = rng.gen_range(0..m - 1);
                if pick >= current {
                    pick += 1;
                }
                s = pick;
                r2 = (0..m).find(|&i| self.cube[self.at(i, c, s)] == 1).expect("column line");
                c2 = (0..m).find(|&j| self.cube[self.at(r, j, s)] == 1).expect("row line");
                s2 = current;
            }
            Some((ri, ci, si)) => {
                r = ri;
                c = ci;
                s = si;
                let choose = |rng: &mut R, cands: Vec<usize>| -> usize {
                    debug_assert_eq!(cands.len(), 2);
                    cands[rng.gen_range(0..cands.len())]
                };
                let rows: Vec<usize> = (0..m).filter(|&i| self.cube[self.at(i, c, s)] == 1).collect();
                let cols: Vec<usize> = (0..m).filter(|&j| self.cube[self.at(r, j, s)] == 1).collect();
                let syms: Vec<usize> = (0..m).filter(|&v| self.cube[self.at(r, c, v)] == 1).collect();
                r2 = choose(rng, rows);
                c2 = choose(rng, cols);
                s2 = choose(rng, syms);
            }
        }
        for (i, j, k, delta) in [
            (r, c, s, 1i8),
            (r, c2, s2, 1),
            (r2, c, s2, 1),
            (r2, c2, s, 1),
            (r, c, s2, -1),
            (r, c2, s, -1),
            (r2, c, s, -1),
            (r2, c2, s2, -1),
        ] {
            let idx = self.at(i, j, k);
            self.cube[idx] += delta;
        }
        let corner = self.at(r2, c2, s2);
        self.improper = (self.cube[corner] == -1).then_some((r2, c2, s2));
    }

    /// The current square; `None` while improper.
    pub fn square(&self) -> Option<WeakLatinHypercube> {
        if !self.is_proper() {
            return None;
        }
        let m = self.order;
        let table = (0..m * m)
            .map(|i| (0..m).find(|&v| self.cube[i * m + v] == 1).expect("proper cube"))
            .collect();
        Some(WeakLatinHypercube::new_unchecked(m, 3, table))
    }
}

/// Runs the chain from the cyclic square for `burn_in` moves, then until proper.
pub fn jacobson_matthews<R: Rng + ?Sized>(order: usize, burn_in: usize, rng: &mut R) -> WeakLatinHypercube {
    let start = WeakLatinHypercube::cyclic(order, 3).expect("order >= 1");
    let mut chain = LatinSquareChain::from_square(&start).expect("d = 3");
    for _ in 0..burn_in {
        chain.step(rng);
    }
    while !chain.is_proper() {
        chain.step(rng);
    }
    chain.square().expect("proper")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::validate;
    use std::collections::{HashMap, HashSet};

    #[test]
    fn chain_stays_latin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let start = WeakLatinHypercube::cyclic(5, 3).unwrap();
        let mut chain = LatinSquareChain::from_square(&start).unwrap();
        for _ in 0..2000 {
            chain.step(&mut rng);
            if let Some(sq) = chain.square() {
                assert!(validate(5, 3, sq.table()).is_ok());
            }
            // every line of the cube sums to 1
            let m = 5;
            for a in 0..m {
                for b in 0..m {
                    let s1: i32 = (0..m).map(|k| chain.cube[chain.at(a, b, k)] as i32).sum();
                    let s2: i32 = (0..m).map(|k| chain.cube[chain.at(a, k, b)] as i32).sum();
                    let s3: i32 = (0..m).map(|k| chain.cube[chain.at(k, a, b)] as i32).sum();
                    assert_eq!((s1, s2, s3), (1, 1, 1));
                }
            }
        }
    }

    #[test]
    fn chain_reaches_all_order_three_squares() {
        let all: HashSet<_> = enumerate_all(3, 3).unwrap().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = HashMap::new();
        for _ in 0..3000 {
            let sq = jacobson_matthews(3, 30, &mut rng);
            assert!(all.contains(&sq));
            *seen.entry(sq).or_insert(0) += 1;
        }
        assert_eq!(seen.len(), 12);
        assert!(seen.values().all(|&c| (150..=350).contains(&c)), "{seen:?}");
    }

    #[test]
    fn order_two_squares_both_appear() {
        let sampler = UniformSampler::new(2, 3, UniformMethod::Auto, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zeros = (0..2000).filter(|_| sampler.sample(&mut rng).table()[0] == 0).count();
        assert!((850..=1150).contains(&zeros));
    }

    #[test]
    fn refuses_large_dimension() {
        assert!(matches!(sample_uniform(3, 4, 0), Err(Error::Infeasible { .. })));
        assert!(sample_uniform(2, 4, 0).is_ok());
        let exact = UniformSampler::new(3, 3, UniformMethod::Exact, None).unwrap();
        assert!(exact.is_exact());
        assert_eq!(exact.method_name(), "enumerate-index");
    }

    #[test]
    fn coordinate_permuted_output_is_valid() {
        let h0 = WeakLatinHypercube::cyclic(4, 4).unwrap();
        for seed in 0..20 {
            let h = sample_coordinate_permuted(&h0, seed);
            assert!(validate(4, 4, h.table()).is_ok());
        }
    }
}
