//! Moments of the discrepancy of random weak Latin hypercubes: closed forms,
//! the pair distribution behind them, lower bounds, and empirical checks.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discrepancy::{l2_discrepancy_grid_exact, l2_discrepancy_grid_f64, DiscrepancyKind};
use crate::energy::hypercube_excess_identity;
use crate::error::{Error, Result};
use crate::latin::{
    enumerate_all, sample_coordinate_permuted_with, UniformMethod, UniformSampler, WeakLatinHypercube,
};
use crate::scalar::{Rational, Scalar};
use crate::triple::SampledTriple;

/// `P_δ(p, q)`: the probability that a uniform hypercube takes values `(p, q)`
/// at two domain points at Hamming distance `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistribution {
    pub order: usize,
    pub delta: usize,
    pub prob_equal: Rational,
    pub prob_unequal: Rational,
}

impl PairDistribution {
    pub fn prob(&self, p: usize, q: usize) -> &Rational {
        if p == q {
            &self.prob_equal
        } else {
            &self.prob_unequal
        }
    }

    /// `M·P(p,p) + M(M−1)·P(p,q)`, which must be 1.
    pub fn total(&self) -> Rational {
        let m = Rational::from_usize(self.order);
        m.clone() * &self.prob_equal + m.clone() * (m - Rational::one()) * &self.prob_unequal
    }
}

/// For `δ ≥ 1`:
/// `P_δ(p,p) = ((M−1)^{δ−1} − (−1)^{δ−1}) / (M²(M−1)^{δ−1})`,
/// `P_δ(p,q) = ((M−1)^δ − (−1)^δ) / (M²(M−1)^δ)`.
/// `δ = 0` is the diagonal `m = n`: `P(p,p) = 1/M`, `P(p,q) = 0`.
pub fn pair_distribution(order: usize, delta: usize) -> Result<PairDistribution> {
    if order == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let m = Rational::from_usize(order);
    if delta == 0 {
        return Ok(PairDistribution {
            order,
            delta,
            prob_equal: Rational::one() / m,
            prob_unequal: Rational::zero(),
        });
    }
    if order == 1 {
        return Err(Error::InvalidArgument(
            "for M = 1 distinct domain points do not exist".into(),
        ));
    }
    let m1 = m.clone() - Rational::one();
    let sign = |k: usize| if k.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
    let term = |k: usize| (m1.powu(k as u32) - sign(k)) / (m.clone() * &m * m1.powu(k as u32));
    Ok(PairDistribution {
        order,
        delta,
        prob_equal: term(delta - 1),
        prob_unequal: term(delta),
    })
}

/// Empirical `#{H : (H(m), H(n)) = (p, q)} / Λ` over all hypercubes, as an `M×M` table.
pub fn empirical_pair_distribution(order: usize, dim: usize, m: &[usize], n: &[usize]) -> Result<Vec<Vec<Rational>>> {
    let domain = crate::grid::TorusGrid::new(order, dim - 1)?;
    if m.len() != dim - 1 || n.len() != dim - 1 {
        return Err(Error::DimensionMismatch {
            expected: dim - 1,
            got: m.len().max(n.len()),
        });
    }
    let (i, j) = (domain.index(m), domain.index(n));
    let mut counts = vec![vec![0u64; order]; order];
    let mut total = 0u64;
    for h in enumerate_all(order, dim)? {
        counts[h.table()[i]][h.table()[j]] += 1;
        total += 1;
    }
    Ok(counts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| Rational::new((c as i64).into(), (total as i64).into()))
                .collect()
        })
        .collect())
}

fn check_md(order: usize, dim: usize) -> Result<()> {
    if order < 2 || dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "closed forms need M >= 2 and d >= 2, got M = {order}, d = {dim}"
        )));
    }
    Ok(())
}

/// `E E^p(H) = M^{d−2}((Δ−T)^d/(M−1)^{d−1} + T^d)` over uniform hypercubes.
pub fn expected_energy<S: Scalar>(triple: &SampledTriple<S>, dim: usize) -> Result<S> {
    let order = triple.order();
    check_md(order, dim)?;
    let c = triple.constants();
    let d = dim as u32;
    let m = S::from_usize(order);
    let spread = c.delta.clone() - &c.t;
    let first = spread.powu(d) / &(m.clone() - &S::one()).powu(d - 1);
    Ok(m.powu(d - 2) * (first + c.t.powu(d)))
}

/// `E Lp(H)² = ((M−1)(M+1)^d + (2M²+1)^d − 2^d M^{2d}) / (6^d M²)`.
pub fn expected_lp_squared(order: usize, dim: usize) -> Result<Rational> {
    check_md(order, dim)?;
    let m = Rational::from_usize(order);
    let d = dim as u32;
    let one = Rational::one();
    let numer = (m.clone() - &one) * (m.clone() + &one).powu(d)
        + (Rational::int(2) * &m * &m + &one).powu(d)
        - Rational::int(2).powu(d) * m.powu(2 * d);
    Ok(numer / (Rational::int(6).powu(d) * &m * &m))
}

/// `E Le(H)² = 2^{−d}(E Lp(H)² − identity)`.
pub fn expected_le_squared(order: usize, dim: usize) -> Result<Rational> {
    let lp = expected_lp_squared(order, dim)?;
    Ok((lp - hypercube_excess_identity(order, dim, 1)) / Rational::int(2).powu(dim as u32))
}

/// `Var Lp(σ)² = (N−3)(N−2)²(N−1)²(N+1)² / (16200 N⁵)` for uniform permutations.
///
/// Conjectural: stated without proof, verified here for small `N` only.
pub fn variance_lp_squared_d2(n: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if n <= 3 {
        return Ok(Rational::zero());
    }
    let v = Rational::from_usize(n);
    let one = Rational::one();
    let numer = (v.clone() - Rational::int(3))
        * (v.clone() - Rational::int(2)).powu(2)
        * (v.clone() - &one).powu(2)
        * (v.clone() + &one).powu(2);
    Ok(numer / (Rational::int(16200) * v.powu(5)))
}

/// Lower bounds for a point set built from a weak `M`-Latin hypercube.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    /// `((1/3 + 1/(6M²))^d − 3^{−d}) M^{2(d−1)} ≤ Lp²`, the zero-frequency term.
    pub lp2_exact: Rational,
    /// `(d/(2·3^d))^{1/2} N^{(d−2)/(d−1)}`, the simplified bound on `Lp`.
    pub lp_simplified: f64,
    /// `2^{−d}(lp2_exact − identity) ≤ Le²`.
    pub le2_exact: Rational,
    /// Leading term `(d/12^d)^{1/2} N^{(d−2)/(d−1)}` of the asymptotic `Le`
    /// bound; its `1 − o(1)` factor is not quantified.
    pub le_asymptotic_leading: f64,
}

pub fn lp_lower_bound(order: usize, dim: usize) -> Result<LowerBound> {
    if order == 0 || dim < 2 {
        return Err(Error::InvalidArgument(format!("bounds need M >= 1, d >= 2, got M = {order}, d = {dim}")));
    }
    let d = dim as u32;
    let m = Rational::from_usize(order);
    let base = Rational::ratio(1, 3) + Rational::one() / (Rational::int(6) * &m * &m);
    let lp2_exact = (base.powu(d) - Rational::ratio(1, 3).powu(d)) * m.powu(2 * (d - 1));
    let le2_exact = (lp2_exact.clone() - hypercube_excess_identity(order, dim, 1)) / Rational::int(2).powu(d);
    let n = (order as f64).powi(dim as i32 - 1);
    let growth = n.powf((dim as f64 - 2.0) / (dim as f64 - 1.0));
    let df = dim as f64;
    Ok(LowerBound {
        lp2_exact,
        lp_simplified: (df / (2.0 * 3f64.powi(dim as i32))).sqrt() * growth,
        le2_exact,
        le_asymptotic_leading: (df / 12f64.powi(dim as i32)).sqrt() * growth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Lp2,
    Le2,
    /// `Lp² − 2^d Le²`.
    Excess,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lp2 => "lp2",
            Self::Le2 => "le2",
            Self::Excess => "excess",
        }
    }

    /// Exact value for one hypercube; `Le²` is evaluated by its own formula.
    pub fn exact(self, h: &WeakLatinHypercube) -> Rational {
        let g = h.grid();
        let cells = h.cells();
        let lp = || l2_discrepancy_grid_exact(g, &cells, DiscrepancyKind::Periodic);
        let le = || l2_discrepancy_grid_exact(g, &cells, DiscrepancyKind::Extreme);
        match self {
            Self::Lp2 => lp(),
            Self::Le2 => le(),
            Self::Excess => lp() - Rational::int(2).powu(h.dim() as u32) * le(),
        }
    }

    pub fn float(self, h: &WeakLatinHypercube) -> f64 {
        let g = h.grid();
        let cells = h.cells();
        let lp = || l2_discrepancy_grid_f64(g, &cells, DiscrepancyKind::Periodic);
        let le = || l2_discrepancy_grid_f64(g, &cells, DiscrepancyKind::Extreme);
        match self {
            Self::Lp2 => lp(),
            Self::Le2 => le(),
            Self::Excess => lp() - 2f64.powi(h.dim() as i32) * le(),
        }
    }

    /// The mean over uniform hypercubes (the excess is constant).
    pub fn closed_form(self, order: usize, dim: usize) -> Result<Rational> {
        match self {
            Self::Lp2 => expected_lp_squared(order, dim),
            Self::Le2 => expected_le_squared(order, dim),
            Self::Excess => {
                check_md(order, dim)?;
                Ok(hypercube_excess_identity(order, dim, 1))
            }
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp2" => Ok(Self::Lp2),
            "le2" => Ok(Self::Le2),
            "excess" => Ok(Self::Excess),
            other => Err(Error::InvalidArgument(format!("unknown statistic `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    Exhaustive,
    MonteCarlo,
}

impl MomentMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

/// Random hypercube source for Monte Carlo moments.
#[derive(Debug, Clone)]
pub enum HypercubeSampler {
    Uniform(UniformSampler),
    /// Coordinate permutations of a fixed start hypercube.
    CoordinatePermuted(WeakLatinHypercube),
}

impl HypercubeSampler {
    pub fn uniform(order: usize, dim: usize, method: UniformMethod) -> Result<Self> {
        Ok(Self::Uniform(UniformSampler::new(order, dim, method, None)?))
    }

    pub fn coordinate_permuted(order: usize, dim: usize) -> Result<Self> {
        Ok(Self::CoordinatePermuted(WeakLatinHypercube::cyclic(order, dim)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform(s) => s.method_name(),
            Self::CoordinatePermuted(_) => "coordperm",
        }
    }

    /// Draws are from the uniform distribution exactly.
    pub fn is_exactly_uniform(&self) -> bool {
        match self {
            Self::Uniform(s) => s.is_exact(),
            Self::CoordinatePermuted(h) => h.dim() == 2,
        }
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            Self::Uniform(s) => (s.order(), s.dim()),
            Self::CoordinatePermuted(h) => (h.order(), h.dim()),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> WeakLatinHypercube {
        match self {
            Self::Uniform(s) => s.sample(rng),
            Self::CoordinatePermuted(h) => sample_coordinate_permuted_with(h, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub statistic: Statistic,
    pub mode: MomentMode,
    pub sampler: String,
    pub sample_count: usize,
    pub closed_form: Rational,
    pub empirical_mean: f64,
    /// Population variance (exhaustive) or unbiased sample variance
    /// (Monte Carlo); absent for a single sample.
    pub empirical_variance: Option<f64>,
    /// Exact mean and variance, exhaustive mode only.
    pub exact_mean: Option<Rational>,
    pub exact_variance: Option<Rational>,
    /// Standard error of the mean, Monte Carlo only.
    pub std_error: Option<f64>,
}

/// Exact moments of `statistic` over every hypercube, reduced in enumeration order.
pub fn exhaustive_moments(order: usize, dim: usize, statistic: Statistic) -> Result<MomentReport> {
    let all: Vec<WeakLatinHypercube> = enumerate_all(order, dim)?.collect();
    let values: Vec<Rational> = all.par_iter().map(|h| statistic.exact(h)).collect();
    let n = Rational::from_usize(values.len());
    let mean = values.iter().fold(Rational::zero(), |acc, v| acc + v) / &n;
    let variance = values
        .iter()
        .fold(Rational::zero(), |acc, v| {
            let dev = v.clone() - &mean;
            acc + dev.clone() * dev
        })
        / &n;
    let closed_form = statistic.closed_form(order, dim)?;
    Ok(MomentReport {
        statistic,
        mode: MomentMode::Exhaustive,
        sampler: "enumerate".into(),
        sample_count: values.len(),
        closed_form,
        empirical_mean: mean.to_f64(),
        empirical_variance: (values.len() > 1).then(|| variance.to_f64()),
        exact_mean: Some(mean),
        exact_variance: (values.len() > 1).then_some(variance),
        std_error: None,
    })
}

const MC_CHUNK: usize = 256;

/// Monte Carlo moments. Chunk `c` of 256 draws uses ChaCha8 stream `c` under
/// `seed`; chunks are reduced in order, so results do not depend on the
/// number of worker threads.
pub fn monte_carlo_moments(
    sampler: &HypercubeSampler,
    statistic: Statistic,
    samples: usize,
    seed: u64,
) -> Result<MomentReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let (order, dim) = sampler.shape();
    let closed_form = statistic.closed_form(order, dim)?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            (0..count).map(|_| statistic.float(&sampler.sample(&mut rng))).collect()
        })
        .collect();
    let values: Vec<f64> = partial.into_iter().flatten().collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = (values.len() > 1).then(|| values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0));
    Ok(MomentReport {
        statistic,
        mode: MomentMode::MonteCarlo,
        sampler: sampler.name().into(),
        sample_count: values.len(),
        closed_form,
        empirical_mean: mean,
        empirical_variance: variance,
        exact_mean: None,
        exact_variance: None,
        std_error: variance.map(|v| (v / n).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triple::EnergyTriple;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn pair_distribution_examples() {
        let p = pair_distribution(5, 1).unwrap();
        assert_eq!(p.prob_equal, q(0, 1));
        assert_eq!(p.prob_unequal, q(1, 20));
        assert_eq!(pair_distribution(3, 2).unwrap().prob_equal, q(1, 6));
        let p = pair_distribution(4, 0).unwrap();
        assert_eq!((p.prob_equal.clone(), p.prob_unequal.clone()), (q(1, 4), q(0, 1)));
        assert!(pair_distribution(1, 1).is_err());
        for m in 2..7 {
            for delta in 0..5 {
                assert_eq!(pair_distribution(m, delta).unwrap().total(), q(1, 1));
            }
        }
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(expected_lp_squared(2, 2).unwrap(), q(13, 72));
        assert_eq!(expected_lp_squared(3, 2).unwrap(), q(23, 108));
        assert_eq!(
            expected_lp_squared(3, 3).unwrap(),
            q(2 * 64 + 19i64.pow(3) - 8 * 729, 216 * 9)
        );
        let tr = EnergyTriple::<Rational>::discrepancy().sample(2).unwrap();
        assert_eq!(expected_energy(&tr, 2).unwrap(), q(5, 8));
        for (m, d) in [(2usize, 2usize), (3, 3), (5, 4)] {
            let tr = EnergyTriple::<Rational>::discrepancy().sample(m).unwrap();
            let mm = Rational::from_usize(m);
            let shift = mm.powu(2 * (d as u32 - 1)) / Rational::int(3).powu(d as u32);
            assert_eq!(expected_lp_squared(m, d).unwrap(), expected_energy(&tr, d).unwrap() - shift);
            let c = tr.constants();
            assert_eq!(c.delta.clone() - &c.t, (mm.clone() * &mm - q(1, 1)) / (q(6, 1) * &mm));
        }
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance_lp_squared_d2(3).unwrap(), q(0, 1));
        assert_eq!(variance_lp_squared_d2(2).unwrap(), q(0, 1));
        assert_eq!(variance_lp_squared_d2(5).unwrap(), q(10368, 50_625_000));
    }

    #[test]
    fn bound_examples() {
        let b = lp_lower_bound(7, 2).unwrap();
        assert!((b.lp_simplified - 1.0 / 3.0).abs() < 1e-15);
        let b = lp_lower_bound(4, 3).unwrap();
        assert!((b.lp_simplified - 4.0 / 18f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_small_cases() {
        let r = exhaustive_moments(4, 2, Statistic::Lp2).unwrap();
        assert_eq!(r.exact_mean.as_ref(), Some(&r.closed_form));
        assert_eq!(r.sample_count, 24);
        let r = exhaustive_moments(3, 3, Statistic::Excess).unwrap();
        assert_eq!(r.exact_variance, Some(q(0, 1)));
    }

    #[test]
    fn single_sample_has_no_variance() {
        let s = HypercubeSampler::uniform(4, 2, UniformMethod::Auto).unwrap();
        let r = monte_carlo_moments(&s, Statistic::Lp2, 1, 0).unwrap();
        assert_eq!(r.empirical_variance, None);
        assert!(monte_carlo_moments(&s, Statistic::Lp2, 0, 0).is_err());
    }
}
