//! Energy triples `(η_p, η_e¹, η_e²)` and their grid samples.
//!
//! A triple is determined by its pair potential `η_p`. With `η(s) := η_p(s, 0)`:
//!
//! * `η_e¹(s) = η(0) − η(s)`
//! * `η_e²(s, t) = η(0) − η(s) − η(t) + η_p(s, t)`
//!
//! and for every `M` the row sums `Σ_n η_p(m/M, n/M)` must not depend on `m`; the
//! common value is `T(M)`. The canonical construction `η_p(s, t) = η(|s − t|)`
//! with `η(s) = η(1 − s)` always satisfies this.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{grid_coord, one, zero, Scalar};

pub type PairPotential<S> = Arc<dyn Fn(&S, &S) -> S + Send + Sync>;
pub type Potential<S> = Arc<dyn Fn(&S) -> S + Send + Sync>;

/// Which product kernel to evaluate over `d` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `Π_k η_p(x_k, y_k)`
    Periodic,
    /// `Π_k η_e²(x_k, y_k)`
    ExtremePair,
    /// `Π_k η_e¹(x_k)`
    ExtremeBoundary,
}

#[derive(Clone)]
pub struct EnergyTriple<S> {
    pair: PairPotential<S>,
    eta: Option<Potential<S>>,
}

impl<S> fmt::Debug for EnergyTriple<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnergyTriple")
            .field("canonical", &self.eta.is_some())
            .finish()
    }
}

impl<S: Scalar> EnergyTriple<S> {
    /// Canonical triple `η_p(s, t) = η(|s − t|)`.
    ///
    /// Reflection symmetry `η(s) = η(1 − s)` is checked against grid samples
    /// whenever the triple is sampled; see [`EnergyTriple::check_reflection`].
    pub fn canonical(eta: impl Fn(&S) -> S + Send + Sync + 'static) -> Self {
        let eta: Potential<S> = Arc::new(eta);
        let inner = Arc::clone(&eta);
        let pair: PairPotential<S> = Arc::new(move |s: &S, t: &S| {
            let diff = s.clone() - t;
            inner(&diff.abs())
        });
        Self {
            pair,
            eta: Some(eta),
        }
    }

    /// Canonical triple, rejected if `η` is not reflection symmetric on the samples `m/order`.
    pub fn canonical_checked(
        eta: impl Fn(&S) -> S + Send + Sync + 'static,
        order: usize,
    ) -> Result<Self> {
        let triple = Self::canonical(eta);
        triple.check_reflection(order)?;
        Ok(triple)
    }

    /// The triple behind the periodic and extreme L2-discrepancy: `η(s) = 1/2 − s + s²`.
    pub fn discrepancy() -> Self {
        Self::canonical(|s: &S| S::ratio(1, 2) - s + &(s.clone() * s))
    }

    /// A general triple from its pair potential. The row-sum condition is
    /// checked per resolution by [`EnergyTriple::sample`].
    pub fn from_pair_potential(pair: impl Fn(&S, &S) -> S + Send + Sync + 'static) -> Self {
        Self {
            pair: Arc::new(pair),
            eta: None,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.eta.is_some()
    }

    pub fn eta_p(&self, s: &S, t: &S) -> S {
        (self.pair)(s, t)
    }

    /// `η(s) = η_p(s, 0)`.
    pub fn eta(&self, s: &S) -> S {
        match &self.eta {
            Some(eta) => eta(s),
            None => (self.pair)(s, &zero()),
        }
    }

    pub fn eta_e1(&self, s: &S) -> S {
        self.eta(&zero()) - &self.eta(s)
    }

    pub fn eta_e2(&self, s: &S, t: &S) -> S {
        self.eta(&zero()) - &self.eta(s) - &self.eta(t) + &self.eta_p(s, t)
    }

    /// Checks `η(m/M) = η(1 − m/M)` for `m = 1..M`.
    pub fn check_reflection(&self, order: usize) -> Result<()> {
        if order == 0 {
            return Err(Error::InvalidGrid { order, dim: 1 });
        }
        for m in 1..order {
            let a = self.eta(&grid_coord(m, order));
            let b = self.eta(&grid_coord(order - m, order));
            if !a.near(&b, 1e-12) {
                return Err(Error::AsymmetricEta { m, order });
            }
        }
        Ok(())
    }

    /// Samples the triple on `{0, 1/M, …, (M-1)/M}`, verifying symmetry and
    /// the constant row-sum condition for this `M`.
    pub fn sample(&self, order: usize) -> Result<SampledTriple<S>> {
        SampledTriple::new(self, order)
    }

    /// `T(M)`, `Δ(M)` and `η(0)`.
    pub fn constants(&self, order: usize) -> Result<TripleConstants<S>> {
        Ok(self.sample(order)?.constants().clone())
    }

    /// The `d`-fold product kernel.
    pub fn product_kernel(&self, x: &[S], y: &[S], kind: KernelKind) -> Result<S> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let value = x.iter().zip(y).fold(one::<S>(), |acc, (s, t)| {
            let factor = match kind {
                KernelKind::Periodic => self.eta_p(s, t),
                KernelKind::ExtremePair => self.eta_e2(s, t),
                KernelKind::ExtremeBoundary => self.eta_e1(s),
            };
            acc * factor
        });
        Ok(value)
    }
}

/// `T(M)`: the common row sum; `Δ(M) = Σ_m η_p(m/M, m/M)`; `η(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleConstants<S> {
    pub t: S,
    pub delta: S,
    pub eta0: S,
}

/// Grid sample tables of a triple at one resolution `M`.
#[derive(Debug, Clone)]
pub struct SampledTriple<S> {
    order: usize,
    canonical: bool,
    pair: Vec<S>,
    eta: Vec<S>,
    e1: Vec<S>,
    e2: Vec<S>,
    constants: TripleConstants<S>,
}

impl<S: Scalar> SampledTriple<S> {
    fn new(triple: &EnergyTriple<S>, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidGrid { order, dim: 1 });
        }
        if triple.is_canonical() {
            triple.check_reflection(order)?;
        }
        let coords: Vec<S> = (0..order).map(|m| grid_coord(m, order)).collect();
        let mut pair = Vec::with_capacity(order * order);
        for s in &coords {
            for t in &coords {
                pair.push(triple.eta_p(s, t));
            }
        }
        for m in 0..order {
            for n in 0..m {
                if !pair[m * order + n].near(&pair[n * order + m], 1e-12) {
                    return Err(Error::AsymmetricPair { m, n, order });
                }
            }
        }
        let row_sum = |m: usize| {
            pair[m * order..(m + 1) * order]
                .iter()
                .fold(zero::<S>(), |acc, v| acc + v)
        };
        let t = row_sum(0);
        for m in 1..order {
            let s = row_sum(m);
            if !s.near(&t, 1e-12) {
                return Err(Error::RowSumMismatch {
                    order,
                    first: 0,
                    second: m,
                    first_sum: t.render(),
                    second_sum: s.render(),
                });
            }
        }
        let eta: Vec<S> = (0..order).map(|m| pair[m * order].clone()).collect();
        let eta0 = eta[0].clone();
        let e1: Vec<S> = eta.iter().map(|v| eta0.clone() - v).collect();
        let mut e2 = Vec::with_capacity(order * order);
        for m in 0..order {
            for n in 0..order {
                e2.push(eta0.clone() - &eta[m] - &eta[n] + &pair[m * order + n]);
            }
        }
        let delta = (0..order).fold(zero::<S>(), |acc, m| acc + &pair[m * order + m]);
        Ok(Self {
            order,
            canonical: triple.is_canonical(),
            pair,
            eta,
            e1,
            e2,
            constants: TripleConstants { t, delta, eta0 },
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// `η_p(m/M, n/M)`
    #[inline]
    pub fn pair(&self, m: usize, n: usize) -> &S {
        &self.pair[m * self.order + n]
    }

    /// `η(m/M)`
    #[inline]
    pub fn eta(&self, m: usize) -> &S {
        &self.eta[m]
    }

    /// `η_e¹(m/M)`
    #[inline]
    pub fn e1(&self, m: usize) -> &S {
        &self.e1[m]
    }

    /// `η_e²(m/M, n/M)`
    #[inline]
    pub fn e2(&self, m: usize, n: usize) -> &S {
        &self.e2[m * self.order + n]
    }

    pub fn eta_samples(&self) -> &[S] {
        &self.eta
    }

    pub fn constants(&self) -> &TripleConstants<S> {
        &self.constants
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SampledTriple<T> {
        SampledTriple {
            order: self.order,
            canonical: self.canonical,
            pair: self.pair.iter().map(&f).collect(),
            eta: self.eta.iter().map(&f).collect(),
            e1: self.e1.iter().map(&f).collect(),
            e2: self.e2.iter().map(&f).collect(),
            constants: TripleConstants {
                t: f(&self.constants.t),
                delta: f(&self.constants.delta),
                eta0: f(&self.constants.eta0),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn discrepancy_triple_values() {
        let tr = EnergyTriple::<Rational>::discrepancy();
        assert_eq!(tr.eta_p(&q(0, 1), &q(1, 2)), q(1, 4));
        assert_eq!(tr.eta_e1(&q(1, 2)), q(1, 4));
        // η_e²(s,t) = 2(min{s,t} − st)
        assert_eq!(tr.eta_e2(&q(1, 4), &q(1, 2)), q(1, 4));
        for (s, t) in [(q(1, 3), q(3, 4)), (q(0, 1), q(2, 5)), (q(5, 7), q(5, 7))] {
            let expected = q(2, 1) * (s.clone().min(t.clone()) - s.clone() * &t);
            assert_eq!(tr.eta_e2(&s, &t), expected);
            assert_eq!(tr.eta_e1(&s), s.clone() * (q(1, 1) - &s));
        }
    }

    #[test]
    fn discrepancy_constants() {
        let tr = EnergyTriple::<Rational>::discrepancy();
        let c = tr.constants(2).unwrap();
        assert_eq!(c.t, q(3, 4));
        for m in 1..=20i64 {
            let c = tr.constants(m as usize).unwrap();
            assert_eq!(c.t, q(2 * m * m + 1, 6 * m));
            assert_eq!(c.delta, q(m, 2));
            assert_eq!(c.eta0, q(1, 2));
        }
    }

    #[test]
    fn single_cell_constants() {
        let c = EnergyTriple::<Rational>::discrepancy().constants(1).unwrap();
        assert_eq!(c.t, q(1, 2));
        assert_eq!(c.delta, q(1, 2));
    }

    #[test]
    fn sine_product_triple_has_zero_row_sum() {
        use std::f64::consts::PI;
        let tr = EnergyTriple::<f64>::from_pair_potential(|s, t| (2.0 * PI * s).sin() * (2.0 * PI * t).sin());
        let c = tr.constants(4).unwrap();
        assert!(c.t.abs() < 1e-15);
        assert!(!tr.is_canonical());
    }

    #[test]
    fn rejects_asymmetric_eta() {
        let err = EnergyTriple::<Rational>::canonical_checked(|s: &Rational| s.clone(), 4).unwrap_err();
        assert_eq!(err, Error::AsymmetricEta { m: 1, order: 4 });
    }

    #[test]
    fn rejects_non_constant_row_sums() {
        let tr = EnergyTriple::<Rational>::from_pair_potential(|s: &Rational, t: &Rational| s.clone() * t);
        assert!(matches!(tr.sample(3), Err(Error::RowSumMismatch { .. })));
    }

    #[test]
    fn product_kernels() {
        let tr = EnergyTriple::<Rational>::discrepancy();
        let o = vec![q(0, 1), q(0, 1)];
        let h = vec![q(1, 2), q(1, 2)];
        assert_eq!(tr.product_kernel(&o, &o, KernelKind::Periodic).unwrap(), q(1, 4));
        assert_eq!(tr.product_kernel(&o, &h, KernelKind::Periodic).unwrap(), q(1, 16));
        assert_eq!(
            tr.product_kernel(&[q(0, 1)], &[q(0, 1)], KernelKind::ExtremeBoundary).unwrap(),
            q(0, 1)
        );
        assert!(tr.product_kernel(&o, &[q(0, 1)], KernelKind::Periodic).is_err());
    }

    #[test]
    fn grid_identities_for_canonical_triples() {
        // A second canonical triple besides the discrepancy one.
        let cubic = EnergyTriple::<Rational>::canonical(|s: &Rational| {
            let u = s.clone() * (q(1, 1) - s);
            u.clone() * &u + q(1, 3)
        });
        for tr in [EnergyTriple::<Rational>::discrepancy(), cubic] {
            for m in 1..=12usize {
                let st = tr.sample(m).unwrap();
                let c = st.constants();
                let mm = Rational::from_usize(m);
                let mut e2_total = q(0, 1);
                for a in 0..m {
                    for b in 0..m {
                        // η_e²(s,s) = 2η_e¹(s) − (η(0) − η_p(s,s)) on the diagonal
                        if a == b {
                            let lhs = st.e2(a, a).clone();
                            let rhs = q(2, 1) * st.e1(a) - (c.eta0.clone() - st.pair(a, a));
                            assert_eq!(lhs, rhs);
                        }
                        e2_total += st.e2(a, b);
                    }
                }
                assert_eq!(e2_total, mm.clone() * (mm * &c.eta0 - &c.t));
            }
        }
    }
}
