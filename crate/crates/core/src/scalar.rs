//! Dual-mode real numbers.
//!
//! Every evaluator in this crate is generic over [`Scalar`]. Instantiating it
//! with [`Rational`] gives exact arithmetic (used to check identities that hold
//! with equality); instantiating it with `f64` gives the fast path.

use std::fmt::Debug;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Signed
    + Send
    + Sync
    + 'static
    + for<'a> std::ops::Add<&'a Self, Output = Self>
    + for<'a> std::ops::Sub<&'a Self, Output = Self>
    + for<'a> std::ops::Mul<&'a Self, Output = Self>
    + for<'a> std::ops::Div<&'a Self, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn ratio(num: i64, den: i64) -> Self;

    fn from_rational(value: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Parses `p/q`, an integer, or a decimal literal (with optional exponent).
    fn parse_scalar(text: &str) -> Option<Self>;

    /// `p/q` for rationals, shortest round-trip decimal for floats.
    fn render(&self) -> String;

    fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    fn from_usize(n: usize) -> Self {
        Self::ratio(n as i64, 1)
    }

    fn powu(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    /// Equality up to `tol` relative to `max(1, |a|, |b|)`; exact equality for exact scalars.
    fn near(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            return self == other;
        }
        let a = self.to_f64();
        let b = other.to_f64();
        (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
    }

    fn min_of(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    fn max_of(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(value: &Rational) -> Self {
        Scalar::to_f64(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_scalar(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            if q == 0.0 {
                return None;
            }
            return Some(p / q);
        }
        text.parse().ok().filter(|v: &f64| v.is_finite())
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_scalar(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            return Some(Rational::new(p, q));
        }
        parse_decimal(text)
    }

    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

/// Exact value of a decimal literal such as `-0.125` or `3.5e-2`.
fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// `m / order` as a scalar; grid embeddings are computed on demand through this.
pub fn grid_coord<S: Scalar>(m: usize, order: usize) -> S {
    S::ratio(m as i64, order as i64)
}

pub(crate) fn one<S: Scalar>() -> S {
    <S as One>::one()
}

pub(crate) fn zero<S: Scalar>() -> S {
    <S as Zero>::zero()
}

/// Sums in a fixed pairwise order so float results do not depend on chunking.
pub fn pairwise_sum<S: Scalar>(values: &[S]) -> S {
    match values.len() {
        0 => zero(),
        1 => values[0].clone(),
        n if n <= 8 => values.iter().fold(zero(), |acc, v| acc + v),
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + &pairwise_sum(hi)
        }
    }
}
