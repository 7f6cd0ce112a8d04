use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{one, zero, Scalar};

/// A finite point set in `[0,1)^d` with real (possibly negative) weights.
///
/// Duplicate points are merged on construction by summing their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet<S> {
    dim: usize,
    points: Vec<Vec<S>>,
    weights: Vec<S>,
}

impl<S: Scalar> WeightedPointSet<S> {
    pub fn new(dim: usize, points: Vec<Vec<S>>, weights: Vec<S>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if let Some(bad) = p.iter().find(|c| **c < zero() || **c >= one()) {
                return Err(Error::CoordinateOutOfRange {
                    point: i,
                    value: bad.render(),
                });
            }
        }
        Ok(Self::merge(dim, points, weights))
    }

    /// Unit weights.
    pub fn unweighted(dim: usize, points: Vec<Vec<S>>) -> Result<Self> {
        let weights = vec![one(); points.len()];
        Self::new(dim, points, weights)
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            points: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Caller guarantees validity and distinct points (grid supports).
    pub(crate) fn from_parts_unchecked(dim: usize, points: Vec<Vec<S>>, weights: Vec<S>) -> Self {
        Self {
            dim,
            points,
            weights,
        }
    }

    fn merge(dim: usize, points: Vec<Vec<S>>, weights: Vec<S>) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let cmp = |a: &Vec<S>, b: &Vec<S>| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        };
        order.sort_by(|&i, &j| cmp(&points[i], &points[j]).then(i.cmp(&j)));
        let has_duplicates = order
            .windows(2)
            .any(|w| cmp(&points[w[0]], &points[w[1]]) == Ordering::Equal);
        if !has_duplicates {
            return Self {
                dim,
                points,
                weights,
            };
        }
        // Keep first-occurrence order for the merged result.
        let mut keep = vec![true; points.len()];
        let mut merged = weights.clone();
        let mut start = 0;
        while start < order.len() {
            let mut end = start + 1;
            while end < order.len() && cmp(&points[order[start]], &points[order[end]]) == Ordering::Equal {
                end += 1;
            }
            let head = order[start..end].iter().copied().min().unwrap();
            for &i in &order[start..end] {
                if i != head {
                    keep[i] = false;
                    let w = weights[i].clone();
                    merged[head] += w;
                }
            }
            start = end;
        }
        let (points, weights) = points
            .into_iter()
            .zip(merged)
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(pw, _)| pw)
            .unzip();
        Self {
            dim,
            points,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<S>] {
        &self.points
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[S], &S)> {
        self.points.iter().map(Vec::as_slice).zip(&self.weights)
    }

    pub fn total_weight(&self) -> S {
        self.weights.iter().fold(zero(), |acc, w| acc + w)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> WeightedPointSet<T> {
        WeightedPointSet {
            dim: self.dim,
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(&f).collect())
                .collect(),
            weights: self.weights.iter().map(&f).collect(),
        }
    }

    /// Float copy of the coordinates, for evaluators that only run in float mode.
    pub fn to_f64_points(&self) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| p.iter().map(Scalar::to_f64).collect())
            .collect()
    }
}
