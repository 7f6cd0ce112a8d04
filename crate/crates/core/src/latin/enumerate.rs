//! Exhaustive enumeration by backtracking over the hypercube table.

use super::{unflatten, WeakLatinHypercube};
use crate::error::{Error, Result};

/// Instances small enough to enumerate: `M! ≤ 10^7` for `d = 2`, `M ≤ 5` for
/// `d = 3`, and `M ≤ 2` beyond.
pub fn is_enumerable(order: usize, dim: usize) -> bool {
    match dim {
        0 | 1 => false,
        2 => order <= 10,
        3 => order <= 5,
        _ => order <= 2,
    }
}

/// Heuristic size `M^{M^{d−1}} (M!/M^M)^{(d−1) M^{d−2}}`: every domain line is a
/// permutation with probability `M!/M^M`, treated as independent. Exact for
/// `d = 2`; for `d = 3` it is the classical `(M!)^{2M}/M^{M²}` estimate.
pub fn estimated_count(order: usize, dim: usize) -> f64 {
    let m = order as f64;
    let log_fact: f64 = (1..=order).map(|k| (k as f64).ln()).sum();
    let cells = m.powi(dim as i32 - 1);
    let lines = (dim as f64 - 1.0) * m.powi(dim as i32 - 2);
    (cells * m.ln() + lines * (log_fact - m * m.ln())).exp()
}

fn refuse(order: usize, dim: usize) -> Error {
    Error::Infeasible {
        reason: format!("enumerating all weak Latin hypercubes with M = {order}, d = {dim}"),
        estimate: format!("{:.3e}", estimated_count(order, dim)),
    }
}

/// Iterator over all weak `M`-Latin hypercubes in `d` dimensions, each exactly once.
pub fn enumerate_all(order: usize, dim: usize) -> Result<Enumerator> {
    enumerate_in_order(order, dim, None)
}

/// As [`enumerate_all`], filling table positions in `fill_order` (a permutation
/// of the domain indices) instead of row-major order.
pub fn enumerate_in_order(order: usize, dim: usize, fill_order: Option<Vec<usize>>) -> Result<Enumerator> {
    if order == 0 || dim < 2 {
        return Err(Error::InvalidArgument(format!("no hypercubes for M = {order}, d = {dim}")));
    }
    if !is_enumerable(order, dim) {
        return Err(refuse(order, dim));
    }
    let domain = order.pow(dim as u32 - 1);
    let fill_order = fill_order.unwrap_or_else(|| (0..domain).collect());
    super::check_permutation(&fill_order)?;
    if fill_order.len() != domain {
        return Err(Error::TableShape {
            expected: domain,
            got: fill_order.len(),
        });
    }
    Ok(Enumerator::new(order, dim, fill_order))
}

/// The number `Λ` of hypercubes, by enumeration.
pub fn count_all(order: usize, dim: usize) -> Result<u64> {
    Ok(enumerate_all(order, dim)?.count() as u64)
}

#[derive(Debug, Clone)]
pub struct Enumerator {
    order: usize,
    dim: usize,
    fill_order: Vec<usize>,
    /// For each domain cell and domain axis, the line id along that axis.
    lines: Vec<Vec<usize>>,
    used: Vec<Vec<bool>>,
    table: Vec<usize>,
    cursor: Vec<usize>,
    pos: usize,
    finished: bool,
}

impl Enumerator {
    fn new(order: usize, dim: usize, fill_order: Vec<usize>) -> Self {
        let domain = fill_order.len();
        let axes = dim - 1;
        let mut coords = vec![0; axes];
        let lines = (0..domain)
            .map(|i| {
                unflatten(i, order, &mut coords);
                (0..axes)
                    .map(|axis| {
                        coords
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != axis)
                            .fold(0, |acc, (_, &c)| acc * order + c)
                    })
                    .collect()
            })
            .collect();
        let line_count = domain / order;
        Self {
            order,
            dim,
            fill_order,
            lines,
            used: vec![vec![false; line_count * order]; axes],
            table: vec![0; domain],
            cursor: vec![0; domain],
            pos: 0,
            finished: false,
        }
    }

    fn allowed(&self, cell: usize, v: usize) -> bool {
        self.lines[cell]
            .iter()
            .zip(&self.used)
            .all(|(&line, used)| !used[line * self.order + v])
    }

    fn mark(&mut self, cell: usize, v: usize, on: bool) {
        for (axis, &line) in self.lines[cell].iter().enumerate() {
            self.used[axis][line * self.order + v] = on;
        }
    }
}

impl Iterator for Enumerator {
    type Item = WeakLatinHypercube;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        let n = self.fill_order.len();
        if self.pos == n {
            self.pos -= 1;
            let cell = self.fill_order[self.pos];
            self.mark(cell, self.table[cell], false);
        }
        loop {
            let cell = self.fill_order[self.pos];
            let mut placed = false;
            while self.cursor[self.pos] < self.order {
                let v = self.cursor[self.pos];
                self.cursor[self.pos] += 1;
                if self.allowed(cell, v) {
                    self.table[cell] = v;
                    self.mark(cell, v, true);
                    placed = true;
                    break;
                }
            }
            if placed {
                self.pos += 1;
                if self.pos == n {
                    return Some(WeakLatinHypercube::new_unchecked(
                        self.order,
                        self.dim,
                        self.table.clone(),
                    ));
                }
                self.cursor[self.pos] = 0;
            } else {
                if self.pos == 0 {
                    self.finished = true;
                    return None;
                }
                self.pos -= 1;
                let prev = self.fill_order[self.pos];
                self.mark(prev, self.table[prev], false);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn known_counts() {
        assert_eq!(count_all(3, 2).unwrap(), 6);
        assert_eq!(count_all(5, 2).unwrap(), 120);
        assert_eq!(count_all(2, 3).unwrap(), 2);
        assert_eq!(count_all(3, 3).unwrap(), 12);
        assert_eq!(count_all(4, 3).unwrap(), 576);
        assert_eq!(count_all(1, 3).unwrap(), 1);
        assert_eq!(count_all(2, 4).unwrap(), 2);
    }

    #[test]
    fn column_major_order_agrees() {
        for m in 2..=4 {
            let col_major: Vec<usize> = (0..m * m).map(|i| (i % m) * m + i / m).collect();
            let a: HashSet<_> = enumerate_all(m, 3).unwrap().collect();
            let b: HashSet<_> = enumerate_in_order(m, 3, Some(col_major)).unwrap().collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn output_is_valid_and_distinct() {
        let all: Vec<_> = enumerate_all(3, 3).unwrap().collect();
        let distinct: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), distinct.len());
        for h in &all {
            assert!(super::super::validate(3, 3, h.table()).is_ok());
        }
    }

    #[test]
    fn refuses_large_instances() {
        for (m, d) in [(11, 2), (6, 3), (3, 4)] {
            match enumerate_all(m, d) {
                Err(Error::Infeasible { .. }) => {}
                other => panic!("expected refusal, got {other:?}"),
            }
        }
        assert!((estimated_count(5, 2) - 120.0).abs() < 1e-6);
    }
}
