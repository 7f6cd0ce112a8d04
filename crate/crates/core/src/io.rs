//! Text formats.
//!
//! Point sets: a header `d N` followed by `N` lines of `d` coordinates in
//! `[0, 1)`, each `p/q` or a decimal, optionally followed by a weight.
//! Grid-supported sets: a header `grid M d` followed by lines
//! `m_1 … m_d w` with integer coordinates; repeated cells add up.
//! Hypercubes: a header `wlh M d` followed by `M^{d−1}` lines `m_1 … m_{d−1} H(m)`.
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{GridWeights, TorusGrid};
use crate::latin::{flat_index, WeakLatinHypercube};
use crate::points::WeightedPointSet;
use crate::scalar::{one, Scalar};

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(line_no: usize, line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    line: line_no,
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// Non-empty, non-comment lines, tokenized, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = Vec<Token<'_>>> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let trimmed = l.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some(tokenize(i + 1, l))
        }
    })
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl Token<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        parse_error(self.line, self.column, message)
    }

    fn usize(&self, what: &str) -> Result<usize> {
        self.text
            .parse()
            .map_err(|_| self.error(format!("expected {what} (a nonnegative integer), found `{}`", self.text)))
    }

    fn scalar<S: Scalar>(&self, what: &str) -> Result<S> {
        S::parse_scalar(self.text).ok_or_else(|| self.error(format!("expected {what}, found `{}`", self.text)))
    }
}

fn expect_len(tokens: &[Token<'_>], allowed: &[usize], what: &str) -> Result<()> {
    if allowed.contains(&tokens.len()) {
        return Ok(());
    }
    let (line, column) = match tokens.get(allowed.iter().copied().max().unwrap_or(0)) {
        Some(t) => (t.line, t.column),
        None => {
            let last = tokens.last().expect("content lines are nonempty");
            (last.line, last.column + last.text.chars().count())
        }
    };
    Err(parse_error(
        line,
        column,
        format!("{what}: expected {allowed:?} fields, found {}", tokens.len()),
    ))
}

/// A parsed point file: explicit points or grid weights.
#[derive(Debug, Clone, PartialEq)]
pub enum PointFile<S> {
    Points(WeightedPointSet<S>),
    Grid(GridWeights<S>),
}

impl<S: Scalar> PointFile<S> {
    pub fn to_point_set(&self) -> WeightedPointSet<S> {
        match self {
            Self::Points(p) => p.clone(),
            Self::Grid(w) => w.to_point_set(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Points(p) => p.dim(),
            Self::Grid(w) => w.grid().dim(),
        }
    }
}

pub fn parse_point_file<S: Scalar>(text: &str) -> Result<PointFile<S>> {
    let mut lines = content_lines(text);
    let header = lines.next().ok_or_else(|| parse_error(1, 1, "empty input"))?;
    if header[0].text == "grid" {
        expect_len(&header, &[3], "grid header `grid M d`")?;
        let m = header[1].usize("M")?;
        let d = header[2].usize("d")?;
        let grid = TorusGrid::new(m, d).map_err(|e| header[1].error(e.to_string()))?;
        let mut w = GridWeights::zeros(grid);
        let mut coords = vec![0; d];
        for tokens in lines {
            expect_len(&tokens, &[d + 1], "grid line `m_1 … m_d w`")?;
            for (k, t) in tokens[..d].iter().enumerate() {
                let c = t.usize("grid coordinate")?;
                if c >= m {
                    return Err(t.error(format!("grid coordinate {c} is not below M = {m}")));
                }
                coords[k] = c;
            }
            let weight: S = tokens[d].scalar("weight")?;
            w.add(grid.index(&coords), &weight);
        }
        return Ok(PointFile::Grid(w));
    }
    expect_len(&header, &[2], "header `d N`")?;
    let d = header[0].usize("d")?;
    let n = header[1].usize("N")?;
    if d == 0 {
        return Err(header[0].error("dimension must be at least 1"));
    }
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut last_line = header[0].line;
    for tokens in lines {
        last_line = tokens[0].line;
        if points.len() == n {
            return Err(tokens[0].error(format!("more than the declared {n} points")));
        }
        expect_len(&tokens, &[d, d + 1], "point line")?;
        let mut p = Vec::with_capacity(d);
        for t in &tokens[..d] {
            let v: S = t.scalar("coordinate")?;
            if v.is_negative() || v >= one::<S>() {
                return Err(t.error(format!("coordinate `{}` is outside [0, 1)", t.text)));
            }
            p.push(v);
        }
        points.push(p);
        weights.push(match tokens.get(d) {
            Some(t) => t.scalar("weight")?,
            None => one(),
        });
    }
    if points.len() != n {
        return Err(parse_error(
            last_line + 1,
            1,
            format!("expected {n} points, found {}", points.len()),
        ));
    }
    Ok(PointFile::Points(WeightedPointSet::new(d, points, weights)?))
}

pub fn parse_point_set<S: Scalar>(text: &str) -> Result<WeightedPointSet<S>> {
    Ok(parse_point_file(text)?.to_point_set())
}

pub fn write_point_set<S: Scalar>(set: &WeightedPointSet<S>) -> String {
    let mut out = format!("{} {}\n", set.dim(), set.len());
    for (p, w) in set.iter() {
        let coords: Vec<String> = p.iter().map(Scalar::render).collect();
        let _ = writeln!(out, "{} {}", coords.join(" "), w.render());
    }
    out
}

pub fn write_grid_weights<S: Scalar>(w: &GridWeights<S>) -> String {
    let g = w.grid();
    let mut out = format!("grid {} {}\n", g.order(), g.dim());
    for (c, v) in w.support() {
        let coords: Vec<String> = g.coords(c).iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{} {}", coords.join(" "), v.render());
    }
    out
}

pub fn parse_hypercube(text: &str) -> Result<WeakLatinHypercube> {
    let mut lines = content_lines(text);
    let header = lines.next().ok_or_else(|| parse_error(1, 1, "empty input"))?;
    expect_len(&header, &[3], "header `wlh M d`")?;
    if header[0].text != "wlh" {
        return Err(header[0].error(format!("expected `wlh`, found `{}`", header[0].text)));
    }
    let m = header[1].usize("M")?;
    let d = header[2].usize("d")?;
    if m == 0 || d < 2 {
        return Err(header[1].error(format!("need M >= 1 and d >= 2, got M = {m}, d = {d}")));
    }
    let domain = m
        .checked_pow(d as u32 - 1)
        .ok_or_else(|| header[2].error("M^{d-1} overflows"))?;
    let mut table: Vec<Option<usize>> = vec![None; domain];
    let mut coords = vec![0; d - 1];
    let mut last_line = header[0].line;
    for tokens in lines {
        last_line = tokens[0].line;
        expect_len(&tokens, &[d], "hypercube line `m_1 … m_{d-1} H(m)`")?;
        for (k, t) in tokens.iter().enumerate() {
            let v = t.usize(if k + 1 == d { "value" } else { "coordinate" })?;
            if v >= m {
                return Err(t.error(format!("{v} is not below M = {m}")));
            }
            if k + 1 < d {
                coords[k] = v;
            }
        }
        let slot = &mut table[flat_index(&coords, m)];
        if slot.is_some() {
            return Err(tokens[0].error(format!("domain point {coords:?} given twice")));
        }
        *slot = Some(tokens[d - 1].usize("value")?);
    }
    if let Some(missing) = table.iter().position(Option::is_none) {
        let mut c = vec![0; d - 1];
        crate::latin::unflatten(missing, m, &mut c);
        return Err(parse_error(last_line + 1, 1, format!("no value for domain point {c:?}")));
    }
    WeakLatinHypercube::new(m, d, table.into_iter().map(Option::unwrap).collect())
}

pub fn write_hypercube(h: &WeakLatinHypercube) -> String {
    let mut out = format!("wlh {} {}\n", h.order(), h.dim());
    let mut coords = vec![0; h.dim() - 1];
    for (i, v) in h.table().iter().enumerate() {
        crate::latin::unflatten(i, h.order(), &mut coords);
        let c: Vec<String> = coords.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{} {v}", c.join(" "));
    }
    out
}
