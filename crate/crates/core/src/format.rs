//! Plain-text file formats.
//!
//! Point sets and difference sets share one layout: a header line `d=<int>`
//! followed by one point per line, `d` whitespace-separated signed integers.
//! Writers emit points in lexicographic order with single spaces and a
//! trailing newline, so `write(parse(write(s))) == write(s)` byte for byte.
//!
//! Directions are written as one line of `d` floats with 17 significant
//! digits, which round-trips any `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{DifferenceSet, LatticePoint, PointSet};
use crate::projection::Direction;

fn parse_points(text: &str) -> Result<(usize, Vec<LatticePoint>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let dim: usize = header
        .trim()
        .strip_prefix("d=")
        .and_then(|d| d.trim().parse().ok())
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Parse { line: hline + 1, msg: format!("expected `d=<int>`, got `{header}`") })?;

    let mut points = Vec::new();
    for (i, line) in lines {
        let coords = line
            .split_whitespace()
            .map(str::parse::<i64>)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        if coords.len() != dim {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {dim} coordinates, found {}", coords.len()),
            });
        }
        points.push(LatticePoint::from_slice(&coords));
    }
    Ok((dim, points))
}

fn write_points<'a>(dim: usize, points: impl IntoIterator<Item = &'a LatticePoint>) -> String {
    let mut out = format!("d={dim}\n");
    for p in points {
        let mut first = true;
        for c in p.coords() {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{c}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_point_set(text: &str) -> Result<PointSet> {
    let (dim, points) = parse_points(text)?;
    if points.is_empty() {
        return Err(Error::Parse { line: 1, msg: "point set has no points".into() });
    }
    let n = points.len();
    let set = PointSet::new(points)?;
    if set.len() != n {
        return Err(Error::Parse { line: 1, msg: "duplicate points".into() });
    }
    debug_assert_eq!(set.dim(), dim);
    Ok(set)
}

pub fn write_point_set(set: &PointSet) -> String {
    write_points(set.dim(), set.iter())
}

pub fn parse_difference_set(text: &str) -> Result<DifferenceSet> {
    let (_, points) = parse_points(text)?;
    let n = points.len();
    let w = DifferenceSet::new(points)?;
    if w.kappa() != n {
        return Err(Error::Parse { line: 1, msg: "duplicate differences".into() });
    }
    Ok(w)
}

pub fn write_difference_set(w: &DifferenceSet) -> String {
    write_points(w.dim(), w.iter())
}

pub fn read_point_set(path: impl AsRef<Path>) -> Result<PointSet> {
    parse_point_set(&std::fs::read_to_string(path)?)
}

pub fn read_difference_set(path: impl AsRef<Path>) -> Result<DifferenceSet> {
    parse_difference_set(&std::fs::read_to_string(path)?)
}

pub fn format_direction(z: &Direction) -> String {
    let parts: Vec<String> = z.components().iter().map(|c| format!("{c:.16e}")).collect();
    parts.join(" ")
}

pub fn parse_direction(line: &str) -> Result<Direction> {
    let comps = line
        .split_whitespace()
        .map(str::parse::<f64>)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
    Direction::from_unit(comps)
}
