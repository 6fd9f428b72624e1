//! Exact integer lattice points, point sets and difference sets.
//!
//! Coordinates are stored in scaled grid units: a point `c` on the grid of
//! spacing `1/n` is stored as the integer vector `n * c`. All set operations
//! are exact.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use rustc_hash::FxHashSet;
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coords = SmallVec<[i64; 4]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Coords);

impl LatticePoint {
    pub fn new(coords: impl Into<Coords>) -> Self {
        let coords = coords.into();
        assert!(!coords.is_empty(), "lattice point needs at least one coordinate");
        LatticePoint(coords)
    }

    pub fn from_slice(coords: &[i64]) -> Self {
        Self::new(Coords::from_slice(coords))
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(smallvec::smallvec![0; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Inner product with a real vector of the same dimension.
    #[inline]
    pub fn dot(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(self.dim(), z.len());
        self.0.iter().zip(z).map(|(&c, &w)| c as f64 * w).sum()
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    #[inline]
    fn zip_with(&self, other: &LatticePoint, f: impl Fn(i64, i64) -> i64) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(c: [i64; N]) -> Self {
        LatticePoint::from_slice(&c)
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;
    #[inline]
    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;
    #[inline]
    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;
    #[inline]
    fn neg(self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|c| -c).collect())
    }
}

/// Anything that can answer lattice membership queries.
pub trait Membership {
    fn contains(&self, p: &LatticePoint) -> bool;
}

impl Membership for FxHashSet<LatticePoint> {
    #[inline]
    fn contains(&self, p: &LatticePoint) -> bool {
        FxHashSet::contains(self, p)
    }
}

fn check_dims<'a>(points: impl IntoIterator<Item = &'a LatticePoint>) -> Result<usize> {
    let mut dim = None;
    for p in points {
        match dim {
            None => dim = Some(p.dim()),
            Some(d) if d != p.dim() => {
                return Err(Error::DimensionMismatch { expected: d, found: p.dim() })
            }
            _ => {}
        }
    }
    dim.ok_or_else(|| Error::invalid("empty point set"))
}

/// A finite nonempty set of lattice points of a common dimension.
///
/// Points are kept sorted lexicographically, so two sets are equal exactly
/// when their point lists are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    dim: usize,
    points: Vec<LatticePoint>,
}

impl PointSet {
    /// Builds a set from arbitrary points, dropping duplicates.
    pub fn new(points: impl IntoIterator<Item = LatticePoint>) -> Result<Self> {
        let mut points: Vec<LatticePoint> = points.into_iter().collect();
        let dim = check_dims(&points)?;
        points.sort_unstable();
        points.dedup();
        Ok(PointSet { dim, points })
    }

    pub(crate) fn from_sorted_unchecked(dim: usize, points: Vec<LatticePoint>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        PointSet { dim, points }
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

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn translate(&self, by: &LatticePoint) -> PointSet {
        // Translation preserves lexicographic order.
        PointSet::from_sorted_unchecked(self.dim, self.points.iter().map(|p| p + by).collect())
    }

    pub fn negate(&self) -> PointSet {
        PointSet::from_sorted_unchecked(self.dim, self.points.iter().rev().map(|p| -p).collect())
    }

    /// Representative of the class `{ ±self + a }`: each of `self` and
    /// `-self` is translated so its lexicographically smallest point is the
    /// origin, and the smaller of the two point lists is kept.
    pub fn canonical(&self) -> PointSet {
        let shift = |s: &PointSet| s.translate(&-&s.points[0]);
        let pos = shift(self);
        let neg = shift(&self.negate());
        if neg.points < pos.points {
            neg
        } else {
            pos
        }
    }
}

impl Membership for PointSet {
    fn contains(&self, p: &LatticePoint) -> bool {
        PointSet::contains(self, p)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.points).finish()
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a LatticePoint;
    type IntoIter = std::slice::Iter<'a, LatticePoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// A symmetric set of differences containing the origin.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DifferenceSet {
    dim: usize,
    diffs: Vec<LatticePoint>,
}

impl DifferenceSet {
    /// Validates symmetry and the presence of the zero vector.
    pub fn new(points: impl IntoIterator<Item = LatticePoint>) -> Result<Self> {
        let set = PointSet::new(points)?;
        let dim = set.dim;
        if !set.contains(&LatticePoint::zero(dim)) {
            return Err(Error::invalid("difference set must contain the zero vector"));
        }
        if let Some(p) = set.points.iter().find(|p| !set.contains(&-*p)) {
            return Err(Error::invalid(format!("difference set is not symmetric: {p:?} lacks its negation")));
        }
        Ok(DifferenceSet { dim, diffs: set.points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cardinality, always odd.
    pub fn kappa(&self) -> usize {
        self.diffs.len()
    }

    pub fn diffs(&self) -> &[LatticePoint] {
        &self.diffs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.diffs.iter()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.diffs.binary_search(p).is_ok()
    }

    pub fn to_hash_set(&self) -> FxHashSet<LatticePoint> {
        self.diffs.iter().cloned().collect()
    }

    pub fn max_abs_coord(&self) -> i64 {
        self.diffs.iter().map(LatticePoint::max_abs).max().unwrap_or(0)
    }
}

impl fmt::Debug for DifferenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.diffs).finish()
    }
}

/// All pairwise differences of `points`, without multiplicity.
pub(crate) fn difference_hash_set(points: &[LatticePoint]) -> FxHashSet<LatticePoint> {
    let mut out = FxHashSet::with_capacity_and_hasher(points.len() * points.len(), Default::default());
    for a in points {
        for b in points {
            out.insert(a - b);
        }
    }
    out
}

pub fn difference_set(v: &PointSet) -> Result<DifferenceSet> {
    if v.is_empty() {
        return Err(Error::invalid("difference set of an empty set"));
    }
    let mut diffs: Vec<LatticePoint> = difference_hash_set(&v.points).into_iter().collect();
    diffs.sort_unstable();
    Ok(DifferenceSet { dim: v.dim, diffs })
}

/// Smallest `k` with `k(k-1)+1 >= kappa`, i.e. `ceil((1 + sqrt(4 kappa - 3)) / 2)`.
pub fn k_min(kappa: u64) -> Result<u64> {
    if kappa < 1 {
        return Err(Error::invalid("kappa must be at least 1"));
    }
    let disc = 4 * kappa - 3;
    let mut root = disc.isqrt();
    if root * root < disc {
        root += 1;
    }
    // smallest k with 2k - 1 >= ceil(sqrt(disc))
    Ok((root + 2) / 2)
}

/// True iff `b = ±a + shift` for some shift.
pub fn equivalent(a: &PointSet, b: &PointSet) -> Result<bool> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    if a.len() != b.len() {
        return Ok(false);
    }
    Ok(a.canonical() == b.canonical())
}
