//! Random directions, projection of a difference set onto a direction, and
//! the intersection step.

use rand::Rng;
use rand_distr::StandardNormal;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::lattice::{DifferenceSet, LatticePoint, Membership, PointSet};

/// Relative tolerance for deciding that two projections coincide.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A unit vector on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `components` to unit length.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if components.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::invalid("direction must be a finite nonzero vector"));
        }
        Ok(Direction(components.into_iter().map(|c| c / norm).collect()))
    }

    /// Accepts components that are already unit length (to 1e-12), unchanged.
    pub fn from_unit(components: Vec<f64>) -> Result<Self> {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if components.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("direction norm {norm} is not 1")));
        }
        Ok(Direction(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

/// Uniform direction on the sphere: a standard normal vector, normalized.
pub fn sample_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Direction> {
    if d < 2 {
        return Err(Error::invalid("directions need dimension at least 2"));
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(z) = Direction::new(v) {
            return Ok(z);
        }
    }
}

/// Sequential sampler that discourages directions close to ones already
/// accepted.
///
/// Direction `i` (1-based) is drawn repeatedly; on retry `r` (starting at 1)
/// it is accepted when its largest absolute correlation with the accepted
/// set is below `1 - 1/(i + r)`. The first direction is plain uniform.
#[derive(Clone, Debug)]
pub struct DirectionSampler {
    dim: usize,
    accepted: Vec<Direction>,
}

/// A candidate direction together with the retry at which it passed.
#[derive(Clone, Debug)]
pub struct Proposal {
    pub direction: Direction,
    pub retry: u32,
}

impl DirectionSampler {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("directions need dimension at least 2"));
        }
        Ok(DirectionSampler { dim, accepted: Vec::new() })
    }

    pub fn accepted(&self) -> &[Direction] {
        &self.accepted
    }

    pub fn correlation(&self, z: &Direction) -> f64 {
        self.accepted.iter().map(|y| z.dot(y).abs()).fold(0.0, f64::max)
    }

    /// Draws the next candidate without committing it.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> Proposal {
        let i = self.accepted.len() + 1;
        if i == 1 {
            let direction = sample_direction(self.dim, rng).expect("dimension checked");
            return Proposal { direction, retry: 0 };
        }
        let mut r = 0u32;
        loop {
            r += 1;
            let c = 1.0 / (i as f64 + r as f64);
            let x = sample_direction(self.dim, rng).expect("dimension checked");
            if self.correlation(&x) < 1.0 - c {
                return Proposal { direction: x, retry: r };
            }
        }
    }

    pub fn accept(&mut self, z: Direction) {
        debug_assert_eq!(z.dim(), self.dim);
        self.accepted.push(z);
    }
}

pub fn select_decorrelated_directions<R: Rng + ?Sized>(
    count: usize,
    d: usize,
    rng: &mut R,
) -> Result<Vec<Direction>> {
    if count < 1 {
        return Err(Error::invalid("count must be at least 1"));
    }
    let mut sampler = DirectionSampler::new(d)?;
    for _ in 0..count {
        let p = sampler.propose(rng);
        sampler.accept(p.direction);
    }
    Ok(sampler.accepted)
}

/// The half of a difference set with positive projection onto a direction,
/// plus the origin, sorted by projection.
#[derive(Clone, Debug)]
pub struct OrderedHalfSet {
    elems: Vec<LatticePoint>,
    projections: Vec<f64>,
    direction: Direction,
}

impl OrderedHalfSet {
    pub fn elems(&self) -> &[LatticePoint] {
        &self.elems
    }

    pub fn projections(&self) -> &[f64] {
        &self.projections
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn max(&self) -> &LatticePoint {
        self.elems.last().expect("half set always holds the origin")
    }
}

pub fn project_half(w: &DifferenceSet, z: &Direction) -> Result<OrderedHalfSet> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), found: z.dim() });
    }
    let tol = DEGENERACY_TOL * w.max_abs_coord() as f64;
    let comps = z.components();

    let mut positive: Vec<(f64, &LatticePoint)> = Vec::with_capacity(w.kappa() / 2);
    for p in w.iter() {
        if p.is_zero() {
            continue;
        }
        let proj = p.dot(comps);
        if proj.abs() <= tol {
            return Err(Error::DegenerateDirection);
        }
        if proj > 0.0 {
            positive.push((proj, p));
        }
    }
    positive.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    if positive.windows(2).any(|pair| pair[1].0 - pair[0].0 <= tol) {
        return Err(Error::DegenerateDirection);
    }

    let mut elems = Vec::with_capacity(positive.len() + 1);
    let mut projections = Vec::with_capacity(positive.len() + 1);
    elems.push(LatticePoint::zero(w.dim()));
    projections.push(0.0);
    for (proj, p) in positive {
        elems.push(p.clone());
        projections.push(proj);
    }
    Ok(OrderedHalfSet { elems, projections, direction: z.clone() })
}

/// The first nonzero element of the shifted true support: the largest
/// projected difference minus the second largest.
pub fn deduce_v1(half: &OrderedHalfSet) -> Result<LatticePoint> {
    let n = half.len();
    if n < 3 {
        return Err(Error::invalid("need the origin and at least two positive differences"));
    }
    Ok(&half.elems[n - 1] - &half.elems[n - 2])
}

/// Output of an intersection step, kept in projection order.
///
/// Index 0 is the origin, index 1 is `u_1` and the last index is `u_max`.
#[derive(Clone, Debug)]
pub struct IntersectionSet {
    elems: Vec<LatticePoint>,
    members: FxHashSet<LatticePoint>,
}

impl IntersectionSet {
    /// Wraps a list already in projection order (first element the origin).
    pub fn from_ordered(elems: Vec<LatticePoint>) -> Result<Self> {
        let first = elems.first().ok_or_else(|| Error::invalid("empty intersection set"))?;
        if !first.is_zero() {
            return Err(Error::invalid("intersection set must start at the origin"));
        }
        let dim = first.dim();
        if let Some(p) = elems.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        let members: FxHashSet<LatticePoint> = elems.iter().cloned().collect();
        if members.len() != elems.len() {
            return Err(Error::invalid("duplicate points in intersection set"));
        }
        Ok(IntersectionSet { elems, members })
    }

    pub fn elems(&self) -> &[LatticePoint] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elems[0].dim()
    }

    pub fn get(&self, j: usize) -> Option<&LatticePoint> {
        self.elems.get(j)
    }

    /// Smallest nonzero element; the origin when the set is `{0}`.
    pub fn u1(&self) -> &LatticePoint {
        self.elems.get(1).unwrap_or(&self.elems[0])
    }

    pub fn umax(&self) -> &LatticePoint {
        self.elems.last().expect("nonempty")
    }

    pub fn to_point_set(&self) -> PointSet {
        PointSet::new(self.elems.iter().cloned()).expect("nonempty, uniform dimension")
    }
}

impl Membership for IntersectionSet {
    #[inline]
    fn contains(&self, p: &LatticePoint) -> bool {
        self.members.contains(p)
    }
}

/// `{0} ∪ [half ∩ (half + v1)]`, in projection order.
pub fn intersect_ordered(half: &OrderedHalfSet, v1: &LatticePoint) -> Result<IntersectionSet> {
    let members: FxHashSet<&LatticePoint> = half.elems.iter().collect();
    if v1.is_zero() || !members.contains(v1) {
        return Err(Error::invalid("v1 must be a nonzero element of the half set"));
    }
    let mut elems = vec![half.elems[0].clone()];
    let mut kept = FxHashSet::default();
    kept.insert(half.elems[0].clone());
    for w in &half.elems[1..] {
        if members.contains(&(w - v1)) {
            elems.push(w.clone());
            kept.insert(w.clone());
        }
    }
    Ok(IntersectionSet { elems, members: kept })
}

pub fn intersection_step(half: &OrderedHalfSet, v1: &LatticePoint) -> Result<PointSet> {
    Ok(intersect_ordered(half, v1)?.to_point_set())
}

/// Projection and intersection for one direction, including the small
/// cases `W = {0}` and `|W| = 3` where no second positive difference exists.
pub fn project_and_intersect(w: &DifferenceSet, z: &Direction) -> Result<IntersectionSet> {
    let half = project_half(w, z)?;
    match half.len() {
        1 => IntersectionSet::from_ordered(half.elems),
        2 => intersect_ordered(&half, &half.elems[1].clone()),
        _ => {
            let v1 = deduce_v1(&half)?;
            intersect_ordered(&half, &v1)
        }
    }
}
