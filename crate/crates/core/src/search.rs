//! Collaboration search and the top-level solver.
//!
//! Each intersection step `U^i` contains a copy of the true support shifted
//! to the origin and possibly flipped. The search looks for the orientation
//! `ω(U^i - u_j)` of every `U^i` that lines it up with `U^1`, breadth first,
//! one intersection step per depth. A node stores its search sequence, the
//! running intersection of oriented sets (its collaboration) and the
//! oriented anchor points `u_1^i`, `u_max^i` of every layer below the root.
//!
//! Pruning uses two facts about the correct node: the anchors of every layer
//! must lie in every oriented layer, and the difference set of its
//! collaboration must cover `W`.

use std::time::{Duration, Instant};

use rand::Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::lattice::{difference_hash_set, k_min, DifferenceSet, LatticePoint, Membership, PointSet};
use crate::projection::{project_and_intersect, Direction, DirectionSampler, IntersectionSet};

/// Maximum consecutive degenerate directions before giving up.
const MAX_REDRAWS: usize = 1000;

/// Leaves examined by [`TargetSet::refine`] once the projections run out.
const MAX_REFINED_LEAVES: usize = 16;

/// Removal candidates tried per refinement round.
const REFINE_CANDIDATES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn apply(self, p: &LatticePoint) -> LatticePoint {
        match self {
            Sign::Plus => p.clone(),
            Sign::Minus => -p,
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// One `(index, sign)` pair per layer; the root is always `(0, +1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SearchSequence(Vec<(usize, Sign)>);

impl SearchSequence {
    pub fn root() -> Self {
        SearchSequence(vec![(0, Sign::Plus)])
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn pairs(&self) -> &[(usize, Sign)] {
        &self.0
    }

    fn extended(&self, j: usize, sign: Sign) -> Self {
        let mut pairs = self.0.clone();
        pairs.push((j, sign));
        SearchSequence(pairs)
    }
}

/// The set `ω(U - origin)` without materializing it.
pub struct OrientedView<'a> {
    set: &'a IntersectionSet,
    origin: &'a LatticePoint,
    sign: Sign,
}

impl<'a> OrientedView<'a> {
    pub fn new(set: &'a IntersectionSet, j: usize, sign: Sign) -> Result<Self> {
        let origin = set
            .get(j)
            .ok_or_else(|| Error::invalid(format!("index {j} out of range for a set of {}", set.len())))?;
        Ok(OrientedView { set, origin, sign })
    }

    #[inline]
    pub fn map(&self, u: &LatticePoint) -> LatticePoint {
        self.sign.apply(&(u - self.origin))
    }
}

impl Membership for OrientedView<'_> {
    #[inline]
    fn contains(&self, t: &LatticePoint) -> bool {
        // t = ω(u - o)  <=>  u = ωt + o
        self.set.contains(&(&self.sign.apply(t) + self.origin))
    }
}

/// `{ ω(u - u_j) : u ∈ U }`.
pub fn orientation(u: &IntersectionSet, j: usize, sign: Sign) -> Result<PointSet> {
    let view = OrientedView::new(u, j, sign)?;
    PointSet::new(u.elems().iter().map(|p| view.map(p)))
}

/// All `(j, ω)` whose oriented layer contains both root anchors.
///
/// For `ω = +1` these are the `u_j ∈ U ∩ (U - a) ∩ (U - b)`; for `ω = -1`
/// the `u_j ∈ U ∩ (U + a) ∩ (U + b)`, with `a`, `b` the anchors of `U^1`.
/// Returned in index order, `+1` before `-1`.
pub fn u1_prune(up: &IntersectionSet, u1_root: &LatticePoint, umax_root: &LatticePoint) -> Vec<(usize, Sign)> {
    let mut out = Vec::new();
    for (j, u) in up.elems().iter().enumerate() {
        if up.contains(&(u + u1_root)) && up.contains(&(u + umax_root)) {
            out.push((j, Sign::Plus));
        }
        if up.contains(&(u - u1_root)) && up.contains(&(u - umax_root)) {
            out.push((j, Sign::Minus));
        }
    }
    out
}

/// True iff every anchor lies in the candidate set.
pub fn multi_prune<M: Membership + ?Sized>(candidate: &M, anchors: &[LatticePoint]) -> bool {
    anchors.iter().all(|a| candidate.contains(a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `diff(C) = W`.
    Exact,
    /// `W ⊊ diff(C)`.
    SupersetKeep,
    /// Too large to check cheaply; kept without computing `diff(C)`.
    DeferKeep,
    Reject,
}

impl Verdict {
    pub fn survives(self) -> bool {
        matches!(self, Verdict::SupersetKeep | Verdict::DeferKeep)
    }
}

struct TargetSet {
    members: FxHashSet<LatticePoint>,
    kappa: usize,
    kmin: usize,
    c: f64,
}

enum Coverage {
    Equal,
    Superset,
    Missing,
}

impl TargetSet {
    fn new(w: &DifferenceSet, c: f64) -> Result<Self> {
        if !(c > 1.0) {
            return Err(Error::invalid(format!("c must exceed 1, got {c}")));
        }
        Ok(TargetSet {
            members: w.to_hash_set(),
            kappa: w.kappa(),
            kmin: k_min(w.kappa() as u64)? as usize,
            c,
        })
    }

    fn coverage(&self, collab: &[LatticePoint]) -> Coverage {
        let diffs = difference_hash_set(collab);
        let covered = diffs.iter().filter(|d| self.members.contains(*d)).count();
        if covered < self.kappa {
            Coverage::Missing
        } else if diffs.len() == self.kappa {
            Coverage::Equal
        } else {
            Coverage::Superset
        }
    }

    fn covers(&self, points: &[LatticePoint]) -> bool {
        !matches!(self.coverage(points), Coverage::Missing)
    }

    /// Greedily drops the points involved in the most differences outside
    /// `W`, keeping `W ⊆ diff`, until the difference set equals `W`.
    fn refine(&self, points: &[LatticePoint], stats: &mut SearchStats) -> Option<Vec<LatticePoint>> {
        let mut points = points.to_vec();
        while points.len() >= self.kmin {
            let n = points.len();
            let mut outside = vec![0usize; n];
            for i in 0..n {
                for j in 0..i {
                    if !self.members.contains(&(&points[i] - &points[j])) {
                        outside[i] += 1;
                        outside[j] += 1;
                    }
                }
            }
            stats.diffset_checks += 1;
            if outside.iter().all(|&c| c == 0) {
                return matches!(self.coverage(&points), Coverage::Equal).then_some(points);
            }
            let mut order: Vec<usize> = (0..n).filter(|&i| outside[i] > 0).collect();
            order.sort_by_key(|&i| std::cmp::Reverse(outside[i]));
            let next = order.into_iter().take(REFINE_CANDIDATES).find_map(|i| {
                let mut trial = points.clone();
                trial.remove(i);
                stats.diffset_checks += 1;
                (trial.len() >= self.kmin && self.covers(&trial)).then_some(trial)
            });
            points = next?;
        }
        None
    }

    /// Removes points whose differences are all realized by other pairs,
    /// leaving an inclusion-minimal set with the same difference set.
    fn minimize(&self, points: &mut Vec<LatticePoint>) {
        if points.len() <= self.kmin {
            return;
        }
        let mut multiplicity: FxHashMap<LatticePoint, u32> = FxHashMap::default();
        for a in points.iter() {
            for b in points.iter() {
                if a != b {
                    *multiplicity.entry(a - b).or_default() += 1;
                }
            }
        }
        let mut alive: FxHashSet<LatticePoint> = points.iter().cloned().collect();
        let mut idx = 0;
        while idx < points.len() && points.len() > self.kmin {
            let c = &points[idx];
            // pairs holding `c` with difference `c - o`: (c, o) and possibly (2c - o, c)
            let removable = points.iter().filter(|o| *o != c).all(|o| {
                let d = c - o;
                let own = 1 + alive.contains(&(c + &d)) as u32;
                multiplicity[&d] > own
            });
            if removable {
                let c = points.remove(idx);
                alive.remove(&c);
                for o in points.iter() {
                    for d in [&c - o, o - &c] {
                        *multiplicity.get_mut(&d).expect("present") -= 1;
                    }
                }
            } else {
                idx += 1;
            }
        }
    }

    fn classify(&self, collab: &[LatticePoint], stats: &mut SearchStats) -> Verdict {
        let n = collab.len();
        if n < self.kmin {
            return Verdict::Reject;
        }
        if n as f64 > self.c * self.kmin as f64 {
            return Verdict::DeferKeep;
        }
        stats.diffset_checks += 1;
        match self.coverage(collab) {
            Coverage::Equal => Verdict::Exact,
            Coverage::Superset => Verdict::SupersetKeep,
            Coverage::Missing => Verdict::Reject,
        }
    }
}

pub fn verify_node(collab: &PointSet, w: &DifferenceSet, kmin: usize, c: f64) -> Verdict {
    let target = TargetSet { members: w.to_hash_set(), kappa: w.kappa(), kmin, c };
    target.classify(collab.points(), &mut SearchStats::default())
}

#[derive(Clone, Debug)]
pub struct CollabNode {
    pub seq: SearchSequence,
    /// Kept in the projection order of `U^1`.
    pub collab: Vec<LatticePoint>,
    /// `O^i(u_1^i)`, `O^i(u_max^i)` for layers `i >= 2`.
    pub anchors: Vec<LatticePoint>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Nodes whose collaboration was computed, excluding the root.
    pub nodes_explored: u64,
    pub nodes_pruned: u64,
    pub diffset_checks: u64,
    /// Intersection steps performed.
    pub projections: usize,
    pub wall: Duration,
}

impl SearchStats {
    /// Everything except wall time.
    pub fn counters(&self) -> (u64, u64, u64, usize) {
        (self.nodes_explored, self.nodes_pruned, self.diffset_checks, self.projections)
    }

    pub fn wall_ms(&self) -> f64 {
        self.wall.as_secs_f64() * 1e3
    }
}

#[derive(Clone, Debug)]
pub struct MistrResult {
    pub recovered: PointSet,
    /// `diff(recovered) == W`.
    pub exact: bool,
    /// Exactness was reached by removing spurious points from a leaf after
    /// the last projection rather than by the search itself.
    pub refined: bool,
    /// Depth of the node that produced `recovered`; 1 is the root.
    pub depth_used: usize,
    pub sequence: SearchSequence,
    pub stats: SearchStats,
}

/// Incremental breadth-first collaboration search: one layer per call.
pub struct CollaborationSearch {
    target: TargetSet,
    node_budget: u64,
    root_anchors: Option<(LatticePoint, LatticePoint)>,
    depth: usize,
    frontier: Vec<CollabNode>,
    solution: Option<CollabNode>,
    stats: SearchStats,
}

impl CollaborationSearch {
    pub fn new(w: &DifferenceSet, c: f64, node_budget: u64) -> Result<Self> {
        Ok(CollaborationSearch {
            target: TargetSet::new(w, c)?,
            node_budget,
            root_anchors: None,
            depth: 0,
            frontier: Vec::new(),
            solution: None,
            stats: SearchStats::default(),
        })
    }

    pub fn k_min(&self) -> usize {
        self.target.kmin
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Surviving nodes at the current depth.
    pub fn frontier(&self) -> &[CollabNode] {
        &self.frontier
    }

    pub fn is_solved(&self) -> bool {
        self.solution.is_some()
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    /// Adds the next intersection step and searches one level deeper.
    /// Returns `true` once an exact solution is found.
    pub fn push_layer(&mut self, up: &IntersectionSet) -> Result<bool> {
        if self.solution.is_some() {
            return Ok(true);
        }
        self.stats.projections += 1;
        self.depth += 1;

        let Some((a1, amax)) = self.root_anchors.clone() else {
            return self.push_root(up);
        };

        let candidates = u1_prune(up, &a1, &amax);
        let per_parent_rejected = (2 * up.len() - candidates.len()) as u64;
        self.stats.nodes_pruned += per_parent_rejected * self.frontier.len() as u64;

        let parents = std::mem::take(&mut self.frontier);
        let mut children = Vec::new();
        let mut seen: FxHashSet<(Vec<LatticePoint>, Vec<LatticePoint>)> = FxHashSet::default();

        for parent in &parents {
            for &(j, sign) in &candidates {
                let view = OrientedView::new(up, j, sign)?;
                if !multi_prune(&view, &parent.anchors) {
                    self.stats.nodes_pruned += 1;
                    continue;
                }

                self.stats.nodes_explored += 1;
                if self.stats.nodes_explored > self.node_budget {
                    return Err(Error::BudgetExceeded { explored: self.stats.nodes_explored });
                }

                let collab: Vec<LatticePoint> = parent.collab.iter().filter(|c| view.contains(c)).cloned().collect();
                let new_anchors = [view.map(up.u1()), view.map(up.umax())];
                // The new anchors must also survive the earlier layers.
                if !new_anchors.iter().all(|a| collab.contains(a)) {
                    self.stats.nodes_pruned += 1;
                    continue;
                }

                let verdict = self.target.classify(&collab, &mut self.stats);
                let mut anchors = parent.anchors.clone();
                anchors.extend(new_anchors);
                let node = CollabNode { seq: parent.seq.extended(j, sign), collab, anchors, verdict };
                match verdict {
                    Verdict::Exact => {
                        self.solution = Some(node);
                        return Ok(true);
                    }
                    Verdict::Reject => self.stats.nodes_pruned += 1,
                    Verdict::SupersetKeep | Verdict::DeferKeep => {
                        let mut key_anchors = node.anchors.clone();
                        key_anchors.sort_unstable();
                        key_anchors.dedup();
                        if seen.insert((node.collab.clone(), key_anchors)) {
                            children.push(node);
                        }
                    }
                }
            }
        }

        self.frontier = children;
        if self.frontier.is_empty() {
            return Err(Error::NoCandidate);
        }
        Ok(false)
    }

    fn push_root(&mut self, u1: &IntersectionSet) -> Result<bool> {
        self.root_anchors = Some((u1.u1().clone(), u1.umax().clone()));
        let collab = u1.elems().to_vec();
        let verdict = self.target.classify(&collab, &mut self.stats);
        let node = CollabNode { seq: SearchSequence::root(), collab, anchors: Vec::new(), verdict };
        match verdict {
            Verdict::Exact => {
                self.solution = Some(node);
                Ok(true)
            }
            Verdict::Reject => Err(Error::NoCandidate),
            _ => {
                self.frontier = vec![node];
                Ok(false)
            }
        }
    }

    /// The exact solution if one was found, otherwise the smallest
    /// surviving leaf whose difference set covers `W`.
    pub fn finish(mut self) -> Result<MistrResult> {
        let depth = self.depth;
        if let Some(mut node) = self.solution.take() {
            self.target.minimize(&mut node.collab);
            return Ok(self.result(node, true, false, depth));
        }
        let mut order: Vec<usize> = (0..self.frontier.len()).collect();
        order.sort_by_key(|&i| self.frontier[i].collab.len());
        let mut best_guess = None;
        let mut attempts = 0;
        for i in order {
            let node = &self.frontier[i];
            let covers = match node.verdict {
                Verdict::SupersetKeep => true,
                Verdict::DeferKeep => {
                    self.stats.diffset_checks += 1;
                    self.target.covers(&node.collab)
                }
                _ => false,
            };
            if !covers {
                continue;
            }
            best_guess.get_or_insert(i);
            if attempts < MAX_REFINED_LEAVES {
                attempts += 1;
                if let Some(mut points) = self.target.refine(&node.collab, &mut self.stats) {
                    self.target.minimize(&mut points);
                    let node = CollabNode { collab: points, ..self.frontier.swap_remove(i) };
                    return Ok(self.result(node, true, true, depth));
                }
            }
        }
        match best_guess {
            Some(i) => {
                let node = self.frontier.swap_remove(i);
                Ok(self.result(node, false, false, depth))
            }
            None => Err(Error::NoCandidate),
        }
    }

    fn result(&self, node: CollabNode, exact: bool, refined: bool, depth: usize) -> MistrResult {
        let recovered = PointSet::new(node.collab).unwrap_or_else(|_| unreachable!("collaborations are nonempty"));
        MistrResult { recovered, exact, refined, depth_used: depth, sequence: node.seq, stats: self.stats.clone() }
    }
}

/// Runs the collaboration search over precomputed intersection steps.
pub fn collaboration_search(layers: &[IntersectionSet], w: &DifferenceSet, c: f64) -> Result<MistrResult> {
    if layers.is_empty() {
        return Err(Error::invalid("need at least one intersection step"));
    }
    let mut search = CollaborationSearch::new(w, c, MistrParams::default().node_budget)?;
    for layer in layers {
        if search.push_layer(layer)? {
            break;
        }
    }
    search.finish()
}

#[derive(Clone, Debug)]
pub struct MistrParams {
    /// Maximum number of projection/intersection steps.
    pub projections: usize,
    /// Difference sets are only computed for collaborations of at most
    /// `c * k_min` points.
    pub c: f64,
    pub node_budget: u64,
}

impl Default for MistrParams {
    fn default() -> Self {
        MistrParams { projections: 30, c: 2.0, node_budget: 1_000_000 }
    }
}

impl MistrParams {
    pub fn with_projections(projections: usize) -> Self {
        MistrParams { projections, ..Default::default() }
    }

    fn validate(&self, w: &DifferenceSet) -> Result<()> {
        if self.projections < 1 {
            return Err(Error::invalid("need at least one projection"));
        }
        if !(self.c > 1.0) {
            return Err(Error::invalid(format!("c must exceed 1, got {}", self.c)));
        }
        if w.dim() < 2 {
            return Err(Error::invalid("the solver needs dimension at least 2"));
        }
        Ok(())
    }
}

fn trivial_result(w: &DifferenceSet, start: Instant) -> MistrResult {
    let recovered = PointSet::new([LatticePoint::zero(w.dim())]).expect("one point");
    let stats = SearchStats { wall: start.elapsed(), ..Default::default() };
    MistrResult { recovered, exact: true, refined: false, depth_used: 1, sequence: SearchSequence::root(), stats }
}

/// Recovers a set whose difference set is `w`.
///
/// Directions come from [`DirectionSampler`]; a direction that projects
/// two differences onto the same value is discarded and redrawn. For each
/// direction the solver runs a projection step, an intersection step and
/// one more level of collaboration search, stopping at the first exact
/// solution.
pub fn mistr<R: Rng + ?Sized>(w: &DifferenceSet, params: &MistrParams, rng: &mut R) -> Result<MistrResult> {
    let start = Instant::now();
    params.validate(w)?;
    if w.kappa() == 1 {
        return Ok(trivial_result(w, start));
    }
    let mut sampler = DirectionSampler::new(w.dim())?;
    let mut search = CollaborationSearch::new(w, params.c, params.node_budget)?;
    for _ in 0..params.projections {
        let mut redraws = 0;
        let layer = loop {
            let proposal = sampler.propose(rng);
            match project_and_intersect(w, &proposal.direction) {
                Ok(layer) => {
                    sampler.accept(proposal.direction);
                    break layer;
                }
                Err(Error::DegenerateDirection) if redraws < MAX_REDRAWS => redraws += 1,
                Err(e) => return Err(e),
            }
        };
        if search.push_layer(&layer)? {
            break;
        }
    }
    finish(search, w, start)
}

/// Same as [`mistr`] with caller-chosen directions (one per depth).
pub fn mistr_with_directions(w: &DifferenceSet, directions: &[Direction], params: &MistrParams) -> Result<MistrResult> {
    let start = Instant::now();
    params.validate(w)?;
    if w.kappa() == 1 {
        return Ok(trivial_result(w, start));
    }
    let mut search = CollaborationSearch::new(w, params.c, params.node_budget)?;
    for z in directions.iter().take(params.projections) {
        let layer = project_and_intersect(w, z)?;
        if search.push_layer(&layer)? {
            break;
        }
    }
    finish(search, w, start)
}

fn finish(search: CollaborationSearch, w: &DifferenceSet, start: Instant) -> Result<MistrResult> {
    let mut result = search.finish()?;
    result.stats.wall = start.elapsed();
    debug_assert_eq!(
        result.exact,
        crate::lattice::difference_set(&result.recovered).map(|d| &d == w).unwrap_or(false)
    );
    Ok(result)
}
