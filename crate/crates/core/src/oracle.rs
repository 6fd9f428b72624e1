//! Exhaustive reference solver for small difference sets.
//!
//! Lexicographic order on `Z^d` is compatible with addition, so the
//! lexicographically largest element `w*` of `W` equals `v_max - v_min` for
//! any solution `V`. Shifting `V` so that `v_min = 0` puts every element in
//! the lex-positive half of `W`, and both `0` and `w*` in the set. The search
//! places the remaining points in increasing lex order, requiring every
//! pairwise difference to lie in `W`.

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::lattice::{difference_hash_set, difference_set, k_min, DifferenceSet, LatticePoint, PointSet};

/// Largest `max_k` accepted.
pub const MAX_ORACLE_K: usize = 12;

/// Default cap on DFS nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

/// Pairwise non-equivalent solutions, each in canonical form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleSolutionSet {
    pub solutions: Vec<PointSet>,
    /// Size of the listed solutions; `None` when there are none.
    pub k: Option<usize>,
}

impl OracleSolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// True iff some listed class is equivalent to `v`.
    pub fn contains_class_of(&self, v: &PointSet) -> bool {
        let canonical = v.canonical();
        self.solutions.iter().any(|s| *s == canonical)
    }
}

/// True iff `diff(candidate) == w`.
pub fn check_solution(candidate: &PointSet, w: &DifferenceSet) -> bool {
    candidate.dim() == w.dim() && difference_set(candidate).map(|d| d == *w).unwrap_or(false)
}

pub fn brute_force_solve(w: &DifferenceSet, max_k: usize) -> Result<OracleSolutionSet> {
    brute_force_solve_with_budget(w, max_k, DEFAULT_NODE_BUDGET)
}

/// Tries every size from `k_min(κ)` to `max_k` and returns all classes of
/// the smallest size that has any.
pub fn brute_force_solve_with_budget(w: &DifferenceSet, max_k: usize, node_budget: u64) -> Result<OracleSolutionSet> {
    let kappa = w.kappa();
    let kmin = k_min(kappa as u64)? as usize;
    if max_k > MAX_ORACLE_K || max_k < kmin {
        return Err(Error::invalid(format!("max_k must lie in [{kmin}, {MAX_ORACLE_K}], got {max_k}")));
    }
    let dim = w.dim();
    if kappa == 1 {
        let zero = PointSet::new([LatticePoint::zero(dim)])?;
        return Ok(OracleSolutionSet { solutions: vec![zero], k: Some(1) });
    }

    let members = w.to_hash_set();
    let anchor = w.diffs().last().expect("kappa > 1").clone();
    let origin = LatticePoint::zero(dim);
    let candidates: Vec<LatticePoint> = w
        .iter()
        .filter(|p| **p > origin && **p < anchor && members.contains(&(&anchor - *p)))
        .cloned()
        .collect();

    let mut search = Dfs { members: &members, candidates: &candidates, kappa, budget: node_budget, nodes: 0 };
    // a k-point set has at least 2k - 1 distinct differences
    let upper = max_k.min(kappa.div_ceil(2));
    for k in kmin..=upper {
        let mut found = FxHashSet::default();
        let mut chosen = vec![origin.clone(), anchor.clone()];
        search.place(&mut chosen, 0, k, &mut found)?;
        if !found.is_empty() {
            let mut solutions: Vec<PointSet> = found.into_iter().collect();
            solutions.sort_by(|a, b| a.points().cmp(b.points()));
            return Ok(OracleSolutionSet { solutions, k: Some(k) });
        }
    }
    Ok(OracleSolutionSet::default())
}

struct Dfs<'a> {
    members: &'a FxHashSet<LatticePoint>,
    candidates: &'a [LatticePoint],
    kappa: usize,
    budget: u64,
    nodes: u64,
}

impl Dfs<'_> {
    fn place(&mut self, chosen: &mut Vec<LatticePoint>, from: usize, k: usize, found: &mut FxHashSet<PointSet>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { explored: self.nodes });
        }
        if chosen.len() == k {
            if difference_hash_set(chosen).len() == self.kappa {
                found.insert(PointSet::new(chosen.iter().cloned())?.canonical());
            }
            return Ok(());
        }
        let needed = k - chosen.len();
        for i in from..self.candidates.len() {
            if self.candidates.len() - i < needed {
                break;
            }
            let p = &self.candidates[i];
            // 0 and the anchor are checked by the candidate filter
            if chosen[2..].iter().all(|q| self.members.contains(&(p - q))) {
                chosen.push(p.clone());
                self.place(chosen, i + 1, k, found)?;
                chosen.pop();
            }
        }
        Ok(())
    }
}
