//! Algebraic closure, backtracking consistency search, and exhaustive
//! scenario enumeration.
//!
//! Closure drives everything: `a_closure` computes the greatest fixpoint of
//! the tightening rule C(i,j) <- C(i,j) n (C(i,k) <> C(k,j)); the solver
//! interleaves it with depth-first atomic refinement. For the built-in
//! calculi a closure-consistent atomic network is satisfiable, so scenarios
//! are exact there; for user calculi without that property they are
//! closure-consistent refinements only (callers surface the caveat).

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::Relation;
use crate::network::Qcn;

/// Outcome of running algebraic closure on a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureResult {
    /// Entrywise refinement of the input; equal to the full fixpoint when
    /// consistent, stopped at the first empty entry otherwise.
    pub closed_network: Qcn,
    /// False iff some entry became (or already was) empty.
    pub consistent: bool,
    /// Number of constraint-tightening steps performed.
    pub revisions: usize,
}

/// Computes the algebraic closure: the coarsest entrywise refinement in
/// which every entry satisfies C(i,j) subset-of C(i,k) <> C(k,j) for all k.
/// The fixpoint is unique, so the propagation order does not affect the
/// result, only the revision count bookkeeping; this implementation is
/// deterministic in both.
pub fn a_closure(qcn: &Qcn) -> ClosureResult {
    let mut net = qcn.clone();
    let seeds: Vec<(usize, usize)> = net.unordered_pairs().collect();
    let (consistent, revisions) = close_from(&mut net, &seeds);
    ClosureResult { closed_network: net, consistent, revisions }
}

/// Queue-based propagation: processes only pairs whose constraint changed,
/// starting from `seeds`. Returns (consistent, revisions). The network must
/// already be closed with respect to every pair outside `seeds` for the
/// result to be the full fixpoint; seeding all pairs always satisfies that.
pub(crate) fn close_from(net: &mut Qcn, seeds: &[(usize, usize)]) -> (bool, usize) {
    let n = net.var_count();
    if net.has_empty_constraint() {
        return (false, 0);
    }
    let cal = Arc::clone(net.calculus());
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let mut queued = vec![false; n * n];
    for &(i, j) in seeds {
        let (i, j) = (i.min(j), i.max(j));
        if !queued[i * n + j] {
            queued[i * n + j] = true;
            queue.push_back((i, j));
        }
    }

    let mut revisions = 0usize;
    while let Some((i, j)) = queue.pop_front() {
        queued[i * n + j] = false;
        for k in 0..n {
            if k == i || k == j {
                continue;
            }
            // The changed edge (i, j) can tighten (i, k) through j and
            // (k, j) through i.
            for (x, via, y) in [(i, j, k), (k, i, j)] {
                let composed = cal.compose_bits(
                    net.constraint(x, via).bits(),
                    net.constraint(via, y).bits(),
                );
                let old = net.constraint(x, y).bits();
                let new = old & composed;
                if new == old {
                    continue;
                }
                revisions += 1;
                let r = Relation::from_bits(&cal, new).expect("bits stay within the calculus");
                net.set_pair(x, y, r);
                if new == 0 {
                    return (false, revisions);
                }
                let (a, b) = (x.min(y), x.max(y));
                if !queued[a * n + b] {
                    queued[a * n + b] = true;
                    queue.push_back((a, b));
                }
            }
        }
    }
    (true, revisions)
}

/// An atomic, closure-consistent refinement of some source network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    qcn: Qcn,
}

impl Scenario {
    /// Caller guarantees: atomic off-diagonal entries and closure
    /// consistency. Solver-internal; everything public goes through the
    /// search functions.
    pub(crate) fn from_atomic_closed(qcn: Qcn) -> Self {
        debug_assert!(qcn.is_atomic());
        Scenario { qcn }
    }

    pub fn qcn(&self) -> &Qcn {
        &self.qcn
    }

    pub fn into_qcn(self) -> Qcn {
        self.qcn
    }

    /// Index of the single base relation fixed at (i, j).
    pub fn base_relation(&self, i: usize, j: usize) -> usize {
        self.qcn
            .constraint(i, j)
            .indices()
            .next()
            .expect("scenario entries are atomic")
    }
}

/// Returns the first scenario of the deterministic enumeration order, or
/// none iff the network has no scenario.
pub fn solve(qcn: &Qcn) -> Option<Scenario> {
    enumerate_scenarios(qcn, Some(1)).into_iter().next()
}

/// Enumerates scenarios depth-first, up to `limit` when given: branch on the
/// unfixed edge with the fewest base relations (ties to the lowest (i, j)),
/// trying base relations in calculus declaration order, pruning each branch
/// with closure. The order is fully deterministic and duplicate-free.
pub fn enumerate_scenarios(qcn: &Qcn, limit: Option<usize>) -> Vec<Scenario> {
    let limit = limit.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    let root = a_closure(qcn);
    if root.consistent {
        dfs(root.closed_network, limit, &mut out);
    }
    out
}

/// Parallel variant: splits the branches of the first decision edge across
/// the current rayon pool and concatenates the per-branch enumerations, so
/// the output is identical to [`enumerate_scenarios`] with no limit. A limit
/// truncates after the merge (each branch still enumerates fully).
pub fn enumerate_scenarios_parallel(qcn: &Qcn, limit: Option<usize>) -> Vec<Scenario> {
    if limit == Some(0) {
        return Vec::new();
    }
    let root = a_closure(qcn);
    if !root.consistent {
        return Vec::new();
    }
    let net = root.closed_network;
    let Some((i, j)) = pick_branch_edge(&net) else {
        return vec![Scenario::from_atomic_closed(net)];
    };
    let values: Vec<usize> = net.constraint(i, j).indices().collect();
    let mut out: Vec<Scenario> = values
        .into_par_iter()
        .map(|b| {
            let mut child = net.clone();
            child.set_pair(i, j, Relation::single(child.calculus(), b));
            let mut acc = Vec::new();
            if close_from(&mut child, &[(i, j)]).0 {
                dfs(child, usize::MAX, &mut acc);
            }
            acc
        })
        .collect::<Vec<Vec<Scenario>>>()
        .into_iter()
        .flatten()
        .collect();
    if let Some(k) = limit {
        out.truncate(k);
    }
    out
}

/// Unfixed edge with the fewest base relations; ties broken by lowest
/// (i, j). None when the network is already atomic.
pub(crate) fn pick_branch_edge(net: &Qcn) -> Option<(usize, usize)> {
    net.unordered_pairs()
        .filter(|&(i, j)| !net.constraint(i, j).is_atomic())
        .min_by_key(|&(i, j)| (net.constraint(i, j).cardinality(), i, j))
}

/// Depth-first refinement over an already-closed consistent network.
/// Returns true once `limit` scenarios have been collected.
fn dfs(net: Qcn, limit: usize, out: &mut Vec<Scenario>) -> bool {
    let Some((i, j)) = pick_branch_edge(&net) else {
        out.push(Scenario::from_atomic_closed(net));
        return out.len() >= limit;
    };
    let values: Vec<usize> = net.constraint(i, j).indices().collect();
    for b in values {
        let mut child = net.clone();
        child.set_pair(i, j, Relation::single(child.calculus(), b));
        if close_from(&mut child, &[(i, j)]).0 && dfs(child, limit, out) {
            return true;
        }
    }
    false
}
