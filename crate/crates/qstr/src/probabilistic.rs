//! Probability distributions over constraint networks: per-edge base-relation
//! distributions, scenario robustness scoring, a branch-and-bound search for
//! the most robust scenario, and rectification of evidence against background
//! knowledge.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::rational::Ratio;
use num::Zero;

use crate::algebra::{check_same, Calculus, Relation};
use crate::error::{Error, Result};
use crate::network::{NetworkDocument, Qcn};
use crate::solver::{a_closure, close_from, enumerate_scenarios, pick_branch_edge};

/// Exact probabilities, used for scenario-derived distributions so that edge
/// sums hold without rounding error.
pub type Rational = Ratio<u64>;

/// A single probability value. Scenario counting produces `Exact` values;
/// probabilities read from network files are `Approx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prob {
    Exact(Rational),
    Approx(f64),
}

impl Prob {
    pub fn as_f64(self) -> f64 {
        match self {
            Prob::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Prob::Approx(x) => x,
        }
    }

    pub fn is_positive(self) -> bool {
        match self {
            Prob::Exact(r) => !r.numer().is_zero(),
            Prob::Approx(x) => x > 0.0,
        }
    }

    fn zero_like(source: ProbabilitySource) -> Prob {
        match source {
            ProbabilitySource::ScenarioDerived => Prob::Exact(Rational::zero()),
            ProbabilitySource::External => Prob::Approx(0.0),
        }
    }
}

impl std::fmt::Display for Prob {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

/// Where a network's probabilities came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbabilitySource {
    /// Read from `prob` lines in a network file.
    External,
    /// Computed by counting scenarios.
    ScenarioDerived,
}

/// Per-edge probability distributions over base relations.
///
/// A distribution is stored once per unordered variable pair, in the
/// direction low index -> high index. Reads in the opposite direction see the
/// converse permutation applied, so `probability(j, i, b)` equals
/// `probability(i, j, converse(b))` by construction. Edges may be absent:
/// distributions are only required where probability data exists.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistributions {
    calculus: Arc<Calculus>,
    var_count: usize,
    dists: BTreeMap<(usize, usize), Vec<Prob>>,
}

impl EdgeDistributions {
    pub fn new(calculus: &Arc<Calculus>, var_count: usize) -> Self {
        EdgeDistributions {
            calculus: Arc::clone(calculus),
            var_count,
            dists: BTreeMap::new(),
        }
    }

    pub fn calculus(&self) -> &Arc<Calculus> {
        &self.calculus
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    /// Unordered pairs that carry a distribution, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dists.keys().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.dists.contains_key(&canonical(i, j))
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::InvalidDistribution(
                "diagonal edges carry no distribution".into(),
            ));
        }
        if i >= self.var_count || j >= self.var_count {
            return Err(Error::InvalidDistribution(format!(
                "edge ({i}, {j}) out of range for {} variables",
                self.var_count
            )));
        }
        Ok(())
    }

    /// Install a distribution read from an external source. `entries` pairs
    /// base-relation indices with probabilities and is interpreted in the
    /// direction i -> j. The probabilities must sum to 1 within 1e-9.
    pub fn set_external(&mut self, i: usize, j: usize, entries: &[(usize, f64)]) -> Result<()> {
        self.check_pair(i, j)?;
        let n = self.calculus.len();
        let mut dense = vec![Prob::Approx(0.0); n];
        let mut sum = 0.0;
        for &(b, p) in entries {
            if b >= n {
                return Err(Error::InvalidDistribution(format!(
                    "base relation index {b} out of range"
                )));
            }
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} outside [0, 1]"
                )));
            }
            dense[b] = Prob::Approx(p);
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "edge probabilities sum to {sum}, expected 1"
            )));
        }
        self.insert_directed(i, j, dense);
        Ok(())
    }

    fn set_exact(&mut self, i: usize, j: usize, dense: Vec<Prob>) {
        debug_assert!(i < j);
        debug_assert_eq!(dense.len(), self.calculus.len());
        self.dists.insert((i, j), dense);
    }

    /// Store `dense` (given in direction i -> j) under the canonical key,
    /// applying the converse permutation when i > j.
    fn insert_directed(&mut self, i: usize, j: usize, dense: Vec<Prob>) {
        if i < j {
            self.dists.insert((i, j), dense);
        } else {
            let mut flipped = vec![Prob::Approx(0.0); dense.len()];
            for (b, p) in dense.into_iter().enumerate() {
                flipped[self.calculus.converse_of(b)] = p;
            }
            self.dists.insert((j, i), flipped);
        }
    }

    /// Probability of base relation `b` on the directed edge i -> j, or
    /// `None` when the unordered pair carries no distribution.
    pub fn probability(&self, i: usize, j: usize, b: usize) -> Option<Prob> {
        if i == j || b >= self.calculus.len() {
            return None;
        }
        let dense = self.dists.get(&canonical(i, j))?;
        if i < j {
            Some(dense[b])
        } else {
            Some(dense[self.calculus.converse_of(b)])
        }
    }

    /// The full distribution on the directed edge i -> j.
    pub fn edge(&self, i: usize, j: usize) -> Option<Vec<Prob>> {
        if i == j {
            return None;
        }
        let dense = self.dists.get(&canonical(i, j))?;
        if i < j {
            Some(dense.clone())
        } else {
            let mut flipped = vec![Prob::Approx(0.0); dense.len()];
            for (b, &p) in dense.iter().enumerate() {
                flipped[self.calculus.converse_of(b)] = p;
            }
            Some(flipped)
        }
    }

    /// Bitset of base relations with positive probability on edge i -> j.
    pub fn support(&self, i: usize, j: usize) -> Option<u64> {
        let dense = self.edge(i, j)?;
        let mut bits = 0u64;
        for (b, p) in dense.iter().enumerate() {
            if p.is_positive() {
                bits |= 1u64 << b;
            }
        }
        Some(bits)
    }
}

fn canonical(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Per-variable label distribution: `(label, probability)` pairs in file
/// order. Sums may stay below 1; the remainder is unassigned mass.
pub type LabelDistribution = Vec<(String, f64)>;

/// A constraint network together with edge probability distributions and
/// optional per-variable label distributions.
///
/// Invariants, enforced at construction:
/// - every stored edge distribution sums to 1 within 1e-9,
/// - positive-probability relations lie inside the edge's constraint,
/// - label probabilities per variable sum to at most 1 (within 1e-9).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticQcn {
    qcn: Qcn,
    edge_dist: EdgeDistributions,
    label_dist: Vec<LabelDistribution>,
    source: ProbabilitySource,
}

impl ProbabilisticQcn {
    /// Build from a parsed network file. `prob` annotations become external
    /// edge distributions; edges without annotations stay without one.
    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        let qcn = doc.qcn.clone();
        let mut edge_dist = EdgeDistributions::new(qcn.calculus(), qcn.var_count());
        for ann in &doc.probs {
            edge_dist.set_external(ann.i, ann.j, &ann.entries)?;
        }
        let mut label_dist = vec![Vec::new(); qcn.var_count()];
        for ann in &doc.labels {
            let sum: f64 = ann.entries.iter().map(|(_, p)| *p).sum();
            if sum > 1.0 + 1e-9 {
                return Err(Error::InvalidDistribution(format!(
                    "label probabilities for `{}` sum to {sum}, expected at most 1",
                    qcn.variables()[ann.variable]
                )));
            }
            label_dist[ann.variable] = ann.entries.clone();
        }
        let pq = ProbabilisticQcn {
            qcn,
            edge_dist,
            label_dist,
            source: ProbabilitySource::External,
        };
        pq.check_supports()?;
        Ok(pq)
    }

    /// Build from a plain network by counting scenarios. Every unordered pair
    /// receives an exact distribution; there are no labels.
    pub fn from_scenarios(qcn: &Qcn) -> Result<Self> {
        let edge_dist = edge_probabilities_from_scenarios(qcn)?;
        Ok(ProbabilisticQcn {
            qcn: qcn.clone(),
            edge_dist,
            label_dist: vec![Vec::new(); qcn.var_count()],
            source: ProbabilitySource::ScenarioDerived,
        })
    }

    /// Replace the edge distributions with scenario-derived ones, keeping the
    /// network and labels. Used when a file carries no `prob` lines but an
    /// operation needs probabilities.
    pub fn with_scenario_probabilities(mut self) -> Result<Self> {
        self.edge_dist = edge_probabilities_from_scenarios(&self.qcn)?;
        self.source = ProbabilitySource::ScenarioDerived;
        Ok(self)
    }

    fn check_supports(&self) -> Result<()> {
        for (i, j) in self.edge_dist.edges().collect::<Vec<_>>() {
            let support = self.edge_dist.support(i, j).unwrap();
            let allowed = self.qcn.constraint(i, j).bits();
            if support & !allowed != 0 {
                let stray = (support & !allowed).trailing_zeros() as usize;
                return Err(Error::InvalidDistribution(format!(
                    "probability on `{}` outside the constraint of edge ({}, {})",
                    self.qcn.calculus().base_relation_name(stray),
                    self.qcn.variables()[i],
                    self.qcn.variables()[j]
                )));
            }
        }
        Ok(())
    }

    pub fn qcn(&self) -> &Qcn {
        &self.qcn
    }

    pub fn edge_dist(&self) -> &EdgeDistributions {
        &self.edge_dist
    }

    pub fn label_dist(&self) -> &[LabelDistribution] {
        &self.label_dist
    }

    pub fn labels_of(&self, variable: usize) -> &[(String, f64)] {
        &self.label_dist[variable]
    }

    pub fn source(&self) -> ProbabilitySource {
        self.source
    }

    pub fn robustness_of(&self, refinement: &Qcn) -> Result<RobustnessReport> {
        if refinement.variables() != self.qcn.variables() {
            return Err(Error::VariableMismatch);
        }
        robustness(&self.edge_dist, refinement)
    }

    pub fn max_robust(&self) -> Result<Option<RobustnessReport>> {
        max_robust_scenario(&self.qcn, &self.edge_dist)
    }
}

/// Scenario-frequency distributions: for each unordered pair, the probability
/// of a base relation is the fraction of scenarios of `qcn` that use it.
/// Probabilities are exact rationals, so each edge sums to exactly 1.
///
/// Fails with a no-scenario error when `qcn` has no scenario.
pub fn edge_probabilities_from_scenarios(qcn: &Qcn) -> Result<EdgeDistributions> {
    let scenarios = enumerate_scenarios(qcn, None);
    if scenarios.is_empty() {
        return Err(Error::NoScenario);
    }
    let total = scenarios.len() as u64;
    let n = qcn.calculus().len();
    let mut dist = EdgeDistributions::new(qcn.calculus(), qcn.var_count());
    for (i, j) in qcn.unordered_pairs() {
        let mut counts = vec![0u64; n];
        for s in &scenarios {
            counts[s.base_relation(i, j)] += 1;
        }
        let dense = counts
            .into_iter()
            .map(|c| Prob::Exact(Rational::new(c, total)))
            .collect();
        dist.set_exact(i, j, dense);
    }
    Ok(dist)
}

/// Outcome of scoring one atomic refinement against edge distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    /// The scored atomic network.
    pub refinement: Qcn,
    /// Probability of the chosen base relation per unordered pair, in
    /// ascending pair order.
    pub per_edge_probability: Vec<((usize, usize), f64)>,
    /// Mean of the per-edge probabilities.
    pub robustness: f64,
    /// Whether the refinement passes algebraic closure.
    pub satisfiable: bool,
    /// Unordered pairs that carried no distribution and scored 0.
    pub missing_edges: Vec<(usize, usize)>,
}

fn check_dist_shape(edge_dist: &EdgeDistributions, qcn: &Qcn) -> Result<()> {
    check_same(edge_dist.calculus(), qcn.calculus())?;
    if edge_dist.var_count() != qcn.var_count() {
        return Err(Error::InvalidDistribution(format!(
            "distributions cover {} variables but the network has {}",
            edge_dist.var_count(),
            qcn.var_count()
        )));
    }
    Ok(())
}

/// Score an atomic refinement: the robustness is the mean, over all unordered
/// variable pairs, of the probability assigned to the chosen base relation.
/// Pairs without a distribution contribute 0 and are listed in
/// `missing_edges`. Fails when `refinement` has a non-atomic edge.
pub fn robustness(edge_dist: &EdgeDistributions, refinement: &Qcn) -> Result<RobustnessReport> {
    check_dist_shape(edge_dist, refinement)?;
    let mut per_edge = Vec::new();
    let mut missing = Vec::new();
    let mut sum = 0.0;
    let mut pair_count = 0usize;
    for (i, j) in refinement.unordered_pairs() {
        let r = refinement.constraint(i, j);
        if !r.is_atomic() {
            return Err(Error::NotAtomic {
                i: refinement.variables()[i].clone(),
                j: refinement.variables()[j].clone(),
            });
        }
        let b = r.indices().next().unwrap();
        let p = match edge_dist.probability(i, j, b) {
            Some(p) => p.as_f64(),
            None => {
                missing.push((i, j));
                0.0
            }
        };
        per_edge.push(((i, j), p));
        sum += p;
        pair_count += 1;
    }
    let robustness = if pair_count == 0 {
        1.0
    } else {
        sum / pair_count as f64
    };
    let satisfiable = a_closure(refinement).consistent;
    Ok(RobustnessReport {
        refinement: refinement.clone(),
        per_edge_probability: per_edge,
        robustness,
        satisfiable,
        missing_edges: missing,
    })
}

/// Upper bound on the robustness sum of any scenario refining `net`: each
/// unordered pair contributes the maximum probability over its remaining base
/// relations. On an atomic network this is the exact score. Terms are added
/// in ascending pair order, the same order `robustness` uses, so the float
/// bound dominates the float score of every descendant.
fn upper_sum(net: &Qcn, edge_dist: &EdgeDistributions) -> f64 {
    let mut sum = 0.0;
    for (i, j) in net.unordered_pairs() {
        let mut best = 0.0;
        if edge_dist.has_edge(i, j) {
            for b in net.constraint(i, j).indices() {
                let p = edge_dist.probability(i, j, b).unwrap().as_f64();
                if p > best {
                    best = p;
                }
            }
        }
        sum += best;
    }
    sum
}

/// Find the scenario of `qcn` with maximum robustness under `edge_dist`.
/// Returns `None` exactly when `qcn` has no scenario. Ties go to the scenario
/// that enumeration order reaches first.
///
/// Branch and bound over the same search tree `solve` uses: nodes whose upper
/// bound cannot beat the incumbent are pruned. Scaling all probabilities of
/// one edge by a common positive factor shifts every scenario's score by the
/// same edge-wise amount, so the argmax is unaffected.
pub fn max_robust_scenario(
    qcn: &Qcn,
    edge_dist: &EdgeDistributions,
) -> Result<Option<RobustnessReport>> {
    check_dist_shape(edge_dist, qcn)?;
    let root = a_closure(qcn);
    if !root.consistent {
        return Ok(None);
    }
    let mut best: Option<(f64, Qcn)> = None;
    branch(root.closed_network, edge_dist, &mut best);
    match best {
        None => Ok(None),
        Some((_, net)) => Ok(Some(robustness(edge_dist, &net)?)),
    }
}

fn branch(net: Qcn, edge_dist: &EdgeDistributions, best: &mut Option<(f64, Qcn)>) {
    let upper = upper_sum(&net, edge_dist);
    if let Some((incumbent, _)) = best {
        if upper <= *incumbent {
            return;
        }
    }
    let Some((i, j)) = pick_branch_edge(&net) else {
        // Atomic: upper is the exact score. Strict improvement keeps the
        // first scenario in enumeration order among equals.
        if best.as_ref().map_or(true, |(s, _)| upper > *s) {
            *best = Some((upper, net));
        }
        return;
    };
    let values: Vec<usize> = net.constraint(i, j).indices().collect();
    for b in values {
        let mut child = net.clone();
        child.set_pair(i, j, Relation::single(child.calculus(), b));
        let (consistent, _) = close_from(&mut child, &[(i, j)]);
        if consistent {
            branch(child, edge_dist, best);
        }
    }
}

/// Reconcile evidence with hard background knowledge.
///
/// The background network is intersected into the evidence network edge by
/// edge; an edge that empties is a contradiction. Scenarios of the merged
/// network then determine, per edge, which base relations survive: each
/// constraint is tightened to the relations used by at least one scenario,
/// and each stored distribution is restricted to its surviving support and
/// renormalized proportionally. A distribution whose support shares nothing
/// with the surviving relations is a contradiction; a merged network with no
/// scenario at all is reported as such.
pub fn rectify(pq: &ProbabilisticQcn, background: &Qcn) -> Result<ProbabilisticQcn> {
    check_same(pq.qcn.calculus(), background.calculus())?;
    if pq.qcn.variables() != background.variables() {
        return Err(Error::VariableMismatch);
    }
    let edge_error = |i: usize, j: usize| Error::Contradiction {
        i: pq.qcn.variables()[i].clone(),
        j: pq.qcn.variables()[j].clone(),
    };

    let mut merged = pq.qcn.clone();
    for (i, j) in background.unordered_pairs() {
        merged.refine(i, j, background.constraint(i, j))?;
        if merged.constraint(i, j).is_empty() {
            return Err(edge_error(i, j));
        }
    }

    let scenarios = enumerate_scenarios(&merged, None);
    if scenarios.is_empty() {
        return Err(Error::NoScenario);
    }

    let mut rectified = merged.clone();
    let mut new_dist = EdgeDistributions::new(pq.qcn.calculus(), pq.qcn.var_count());
    for (i, j) in merged.unordered_pairs() {
        let mut scenario_bits = 0u64;
        for s in &scenarios {
            scenario_bits |= 1u64 << s.base_relation(i, j);
        }
        let mut kept_bits = scenario_bits;
        if let Some(dense) = pq.edge_dist.edge(i, j) {
            let support = pq.edge_dist.support(i, j).unwrap();
            kept_bits = support & scenario_bits;
            if kept_bits == 0 {
                return Err(edge_error(i, j));
            }
            new_dist.set_exact(i, j, renormalize(&dense, kept_bits, pq.source));
        }
        let kept = Relation::from_bits(rectified.calculus(), kept_bits)?;
        rectified.set_constraint(i, j, kept)?;
    }

    Ok(ProbabilisticQcn {
        qcn: rectified,
        edge_dist: new_dist,
        label_dist: pq.label_dist.clone(),
        source: pq.source,
    })
}

/// Zero out relations outside `kept_bits` and scale the survivors to sum
/// to 1. Exact values renormalize exactly; external floats divide by their
/// float sum.
fn renormalize(dense: &[Prob], kept_bits: u64, source: ProbabilitySource) -> Vec<Prob> {
    let kept = |b: usize| kept_bits & (1u64 << b) != 0;
    match source {
        ProbabilitySource::ScenarioDerived => {
            let mut sum = Rational::zero();
            for (b, p) in dense.iter().enumerate() {
                if kept(b) {
                    if let Prob::Exact(r) = p {
                        sum += r;
                    }
                }
            }
            debug_assert!(!sum.numer().is_zero());
            dense
                .iter()
                .enumerate()
                .map(|(b, p)| match (kept(b), p) {
                    (true, Prob::Exact(r)) => Prob::Exact(r / sum),
                    _ => Prob::Exact(Rational::zero()),
                })
                .collect()
        }
        ProbabilitySource::External => {
            let sum: f64 = dense
                .iter()
                .enumerate()
                .filter(|(b, _)| kept(*b))
                .map(|(_, p)| p.as_f64())
                .sum();
            dense
                .iter()
                .enumerate()
                .map(|(b, p)| {
                    if kept(b) {
                        Prob::Approx(p.as_f64() / sum)
                    } else {
                        Prob::zero_like(source)
                    }
                })
                .collect()
        }
    }
}
