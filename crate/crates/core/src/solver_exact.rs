//! Optimal planning on the range-box belief MDP.
//!
//! Each node is an [`IncentiveRanges`] box; an informative offer moves to one
//! of two strictly smaller boxes, and the only other option worth considering
//! is to commit to the cheapest guaranteed-accept pair for the rest of the
//! horizon. No node is revisited, so a single memoized depth-first pass
//! computes the optimum.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::error::{IdpError, Result};
use crate::model::{posterior_support_mass, IdpModel, IncentiveRanges, JointPrior, Offer, Outcome};
use crate::plan::{best_commit, select, BeliefCache, Decision, Horizon, PlanResult};
use crate::sim::Decider;

/// Solved value/decision table of the exact belief MDP.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    model: IdpModel,
    horizon: Horizon,
    start: IncentiveRanges,
    root: PlanResult,
    table: HashMap<(IncentiveRanges, usize), PlanResult>,
}

impl ExactSolution {
    pub fn model(&self) -> &IdpModel {
        &self.model
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    /// Value and decision at the start node (the full box unless solved
    /// with one of the `*_from` variants).
    pub fn root(&self) -> PlanResult {
        self.root
    }

    pub fn start(&self) -> &IncentiveRanges {
        &self.start
    }

    /// Entry for `ranges` with `remaining` steps to go. The remaining count
    /// is ignored for infinite-horizon solutions.
    pub fn lookup(&self, ranges: &IncentiveRanges, remaining: usize) -> Option<&PlanResult> {
        let h = match self.horizon {
            Horizon::Finite(_) => remaining,
            Horizon::Infinite => 0,
        };
        self.table.get(&(ranges.clone(), h))
    }

    /// Number of memoized `(node, remaining)` entries.
    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    /// Number of distinct belief nodes the solve touched.
    pub fn node_count(&self) -> usize {
        self.table.keys().map(|(r, _)| r).collect::<HashSet<_>>().len()
    }

    pub fn policy(self: &Arc<Self>) -> ExactPolicy {
        ExactPolicy::new(Arc::clone(self))
    }
}

struct Solver<'a> {
    model: &'a IdpModel,
    beliefs: BeliefCache<'a>,
    table: HashMap<(IncentiveRanges, usize), PlanResult>,
    infinite: bool,
}

impl Solver<'_> {
    fn value(&mut self, ranges: &IncentiveRanges, h: usize) -> Result<f64> {
        if !self.infinite && h == 0 {
            return Ok(0.0);
        }
        let key = (ranges.clone(), h);
        if let Some(r) = self.table.get(&key) {
            return Ok(r.value);
        }
        let gamma = self.model.discount();
        let belief = self.beliefs.get(ranges)?;

        let (commit, commit_cost) = best_commit(self.model, ranges);
        let commit_value = if self.infinite {
            commit_cost / (1.0 - gamma)
        } else {
            h as f64 * commit_cost
        };
        let mut options = vec![PlanResult { value: commit_value, decision: Decision::Commit(commit) }];

        let next_h = if self.infinite { 0 } else { h - 1 };
        for n in 0..ranges.n_actions() {
            let (s, e) = ranges.get(n);
            for k in s..e {
                let offer = Offer::new(n, k);
                let mut q = 0.0;
                for outcome in [Outcome::Accept, Outcome::Reject] {
                    let p = belief.outcome_probability(offer, outcome);
                    if p == 0.0 {
                        continue;
                    }
                    let next = ranges.update(offer, outcome)?;
                    let cont = self.value(&next, next_h)?;
                    q += p * (self.model.step_cost(offer, outcome) + gamma * cont);
                }
                options.push(PlanResult { value: q, decision: Decision::Probe(offer) });
            }
        }
        let best = select(&options);
        self.table.insert(key, best);
        Ok(best.value)
    }
}

fn solve(
    model: &IdpModel,
    prior: &JointPrior,
    start: IncentiveRanges,
    horizon: Horizon,
) -> Result<ExactSolution> {
    prior.check_model(model)?;
    if start.n_actions() != model.n_actions() {
        return Err(IdpError::InvalidRanges("range count differs from N".into()));
    }
    let infinite = matches!(horizon, Horizon::Infinite);
    let h = match horizon {
        Horizon::Finite(h) => h,
        Horizon::Infinite => 0,
    };
    let mut solver = Solver { model, beliefs: BeliefCache::new(prior), table: HashMap::new(), infinite };
    solver.value(&start, h)?;
    let root = solver.table[&(start.clone(), h)];
    Ok(ExactSolution { model: model.clone(), horizon, start, root, table: solver.table })
}

fn full_box(model: &IdpModel) -> IncentiveRanges {
    IncentiveRanges::full(model.n_actions(), model.n_incentives())
}

/// Optimal undiscounted policy for `horizon` interactions.
pub fn solve_finite(model: &IdpModel, prior: &JointPrior, horizon: usize) -> Result<ExactSolution> {
    solve_finite_from(model, prior, full_box(model), horizon)
}

/// As [`solve_finite`], starting from an already narrowed box.
pub fn solve_finite_from(
    model: &IdpModel,
    prior: &JointPrior,
    start: IncentiveRanges,
    horizon: usize,
) -> Result<ExactSolution> {
    if horizon < 1 {
        return Err(IdpError::InvalidHorizon);
    }
    if model.discount() < 1.0 {
        return Err(IdpError::DiscountedFiniteUnsupported(model.discount()));
    }
    solve(model, prior, start, Horizon::Finite(horizon))
}

/// Optimal stationary policy for the discounted infinite horizon.
pub fn solve_infinite(model: &IdpModel, prior: &JointPrior) -> Result<ExactSolution> {
    solve_infinite_from(model, prior, full_box(model))
}

pub fn solve_infinite_from(
    model: &IdpModel,
    prior: &JointPrior,
    start: IncentiveRanges,
) -> Result<ExactSolution> {
    if model.discount() >= 1.0 {
        return Err(IdpError::UndiscountedInfinite);
    }
    solve(model, prior, start, Horizon::Infinite)
}

/// Breadth-first closure of the range update over every informative offer,
/// keeping only outcomes with positive prior mass.
pub fn reachable_nodes(model: &IdpModel, prior: &JointPrior) -> Vec<IncentiveRanges> {
    let root = IncentiveRanges::full(model.n_actions(), model.n_incentives());
    let mut seen = HashSet::from([root.clone()]);
    let mut order = vec![root.clone()];
    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        for n in 0..node.n_actions() {
            let (s, e) = node.get(n);
            for k in s..e {
                for outcome in [Outcome::Accept, Outcome::Reject] {
                    let Ok(next) = node.update(Offer::new(n, k), outcome) else {
                        continue;
                    };
                    if !seen.contains(&next) && posterior_support_mass(prior, &next) > 0.0 {
                        seen.insert(next.clone());
                        order.push(next.clone());
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    order
}

pub fn enumerate_reachable_states(model: &IdpModel, prior: &JointPrior) -> usize {
    reachable_nodes(model, prior).len()
}

/// Executes a solved [`ExactSolution`] as a [`Decider`].
#[derive(Debug, Clone)]
pub struct ExactPolicy {
    solution: Arc<ExactSolution>,
    ranges: IncentiveRanges,
    committed: Option<Offer>,
}

impl ExactPolicy {
    pub fn new(solution: Arc<ExactSolution>) -> Self {
        let ranges = solution.start.clone();
        Self { solution, ranges, committed: None }
    }

    pub fn ranges(&self) -> &IncentiveRanges {
        &self.ranges
    }
}

impl Decider for ExactPolicy {
    fn reset(&mut self) {
        self.ranges = self.solution.start.clone();
        self.committed = None;
    }

    fn decide(&mut self, remaining: usize) -> Result<Offer> {
        if let Some(offer) = self.committed {
            return Ok(offer);
        }
        let entry = self
            .solution
            .lookup(&self.ranges, remaining)
            .ok_or(IdpError::UnreachableNode)?;
        if let Decision::Commit(offer) = entry.decision {
            self.committed = Some(offer);
        }
        Ok(entry.decision.offer())
    }

    fn observe(&mut self, offer: Offer, outcome: Outcome) -> Result<()> {
        self.ranges = self.ranges.update(offer, outcome)?;
        Ok(())
    }
}
