//! Sequential (cost-ordered) restriction of the belief MDP.
//!
//! A sequential policy may only probe action `a_n` once the thresholds of
//! every cheaper action `a_1..a_{n-1}` are known exactly. The state is then
//! the probe index, the cheapest resolved pair so far, the probe action's
//! index interval, and whatever part of the resolved prefix conditions the
//! belief over `t_n`. This keeps the state space polynomial in `N` and `K`
//! at the price of a bounded loss against the unrestricted optimum.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{IdpError, Result};
use crate::model::{IdpModel, IncentiveRanges, JointPrior, Offer, Outcome};
use crate::plan::{select, BeliefCache, Decision, Horizon, PlanResult};
use crate::sim::Decider;

/// Progress of a sequential policy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeqState {
    /// Action currently being probed; equals `N` once every action is resolved.
    probe: usize,
    /// Cheapest resolved `(action, incentive)` pair.
    best: Option<(usize, usize)>,
    /// Index interval of the probe action's threshold.
    range: (usize, usize),
    /// Resolved thresholds `t_1..t_{probe-1}`.
    resolved: Vec<usize>,
}

impl SeqState {
    pub fn initial(model: &IdpModel) -> Self {
        let state = Self { probe: 0, best: None, range: (0, model.n_incentives() - 1), resolved: Vec::new() };
        state.settle(model)
    }

    pub fn probe_action(&self) -> usize {
        self.probe
    }

    pub fn best_pair(&self) -> Option<Offer> {
        self.best.map(|(b, v)| Offer::new(b, v))
    }

    pub fn probe_range(&self) -> (usize, usize) {
        self.range
    }

    pub fn resolved(&self) -> &[usize] {
        &self.resolved
    }

    pub fn is_done(&self, model: &IdpModel) -> bool {
        self.probe >= model.n_actions()
    }

    /// The equivalent box over all actions: resolved actions are collapsed,
    /// later actions are capped by the probe's upper bound.
    pub fn full_ranges(&self, model: &IdpModel) -> IncentiveRanges {
        let n = model.n_actions();
        let mut ranges: Vec<(usize, usize)> = self.resolved.iter().map(|&t| (t, t)).collect();
        if self.probe < n {
            ranges.push(self.range);
            ranges.extend(std::iter::repeat_n((0, self.range.1), n - self.probe - 1));
        }
        IncentiveRanges::new(ranges, model.n_incentives()).expect("sequential state is a valid box")
    }

    /// Moves past every action whose interval has collapsed.
    fn settle(mut self, model: &IdpModel) -> Self {
        let n = model.n_actions();
        while self.probe < n && self.range.0 == self.range.1 {
            let t = self.range.0;
            let cost = model.accept_cost(Offer::new(self.probe, t));
            let improves = match self.best {
                None => true,
                Some((b, v)) => cost < model.accept_cost(Offer::new(b, v)),
            };
            if improves {
                self.best = Some((self.probe, t));
            }
            self.resolved.push(t);
            self.probe += 1;
            self.range = (0, t);
        }
        if self.probe >= n {
            self.range = (0, 0);
        }
        self
    }

    /// State after observing the response to a probe of the current action.
    pub fn after(&self, model: &IdpModel, incentive: usize, outcome: Outcome) -> Result<Self> {
        let (lo, hi) = self.range;
        let range = match outcome {
            Outcome::Accept => (lo, hi.min(incentive)),
            Outcome::Reject => (lo.max(incentive + 1), hi),
        };
        if range.0 > range.1 {
            return Err(IdpError::InconsistentObservation { action: self.probe + 1 });
        }
        let next = Self { range, ..self.clone() };
        Ok(next.settle(model))
    }

    fn key(&self, markov: bool, done: bool) -> SeqKey {
        let context = if done {
            Vec::new()
        } else if markov {
            self.resolved.last().copied().into_iter().collect()
        } else {
            self.resolved.clone()
        };
        SeqKey { probe: self.probe, best: self.best, range: self.range, context }
    }
}

/// Memo key: the belief over the probe threshold is conditioned on `context`,
/// which is `t_{n-1}` alone for Markov-chain priors and the full resolved
/// prefix otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct SeqKey {
    probe: usize,
    best: Option<(usize, usize)>,
    range: (usize, usize),
    context: Vec<usize>,
}

/// Solved table of the sequential restriction.
#[derive(Debug, Clone)]
pub struct SeqSolution {
    model: IdpModel,
    horizon: Horizon,
    markov: bool,
    root: PlanResult,
    table: HashMap<(SeqKey, usize), PlanResult>,
}

impl SeqSolution {
    pub fn model(&self) -> &IdpModel {
        &self.model
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn root(&self) -> PlanResult {
        self.root
    }

    /// Whether the compact `t_{n-1}` memo key was used.
    pub fn uses_markov_key(&self) -> bool {
        self.markov
    }

    pub fn lookup(&self, state: &SeqState, remaining: usize) -> Option<&PlanResult> {
        let h = match self.horizon {
            Horizon::Finite(_) => remaining,
            Horizon::Infinite => 0,
        };
        let key = state.key(self.markov, state.is_done(&self.model));
        self.table.get(&(key, h))
    }

    /// Number of distinct sequential states the solve touched.
    pub fn state_count(&self) -> usize {
        self.table.keys().map(|(k, _)| k).collect::<HashSet<_>>().len()
    }

    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    pub fn policy(self: &Arc<Self>) -> SeqPolicy {
        SeqPolicy::new(Arc::clone(self))
    }
}

struct SeqSolver<'a> {
    model: &'a IdpModel,
    beliefs: BeliefCache<'a>,
    table: HashMap<(SeqKey, usize), PlanResult>,
    markov: bool,
    infinite: bool,
}

impl SeqSolver<'_> {
    fn horizon_factor(&self, h: usize) -> f64 {
        if self.infinite {
            1.0 / (1.0 - self.model.discount())
        } else {
            h as f64
        }
    }

    fn value(&mut self, state: &SeqState, h: usize) -> Result<f64> {
        if !self.infinite && h == 0 {
            return Ok(0.0);
        }
        let done = state.is_done(self.model);
        let key = (state.key(self.markov, done), h);
        if let Some(r) = self.table.get(&key) {
            return Ok(r.value);
        }
        let factor = self.horizon_factor(h);
        let best_commit = state.best_pair().map(|o| PlanResult {
            value: factor * self.model.accept_cost(o),
            decision: Decision::Commit(o),
        });

        let result = if done {
            best_commit.expect("a finished sequential state has a best pair")
        } else {
            let gamma = self.model.discount();
            let n = state.probe;
            let (lo, hi) = state.range;
            let probe_commit = Offer::new(n, hi);
            let mut options = vec![PlanResult {
                value: factor * self.model.accept_cost(probe_commit),
                decision: Decision::Commit(probe_commit),
            }];
            options.extend(best_commit);

            let belief = self.beliefs.get(&state.full_ranges(self.model))?;
            let next_h = if self.infinite { 0 } else { h - 1 };
            for k in lo..hi {
                let offer = Offer::new(n, k);
                let mut q = 0.0;
                for outcome in [Outcome::Accept, Outcome::Reject] {
                    let p = belief.outcome_probability(offer, outcome);
                    if p == 0.0 {
                        continue;
                    }
                    let next = state.after(self.model, k, outcome)?;
                    let cont = self.value(&next, next_h)?;
                    q += p * (self.model.step_cost(offer, outcome) + gamma * cont);
                }
                options.push(PlanResult { value: q, decision: Decision::Probe(offer) });
            }
            select(&options)
        };
        self.table.insert(key, result);
        Ok(result.value)
    }
}

fn solve_seq(model: &IdpModel, prior: &JointPrior, horizon: Horizon) -> Result<SeqSolution> {
    prior.check_model(model)?;
    let markov = prior.is_markov_chain();
    let infinite = matches!(horizon, Horizon::Infinite);
    let h = match horizon {
        Horizon::Finite(h) => h,
        Horizon::Infinite => 0,
    };
    let mut solver = SeqSolver { model, beliefs: BeliefCache::new(prior), table: HashMap::new(), markov, infinite };
    let start = SeqState::initial(model);
    solver.value(&start, h)?;
    let root = solver.table[&(start.key(markov, start.is_done(model)), h)];
    Ok(SeqSolution { model: model.clone(), horizon, markov, root, table: solver.table })
}

/// Optimal undiscounted sequential policy for `horizon` interactions.
pub fn solve_seq_finite(model: &IdpModel, prior: &JointPrior, horizon: usize) -> Result<SeqSolution> {
    if horizon < 1 {
        return Err(IdpError::InvalidHorizon);
    }
    if model.discount() < 1.0 {
        return Err(IdpError::DiscountedFiniteUnsupported(model.discount()));
    }
    solve_seq(model, prior, Horizon::Finite(horizon))
}

/// Optimal discounted infinite-horizon sequential policy.
pub fn solve_seq_infinite(model: &IdpModel, prior: &JointPrior) -> Result<SeqSolution> {
    if model.discount() >= 1.0 {
        return Err(IdpError::UndiscountedInfinite);
    }
    solve_seq(model, prior, Horizon::Infinite)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundDirection {
    /// Probe from the cheapest action `a_1` upward.
    Forward,
    /// Probe from the most expensive action `a_N` downward.
    Reverse,
}

/// Additive gap guaranteed between the sequential and the unrestricted optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeqBound {
    pub slack: f64,
    pub direction: BoundDirection,
}

/// `Σ_k (δ_k - δ_1) + N (c_{N+1} - c_1)`.
pub fn seq_bound(model: &IdpModel) -> SeqBound {
    let d1 = model.incentive(0);
    let incentive_slack: f64 = model.incentives().iter().map(|d| d - d1).sum();
    let reject_slack = model.n_actions() as f64 * (model.default_cost() - model.action_cost(0));
    SeqBound { slack: incentive_slack + reject_slack, direction: BoundDirection::Forward }
}

/// `K (c_{N+1} - c_1) + Σ_i (c_N - c_i)`.
pub fn seq_bound_alt(model: &IdpModel) -> SeqBound {
    let c_n = model.action_cost(model.n_actions() - 1);
    let reject_slack = model.n_incentives() as f64 * (model.default_cost() - model.action_cost(0));
    let action_slack: f64 = model.action_costs().iter().map(|c| c_n - c).sum();
    SeqBound { slack: reject_slack + action_slack, direction: BoundDirection::Reverse }
}

/// Executes a [`SeqSolution`] as a [`Decider`].
#[derive(Debug, Clone)]
pub struct SeqPolicy {
    solution: Arc<SeqSolution>,
    state: SeqState,
    committed: Option<Offer>,
}

impl SeqPolicy {
    pub fn new(solution: Arc<SeqSolution>) -> Self {
        let state = SeqState::initial(&solution.model);
        Self { solution, state, committed: None }
    }

    pub fn state(&self) -> &SeqState {
        &self.state
    }
}

impl Decider for SeqPolicy {
    fn reset(&mut self) {
        self.state = SeqState::initial(&self.solution.model);
        self.committed = None;
    }

    fn decide(&mut self, remaining: usize) -> Result<Offer> {
        if let Some(offer) = self.committed {
            return Ok(offer);
        }
        let entry = self
            .solution
            .lookup(&self.state, remaining)
            .ok_or(IdpError::UnreachableNode)?;
        if let Decision::Commit(offer) = entry.decision {
            self.committed = Some(offer);
        }
        Ok(entry.decision.offer())
    }

    fn observe(&mut self, offer: Offer, outcome: Outcome) -> Result<()> {
        if self.committed.is_some() {
            return match outcome {
                Outcome::Accept => Ok(()),
                Outcome::Reject => Err(IdpError::InconsistentObservation { action: offer.action + 1 }),
            };
        }
        if offer.action != self.state.probe {
            return Err(IdpError::UnreachableNode);
        }
        self.state = self.state.after(&self.solution.model, offer.incentive, outcome)?;
        Ok(())
    }
}

/// The sweep used to prove the additive bound: descend incentives on `a_1`
/// from `δ_K` until the first reject, move to the next action starting one
/// step below the resolved threshold, and finally repeat the cheapest
/// resolved pair.
#[derive(Debug, Clone)]
pub struct DescendingSweepPolicy {
    model: Arc<IdpModel>,
    action: usize,
    next_incentive: usize,
    resolved: Vec<usize>,
    best: Option<Offer>,
}

impl DescendingSweepPolicy {
    pub fn new(model: Arc<IdpModel>) -> Self {
        let next_incentive = model.n_incentives() - 1;
        Self { model, action: 0, next_incentive, resolved: Vec::new(), best: None }
    }

    fn resolve(&mut self, threshold: usize) {
        let offer = Offer::new(self.action, threshold);
        let improves = self
            .best
            .is_none_or(|b| self.model.accept_cost(offer) < self.model.accept_cost(b));
        if improves {
            self.best = Some(offer);
        }
        self.resolved.push(threshold);
        self.action += 1;
    }

    fn finished(&self) -> bool {
        self.action >= self.model.n_actions()
    }
}

impl Decider for DescendingSweepPolicy {
    fn reset(&mut self) {
        *self = Self::new(Arc::clone(&self.model));
    }

    fn decide(&mut self, _remaining: usize) -> Result<Offer> {
        Ok(match self.best.filter(|_| self.finished()) {
            Some(best) => best,
            None => Offer::new(self.action, self.next_incentive),
        })
    }

    fn observe(&mut self, offer: Offer, outcome: Outcome) -> Result<()> {
        if self.finished() {
            return match outcome {
                Outcome::Accept => Ok(()),
                Outcome::Reject => Err(IdpError::InconsistentObservation { action: offer.action + 1 }),
            };
        }
        let k = offer.incentive;
        match outcome {
            Outcome::Accept if k == 0 => {
                // t_n is the lowest incentive, hence so is every later threshold.
                while !self.finished() {
                    self.resolve(0);
                }
            }
            Outcome::Accept => self.next_incentive = k - 1,
            Outcome::Reject => {
                if k + 1 >= self.model.n_incentives() {
                    return Err(IdpError::InconsistentObservation { action: offer.action + 1 });
                }
                self.resolve(k + 1);
                self.next_incentive = k;
            }
        }
        Ok(())
    }
}
