//! Comparison policies: one-step greedy and diagnose-and-act.

use std::sync::Arc;

use crate::error::Result;
use crate::model::{marginals, BeliefVector, IdpModel, IncentiveRanges, JointPrior, Offer, Outcome};
use crate::plan::{select, Decision, PlanResult};
use crate::sim::Decider;

/// Expected cost of a single interaction given the current marginal of the
/// offered action.
pub fn expected_immediate_cost(model: &IdpModel, belief: &BeliefVector, offer: Offer) -> f64 {
    let p_accept = belief.accept_probability(offer.incentive);
    let p_reject = belief.reject_probability(offer.incentive);
    p_accept * model.accept_cost(offer) + p_reject * model.default_cost()
}

/// The offer minimizing expected immediate cost over `k ∈ [s_n, e_n]` and
/// all actions, ties going to the lower incentive and then the lower action.
pub fn greedy_decide(model: &IdpModel, prior: &JointPrior, ranges: &IncentiveRanges) -> Result<Offer> {
    let beliefs = marginals(prior, ranges)?;
    let mut options = Vec::new();
    for (n, belief) in beliefs.iter().enumerate() {
        let (s, e) = ranges.get(n);
        for k in s..=e {
            let offer = Offer::new(n, k);
            options.push(PlanResult {
                value: expected_immediate_cost(model, belief, offer),
                decision: Decision::Probe(offer),
            });
        }
    }
    Ok(select(&options).decision.offer())
}

/// Re-evaluates [`greedy_decide`] on the updated ranges every step.
#[derive(Debug, Clone)]
pub struct GreedyPolicy {
    model: Arc<IdpModel>,
    prior: Arc<JointPrior>,
    ranges: IncentiveRanges,
}

impl GreedyPolicy {
    pub fn new(model: Arc<IdpModel>, prior: Arc<JointPrior>) -> Self {
        let ranges = IncentiveRanges::full(model.n_actions(), model.n_incentives());
        Self { model, prior, ranges }
    }

    pub fn ranges(&self) -> &IncentiveRanges {
        &self.ranges
    }
}

impl Decider for GreedyPolicy {
    fn reset(&mut self) {
        self.ranges = IncentiveRanges::full(self.model.n_actions(), self.model.n_incentives());
    }

    fn decide(&mut self, _remaining: usize) -> Result<Offer> {
        greedy_decide(&self.model, &self.prior, &self.ranges)
    }

    fn observe(&mut self, offer: Offer, outcome: Outcome) -> Result<()> {
        self.ranges = self.ranges.update(offer, outcome)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaaPhase {
    /// Binary search on the threshold of this action.
    Diagnosing(usize),
    /// Every threshold is known; repeat the cheapest pair.
    Acting(Offer),
}

/// Diagnose-and-act: binary-search each threshold in action order, then
/// commit to the cheapest identified pair for the rest of the episode.
#[derive(Debug, Clone)]
pub struct DaaPolicy {
    model: Arc<IdpModel>,
    ranges: IncentiveRanges,
    phase: DaaPhase,
}

impl DaaPolicy {
    pub fn new(model: Arc<IdpModel>) -> Self {
        let ranges = IncentiveRanges::full(model.n_actions(), model.n_incentives());
        let mut policy = Self { model, ranges, phase: DaaPhase::Diagnosing(0) };
        policy.advance(0);
        policy
    }

    pub fn phase(&self) -> DaaPhase {
        self.phase
    }

    pub fn ranges(&self) -> &IncentiveRanges {
        &self.ranges
    }

    fn advance(&mut self, from: usize) {
        let n_actions = self.model.n_actions();
        let next = (from..n_actions).find(|&n| !self.ranges.is_collapsed(n));
        self.phase = match next {
            Some(n) => DaaPhase::Diagnosing(n),
            None => {
                let mut best = Offer::new(0, self.ranges.get(0).0);
                for n in 1..n_actions {
                    let cand = Offer::new(n, self.ranges.get(n).0);
                    let (c, b) = (self.model.accept_cost(cand), self.model.accept_cost(best));
                    if c < b || (c == b && cand.incentive < best.incentive) {
                        best = cand;
                    }
                }
                DaaPhase::Acting(best)
            }
        };
    }
}

impl Decider for DaaPolicy {
    fn reset(&mut self) {
        *self = Self::new(Arc::clone(&self.model));
    }

    fn decide(&mut self, _remaining: usize) -> Result<Offer> {
        Ok(match self.phase {
            DaaPhase::Diagnosing(n) => {
                let (lo, hi) = self.ranges.get(n);
                Offer::new(n, (lo + hi) / 2)
            }
            DaaPhase::Acting(offer) => offer,
        })
    }

    fn observe(&mut self, offer: Offer, outcome: Outcome) -> Result<()> {
        self.ranges = self.ranges.update(offer, outcome)?;
        if let DaaPhase::Diagnosing(n) = self.phase {
            self.advance(n);
        }
        Ok(())
    }
}
