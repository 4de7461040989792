//! Pieces shared by the exact and SEQ planners.

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{marginals, IdpModel, IncentiveRanges, JointPrior, Offer, Outcome};

/// Relative tolerance below which two option values count as tied.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// What a planner does at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    /// An informative offer; the response moves the belief to a new node.
    Probe(Offer),
    /// A guaranteed-accept offer repeated for every remaining step.
    Commit(Offer),
}

impl Decision {
    pub fn offer(&self) -> Offer {
        match *self {
            Decision::Probe(o) | Decision::Commit(o) => o,
        }
    }

    pub fn is_commit(&self) -> bool {
        matches!(self, Decision::Commit(_))
    }
}

/// Optimal value at a node together with the decision achieving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub value: f64,
    pub decision: Decision,
}

/// Finite horizon `H` or discounted infinite horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

/// Sort key for tie-breaking: lower incentive, then lower action, then
/// probes before commits.
fn tie_key(d: &Decision) -> (usize, usize, bool) {
    let o = d.offer();
    (o.incentive, o.action, d.is_commit())
}

/// Picks the minimum-value option, breaking near-ties by [`tie_key`].
pub(crate) fn select(options: &[PlanResult]) -> PlanResult {
    let min = options.iter().map(|o| o.value).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOL * min.abs().max(1.0);
    *options
        .iter()
        .filter(|o| o.value <= min + tol)
        .min_by_key(|o| tie_key(&o.decision))
        .expect("at least one option")
}

/// Cheapest guaranteed-accept offer: `argmin_n c_n + δ_{e_n}`.
pub(crate) fn best_commit(model: &IdpModel, ranges: &IncentiveRanges) -> (Offer, f64) {
    let mut best: Option<(Offer, f64)> = None;
    for n in 0..ranges.n_actions() {
        let offer = Offer::new(n, ranges.get(n).1);
        let cost = model.accept_cost(offer);
        let better = match best {
            None => true,
            Some((b, c)) => cost < c || (cost == c && offer.incentive < b.incentive),
        };
        if better {
            best = Some((offer, cost));
        }
    }
    best.expect("at least one action")
}

/// Accept/reject probabilities of every offer at one node, per action.
#[derive(Debug)]
pub(crate) struct NodeBelief {
    /// `head[n][k]`: probability of accepting `δ_k` for `a_n`.
    pub head: Vec<Vec<f64>>,
    /// `tail[n][k]`: probability of rejecting `δ_k` for `a_n`.
    pub tail: Vec<Vec<f64>>,
}

impl NodeBelief {
    pub fn outcome_probability(&self, offer: Offer, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Accept => self.head[offer.action][offer.incentive],
            Outcome::Reject => self.tail[offer.action][offer.incentive],
        }
    }
}

/// Memoized marginals keyed by the range box.
pub(crate) struct BeliefCache<'a> {
    prior: &'a JointPrior,
    nodes: HashMap<IncentiveRanges, Rc<NodeBelief>>,
}

impl<'a> BeliefCache<'a> {
    pub fn new(prior: &'a JointPrior) -> Self {
        Self { prior, nodes: HashMap::new() }
    }

    pub fn get(&mut self, ranges: &IncentiveRanges) -> Result<Rc<NodeBelief>> {
        if let Some(b) = self.nodes.get(ranges) {
            return Ok(Rc::clone(b));
        }
        let beliefs = marginals(self.prior, ranges)?;
        let k = self.prior.n_incentives();
        let mut head = Vec::with_capacity(beliefs.len());
        let mut tail = Vec::with_capacity(beliefs.len());
        for b in beliefs {
            // Head and tail are summed separately so that a branch with no
            // prior mass gets probability exactly zero.
            let mut h = vec![0.0; k];
            let mut acc = 0.0;
            for (i, p) in b.probs.iter().enumerate() {
                acc += p;
                h[i] = acc;
            }
            let mut t = vec![0.0; k];
            let mut acc = 0.0;
            for i in (0..k).rev() {
                t[i] = acc;
                acc += b.probs[i];
            }
            head.push(h);
            tail.push(t);
        }
        let node = Rc::new(NodeBelief { head, tail });
        self.nodes.insert(ranges.clone(), Rc::clone(&node));
        Ok(node)
    }
}
