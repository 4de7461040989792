//! Brute-force references for checking the planners.
//!
//! Nothing here uses the planners' shortcuts: [`expectimax_value`] conditions
//! the prior table on the raw offer/response history at every node, and
//! [`full_dp_value`] allows every offer (informative or not) at every step.

use std::collections::HashMap;

use crate::error::{IdpError, Result};
use crate::model::{marginals, IdpModel, IncentiveRanges, JointPrior, Offer, Outcome, TrueIncentives};
use crate::sim::{respond, run_episode, Decider};

/// Largest `K^N (N K)^H` accepted by [`expectimax_value`].
pub const EXPECTIMAX_LIMIT: u128 = 10_000_000;

/// Largest number of belief nodes accepted by [`full_dp_value`].
pub const FULL_DP_NODE_LIMIT: u128 = 1_000_000;

/// Which offers the expectimax oracle searches at each history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfferSet {
    /// All `N K` offers.
    All,
    /// Per action, offers whose response is still uncertain plus the
    /// cheapest certain accept. Every other offer is dominated.
    Undominated,
}

struct Expectimax<'a> {
    model: &'a IdpModel,
    prior: &'a JointPrior,
    offers: OfferSet,
}

impl Expectimax<'_> {
    /// Prior tuples consistent with the history, with their weights.
    fn condition(&self, history: &[(Offer, Outcome)]) -> Vec<(TrueIncentives, f64)> {
        let k = self.prior.n_incentives();
        self.prior
            .entries()
            .filter(|&(_, w)| w > 0.0)
            .map(|(t, w)| (TrueIncentives::new(t.to_vec(), k).expect("prior tuples are valid"), w))
            .filter(|(t, _)| history.iter().all(|&(o, r)| respond(t, o) == r))
            .collect()
    }

    fn candidate_offers(&self, support: &[(TrueIncentives, f64)]) -> Vec<Offer> {
        let (n_actions, k) = (self.model.n_actions(), self.model.n_incentives());
        match self.offers {
            OfferSet::All => (0..n_actions)
                .flat_map(|n| (0..k).map(move |i| Offer::new(n, i)))
                .collect(),
            OfferSet::Undominated => (0..n_actions)
                .flat_map(|n| {
                    let lo = support.iter().map(|(t, _)| t.threshold(n)).min().unwrap_or(0);
                    let hi = support.iter().map(|(t, _)| t.threshold(n)).max().unwrap_or(0);
                    (lo..=hi).map(move |i| Offer::new(n, i))
                })
                .collect(),
        }
    }

    fn value(&self, history: &mut Vec<(Offer, Outcome)>, h: usize) -> f64 {
        if h == 0 {
            return 0.0;
        }
        let support = self.condition(history);
        let total: f64 = support.iter().map(|(_, w)| w).sum();
        let gamma = self.model.discount();
        let mut best = f64::INFINITY;
        for offer in self.candidate_offers(&support) {
            let accept_mass: f64 = support
                .iter()
                .filter(|(t, _)| respond(t, offer) == Outcome::Accept)
                .map(|(_, w)| w)
                .sum();
            let reject_mass: f64 = support
                .iter()
                .filter(|(t, _)| respond(t, offer) == Outcome::Reject)
                .map(|(_, w)| w)
                .sum();
            let mut q = 0.0;
            for (outcome, mass) in [(Outcome::Accept, accept_mass), (Outcome::Reject, reject_mass)] {
                if mass == 0.0 {
                    continue;
                }
                history.push((offer, outcome));
                let cont = self.value(history, h - 1);
                history.pop();
                q += mass / total * (self.model.step_cost(offer, outcome) + gamma * cont);
            }
            best = best.min(q);
        }
        best
    }
}

fn expectimax_size(model: &IdpModel, horizon: usize) -> u128 {
    let (n, k) = (model.n_actions() as u128, model.n_incentives() as u128);
    let states = k.saturating_pow(n as u32);
    states.saturating_mul((n * k).saturating_pow(horizon as u32))
}

/// Optimal expected discounted cost over `horizon` steps by exhaustive
/// search over offer/response histories.
pub fn expectimax_value_with(
    model: &IdpModel,
    prior: &JointPrior,
    horizon: usize,
    offers: OfferSet,
) -> Result<f64> {
    prior.check_model(model)?;
    let size = expectimax_size(model, horizon);
    if size > EXPECTIMAX_LIMIT {
        return Err(IdpError::InstanceTooLarge { size, limit: EXPECTIMAX_LIMIT });
    }
    let search = Expectimax { model, prior, offers };
    Ok(search.value(&mut Vec::with_capacity(horizon), horizon))
}

pub fn expectimax_value(model: &IdpModel, prior: &JointPrior, horizon: usize) -> Result<f64> {
    expectimax_value_with(model, prior, horizon, OfferSet::All)
}

/// Largest `horizon * |prior support|` accepted by [`posterior_expectimax_value`].
pub const POSTERIOR_EXPECTIMAX_LIMIT: u128 = 10_000_000;

struct PosteriorSearch<'a> {
    model: &'a IdpModel,
    tuples: Vec<(TrueIncentives, f64)>,
    memo: HashMap<(Vec<u64>, usize), f64>,
}

impl PosteriorSearch<'_> {
    fn value(&mut self, support: &[u64], h: usize) -> f64 {
        if h == 0 {
            return 0.0;
        }
        if let Some(&v) = self.memo.get(&(support.to_vec(), h)) {
            return v;
        }
        let live: Vec<usize> = (0..self.tuples.len())
            .filter(|&i| support[i / 64] >> (i % 64) & 1 == 1)
            .collect();
        let total: f64 = live.iter().map(|&i| self.tuples[i].1).sum();
        let gamma = self.model.discount();
        let mut best = f64::INFINITY;
        for n in 0..self.model.n_actions() {
            for k in 0..self.model.n_incentives() {
                let offer = Offer::new(n, k);
                let mut q = 0.0;
                for outcome in [Outcome::Accept, Outcome::Reject] {
                    let mut next = vec![0u64; support.len()];
                    let mut mass = 0.0;
                    for &i in &live {
                        if respond(&self.tuples[i].0, offer) == outcome {
                            next[i / 64] |= 1 << (i % 64);
                            mass += self.tuples[i].1;
                        }
                    }
                    if mass == 0.0 {
                        continue;
                    }
                    let cont = self.value(&next, h - 1);
                    q += mass / total * (self.model.step_cost(offer, outcome) + gamma * cont);
                }
                best = best.min(q);
            }
        }
        self.memo.insert((support.to_vec(), h), best);
        best
    }
}

/// Same optimum as [`expectimax_value`] with all offers, memoized on the set
/// of prior tuples consistent with the history. Histories that leave the same
/// consistent set share a subproblem, so long horizons stay tractable.
pub fn posterior_expectimax_value(model: &IdpModel, prior: &JointPrior, horizon: usize) -> Result<f64> {
    prior.check_model(model)?;
    let k = prior.n_incentives();
    let tuples: Vec<(TrueIncentives, f64)> = prior
        .entries()
        .filter(|&(_, w)| w > 0.0)
        .map(|(t, w)| Ok((TrueIncentives::new(t.to_vec(), k)?, w)))
        .collect::<Result<_>>()?;
    let size = (horizon as u128).saturating_mul(tuples.len() as u128);
    if size > POSTERIOR_EXPECTIMAX_LIMIT {
        return Err(IdpError::InstanceTooLarge { size, limit: POSTERIOR_EXPECTIMAX_LIMIT });
    }
    let mut root = vec![0u64; tuples.len().div_ceil(64)];
    for i in 0..tuples.len() {
        root[i / 64] |= 1 << (i % 64);
    }
    let mut search = PosteriorSearch { model, tuples, memo: HashMap::new() };
    Ok(search.value(&root, horizon))
}

/// Backward induction over every reachable range box with all `N K` offers
/// legal at every step and no commit shortcut. Requires `discount = 1`.
pub fn full_dp_value(model: &IdpModel, prior: &JointPrior, horizon: usize) -> Result<f64> {
    prior.check_model(model)?;
    if model.discount() < 1.0 {
        return Err(IdpError::DiscountedFiniteUnsupported(model.discount()));
    }
    let (n_actions, k) = (model.n_actions(), model.n_incentives());
    let offers: Vec<Offer> = (0..n_actions)
        .flat_map(|n| (0..k).map(move |i| Offer::new(n, i)))
        .collect();

    // Closure of the range update under every offer and possible response.
    let root = IncentiveRanges::full(n_actions, k);
    let mut index = HashMap::from([(root.clone(), 0usize)]);
    let mut nodes = vec![root];
    // transitions[node][offer] = [(probability, successor); 2]
    let mut transitions: Vec<Vec<[(f64, usize); 2]>> = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        if nodes.len() as u128 > FULL_DP_NODE_LIMIT {
            return Err(IdpError::InstanceTooLarge { size: nodes.len() as u128, limit: FULL_DP_NODE_LIMIT });
        }
        let node = nodes[i].clone();
        let beliefs = marginals(prior, &node)?;
        let mut row = Vec::with_capacity(offers.len());
        for &offer in &offers {
            let belief = &beliefs[offer.action];
            let mut pair = [(0.0, i); 2];
            for (slot, outcome) in [Outcome::Accept, Outcome::Reject].into_iter().enumerate() {
                let p = match outcome {
                    Outcome::Accept => belief.accept_probability(offer.incentive),
                    Outcome::Reject => belief.reject_probability(offer.incentive),
                };
                if p == 0.0 {
                    continue;
                }
                let next = node.update(offer, outcome)?;
                let next_idx = *index.entry(next.clone()).or_insert_with(|| {
                    nodes.push(next);
                    nodes.len() - 1
                });
                pair[slot] = (p, next_idx);
            }
            row.push(pair);
        }
        transitions.push(row);
        i += 1;
    }

    let mut values = vec![0.0; nodes.len()];
    for _ in 1..=horizon {
        let prev = values.clone();
        for (node, row) in transitions.iter().enumerate() {
            values[node] = row
                .iter()
                .zip(&offers)
                .map(|(pair, &offer)| {
                    let [(pa, ia), (pr, ir)] = *pair;
                    let mut q = 0.0;
                    if pa > 0.0 {
                        q += pa * (model.accept_cost(offer) + prev[ia]);
                    }
                    if pr > 0.0 {
                        q += pr * (model.default_cost() + prev[ir]);
                    }
                    q
                })
                .fold(f64::INFINITY, f64::min);
        }
    }
    Ok(values[0])
}

/// Exact expected cost of a deterministic decider: the prior-weighted sum of
/// the cost of the unique trajectory it follows against each threshold tuple.
pub fn policy_expected_cost<D: Decider + ?Sized>(
    model: &IdpModel,
    prior: &JointPrior,
    decider: &mut D,
    horizon: usize,
) -> Result<f64> {
    prior.check_model(model)?;
    let mut total = 0.0;
    for (tuple, w) in prior.entries() {
        if w == 0.0 {
            continue;
        }
        let truth = TrueIncentives::new(tuple.to_vec(), prior.n_incentives())?;
        decider.reset();
        total += w * run_episode(model, decider, &truth, horizon)?.total_cost;
    }
    Ok(total)
}
