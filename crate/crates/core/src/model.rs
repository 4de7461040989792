//! Instance definition, the joint prior over hidden thresholds, and the
//! range-based belief representation.
//!
//! Every index in this module is zero-based: action `n` is `a_{n+1}` and
//! incentive `k` is `δ_{k+1}` in the usual one-based notation. Belief logic
//! never touches money values; those only enter when costs are accumulated.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IdpError, Result};

/// Tolerance on the total mass of a prior or belief vector.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Costs, incentive ladder and discount of an incentive decision process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdpModel {
    action_costs: Vec<f64>,
    default_cost: f64,
    incentives: Vec<f64>,
    discount: f64,
}

impl IdpModel {
    pub fn new(
        action_costs: Vec<f64>,
        default_cost: f64,
        incentives: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(IdpError::Validation(msg));
        if action_costs.is_empty() {
            return invalid("action_costs must be nonempty".into());
        }
        if incentives.is_empty() {
            return invalid("incentives must be nonempty".into());
        }
        let all_values = action_costs
            .iter()
            .chain(incentives.iter())
            .chain(std::iter::once(&default_cost));
        if all_values.into_iter().any(|v| !v.is_finite()) {
            return invalid("costs and incentives must be finite".into());
        }
        if let Some(i) = action_costs.windows(2).position(|w| w[0] >= w[1]) {
            return invalid(format!(
                "action_costs must be strictly increasing (c_{} = {} >= c_{} = {})",
                i + 1,
                action_costs[i],
                i + 2,
                action_costs[i + 1]
            ));
        }
        if let Some(i) = incentives.windows(2).position(|w| w[0] >= w[1]) {
            return invalid(format!(
                "incentives must be strictly increasing (δ_{} = {} >= δ_{} = {})",
                i + 1,
                incentives[i],
                i + 2,
                incentives[i + 1]
            ));
        }
        let max_accept = action_costs[action_costs.len() - 1] + incentives[incentives.len() - 1];
        if max_accept > default_cost {
            return invalid(format!(
                "c_N + δ_K = {max_accept} must not exceed default_cost = {default_cost}"
            ));
        }
        if !(discount > 0.0 && discount <= 1.0) {
            return invalid(format!("discount must lie in (0, 1], got {discount}"));
        }
        Ok(Self { action_costs, default_cost, incentives, discount })
    }

    /// The simulation parameterization: `c_n = (n/N)^eta`, `δ_k = k/K`,
    /// default cost 2 and no discounting.
    pub fn experiment(n_actions: usize, n_incentives: usize, eta: f64) -> Result<Self> {
        if n_actions == 0 || n_incentives == 0 {
            return Err(IdpError::Validation("N and K must be at least 1".into()));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(IdpError::Validation(format!("eta must be positive, got {eta}")));
        }
        let costs = (1..=n_actions)
            .map(|n| (n as f64 / n_actions as f64).powf(eta))
            .collect();
        let incentives = (1..=n_incentives)
            .map(|k| k as f64 / n_incentives as f64)
            .collect();
        Self::new(costs, 2.0, incentives, 1.0)
    }

    pub fn with_discount(self, discount: f64) -> Result<Self> {
        Self::new(self.action_costs, self.default_cost, self.incentives, discount)
    }

    pub fn n_actions(&self) -> usize {
        self.action_costs.len()
    }

    pub fn n_incentives(&self) -> usize {
        self.incentives.len()
    }

    pub fn action_costs(&self) -> &[f64] {
        &self.action_costs
    }

    pub fn action_cost(&self, action: usize) -> f64 {
        self.action_costs[action]
    }

    pub fn default_cost(&self) -> f64 {
        self.default_cost
    }

    pub fn incentives(&self) -> &[f64] {
        &self.incentives
    }

    pub fn incentive(&self, k: usize) -> f64 {
        self.incentives[k]
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Principal's cost when `offer` is accepted.
    pub fn accept_cost(&self, offer: Offer) -> f64 {
        self.action_costs[offer.action] + self.incentives[offer.incentive]
    }

    /// Principal's immediate cost for one interaction.
    pub fn step_cost(&self, offer: Offer, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Accept => self.accept_cost(offer),
            Outcome::Reject => self.default_cost,
        }
    }

    pub fn check_offer(&self, offer: Offer) -> Result<()> {
        if offer.action >= self.n_actions() || offer.incentive >= self.n_incentives() {
            return Err(IdpError::Validation(format!("offer {offer} out of bounds")));
        }
        Ok(())
    }
}

/// An incentive `δ_k` offered for alternate action `a_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Offer {
    pub action: usize,
    pub incentive: usize,
}

impl Offer {
    pub fn new(action: usize, incentive: usize) -> Self {
        Self { action, incentive }
    }
}

impl fmt::Display for Offer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a_{}, δ_{})", self.action + 1, self.incentive + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Accept,
    Reject,
}

/// The agent's hidden thresholds `t_1 >= t_2 >= ... >= t_N`, as incentive indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrueIncentives(Vec<usize>);

impl TrueIncentives {
    pub fn new(thresholds: Vec<usize>, n_incentives: usize) -> Result<Self> {
        check_tuple(&thresholds, n_incentives).map_err(IdpError::Validation)?;
        Ok(Self(thresholds))
    }

    pub fn thresholds(&self) -> &[usize] {
        &self.0
    }

    pub fn threshold(&self, action: usize) -> usize {
        self.0[action]
    }

    /// Cost of the cheapest pair the agent would accept.
    pub fn best_accept_cost(&self, model: &IdpModel) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(n, &t)| model.action_cost(n) + model.incentive(t))
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_tuple(tuple: &[usize], n_incentives: usize) -> std::result::Result<(), String> {
    if tuple.is_empty() {
        return Err("threshold tuple is empty".into());
    }
    if let Some(&k) = tuple.iter().find(|&&k| k >= n_incentives) {
        return Err(format!("incentive index {} exceeds K = {n_incentives}", k + 1));
    }
    if tuple.windows(2).any(|w| w[0] < w[1]) {
        return Err(format!("threshold tuple {tuple:?} is not nonincreasing"));
    }
    Ok(())
}

/// All nonincreasing tuples of length `n` over `0..k`, in lexicographic order.
pub fn monotone_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, n: usize, upper: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in 0..=upper {
            prefix.push(v);
            extend(prefix, n, v, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 && k > 0 {
        extend(&mut Vec::with_capacity(n), n, k - 1, &mut out);
    }
    out
}

/// Explicit probability table over monotone threshold tuples.
///
/// Tuples are kept in lexicographic order so that iteration, sampling and
/// conditioning never depend on hash order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPrior {
    n_actions: usize,
    n_incentives: usize,
    tuples: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl JointPrior {
    /// Builds a prior from explicit entries. Weights must already sum to one.
    pub fn from_entries<I>(n_actions: usize, n_incentives: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let table = Self::collect(n_actions, n_incentives, entries)?;
        let total: f64 = table.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(IdpError::InvalidPrior(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self::from_table(n_actions, n_incentives, table))
    }

    /// Builds a prior from nonnegative weights, rescaling them to sum to one.
    pub fn normalized<I>(n_actions: usize, n_incentives: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut table = Self::collect(n_actions, n_incentives, entries)?;
        let total: f64 = table.values().sum();
        if total <= 0.0 {
            return Err(IdpError::InvalidPrior("weights sum to zero".into()));
        }
        table.values_mut().for_each(|w| *w /= total);
        Ok(Self::from_table(n_actions, n_incentives, table))
    }

    /// Equal weight on each of the `C(K+N-1, N)` monotone tuples.
    pub fn uniform(n_actions: usize, n_incentives: usize) -> Result<Self> {
        if n_actions == 0 || n_incentives == 0 {
            return Err(IdpError::InvalidPrior("N and K must be at least 1".into()));
        }
        let tuples = monotone_tuples(n_actions, n_incentives);
        let w = 1.0 / tuples.len() as f64;
        let weights = vec![w; tuples.len()];
        Ok(Self { n_actions, n_incentives, tuples, weights })
    }

    /// Point mass on a single threshold tuple.
    pub fn point_mass(truth: &TrueIncentives, n_incentives: usize) -> Result<Self> {
        let t = truth.thresholds().to_vec();
        Self::from_entries(t.len(), n_incentives, [(t, 1.0)])
    }

    fn collect<I>(n_actions: usize, n_incentives: usize, entries: I) -> Result<BTreeMap<Vec<usize>, f64>>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        if n_actions == 0 || n_incentives == 0 {
            return Err(IdpError::InvalidPrior("N and K must be at least 1".into()));
        }
        let mut table = BTreeMap::new();
        for (tuple, w) in entries {
            if tuple.len() != n_actions {
                return Err(IdpError::InvalidPrior(format!(
                    "tuple {tuple:?} has length {}, expected {n_actions}",
                    tuple.len()
                )));
            }
            check_tuple(&tuple, n_incentives).map_err(IdpError::InvalidPrior)?;
            if !(w >= 0.0 && w.is_finite()) {
                return Err(IdpError::InvalidPrior(format!("weight {w} for {tuple:?} is negative")));
            }
            *table.entry(tuple).or_insert(0.0) += w;
        }
        Ok(table)
    }

    fn from_table(n_actions: usize, n_incentives: usize, table: BTreeMap<Vec<usize>, f64>) -> Self {
        let (tuples, weights) = table.into_iter().unzip();
        Self { n_actions, n_incentives, tuples, weights }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_incentives(&self) -> usize {
        self.n_incentives
    }

    /// `(tuple, weight)` pairs in canonical order, zero weights included.
    pub fn entries(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.tuples.iter().map(Vec::as_slice).zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn check_model(&self, model: &IdpModel) -> Result<()> {
        if self.n_actions != model.n_actions() || self.n_incentives != model.n_incentives() {
            return Err(IdpError::InvalidPrior(format!(
                "prior is {}x{} but model has N = {}, K = {}",
                self.n_actions,
                self.n_incentives,
                model.n_actions(),
                model.n_incentives()
            )));
        }
        Ok(())
    }

    /// Inverse-CDF draw over the canonically ordered table.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TrueIncentives {
        let total: f64 = self.weights.iter().sum();
        let u = rng.gen_range(0.0..1.0) * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            last_positive = i;
            acc += w;
            if u < acc {
                return TrueIncentives(self.tuples[i].clone());
            }
        }
        TrueIncentives(self.tuples[last_positive].clone())
    }

    /// Whether `t_n` is conditionally independent of `t_1..t_{n-2}` given
    /// `t_{n-1}`, for every `n`. The uniform monotone prior has this property.
    pub fn is_markov_chain(&self) -> bool {
        for n in 2..self.n_actions {
            let mut by_prefix: BTreeMap<&[usize], Vec<f64>> = BTreeMap::new();
            let mut by_last: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for (tuple, w) in self.tuples.iter().zip(&self.weights) {
                // The prefix and last-value groups are marginalized over t_{n+1..N}.
                by_prefix.entry(&tuple[..n]).or_insert_with(|| vec![0.0; self.n_incentives])[tuple[n]] += w;
                by_last.entry(tuple[n - 1]).or_insert_with(|| vec![0.0; self.n_incentives])[tuple[n]] += w;
            }
            for (prefix, counts) in &by_prefix {
                let total: f64 = counts.iter().sum();
                if total <= 0.0 {
                    continue;
                }
                let reference = &by_last[&prefix[n - 1]];
                let ref_total: f64 = reference.iter().sum();
                let differs = counts
                    .iter()
                    .zip(reference)
                    .any(|(a, b)| (a / total - b / ref_total).abs() > 1e-12);
                if differs {
                    return false;
                }
            }
        }
        true
    }
}

/// Index interval `(s_n, e_n)` per action still consistent with every
/// observation. Together with the prior it determines the posterior exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IncentiveRanges(Vec<(usize, usize)>);

impl IncentiveRanges {
    pub fn new(ranges: Vec<(usize, usize)>, n_incentives: usize) -> Result<Self> {
        if ranges.is_empty() {
            return Err(IdpError::InvalidRanges("no actions".into()));
        }
        for (n, &(s, e)) in ranges.iter().enumerate() {
            if s > e || e >= n_incentives {
                return Err(IdpError::InvalidRanges(format!(
                    "range for a_{} is ({}, {}) with K = {n_incentives}",
                    n + 1,
                    s + 1,
                    e + 1
                )));
            }
        }
        if ranges.windows(2).any(|w| w[0].0 < w[1].0 || w[0].1 < w[1].1) {
            return Err(IdpError::InvalidRanges("range bounds must be nonincreasing in n".into()));
        }
        Ok(Self(ranges))
    }

    /// The initial node: every action spans the full ladder.
    pub fn full(n_actions: usize, n_incentives: usize) -> Self {
        Self(vec![(0, n_incentives - 1); n_actions])
    }

    pub fn n_actions(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, action: usize) -> (usize, usize) {
        self.0[action]
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.0.iter().zip(tuple).all(|(&(s, e), &t)| s <= t && t <= e)
    }

    pub fn is_collapsed(&self, action: usize) -> bool {
        let (s, e) = self.0[action];
        s == e
    }

    pub fn all_collapsed(&self) -> bool {
        self.0.iter().all(|&(s, e)| s == e)
    }

    /// An offer is informative when both responses are possible under the ranges.
    pub fn is_informative(&self, offer: Offer) -> bool {
        let (s, e) = self.0[offer.action];
        s <= offer.incentive && offer.incentive < e
    }

    /// Applies an observed response. An accept at `k` for `a_n` caps every
    /// action `m >= n` at `k`; a reject lifts every action `m <= n` to `k + 1`.
    pub fn update(&self, offer: Offer, outcome: Outcome) -> Result<Self> {
        let mut next = self.0.clone();
        let k = offer.incentive;
        match outcome {
            Outcome::Accept => {
                for r in &mut next[offer.action..] {
                    r.1 = r.1.min(k);
                }
            }
            Outcome::Reject => {
                for r in &mut next[..=offer.action] {
                    r.0 = r.0.max(k + 1);
                }
            }
        }
        if let Some(m) = next.iter().position(|&(s, e)| s > e) {
            return Err(IdpError::InconsistentObservation { action: m + 1 });
        }
        Ok(Self(next))
    }
}

/// Posterior marginal over `t_n`, indexed by incentive.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefVector {
    pub action: usize,
    pub probs: Vec<f64>,
}

impl BeliefVector {
    /// Probability that the agent accepts `δ_k` for this action.
    pub fn accept_probability(&self, k: usize) -> f64 {
        self.probs[..=k].iter().sum()
    }

    /// Probability that the agent rejects `δ_k` for this action.
    pub fn reject_probability(&self, k: usize) -> f64 {
        self.probs[k + 1..].iter().sum()
    }
}

/// Total prior mass of monotone tuples inside the range box.
pub fn posterior_support_mass(prior: &JointPrior, ranges: &IncentiveRanges) -> f64 {
    prior
        .entries()
        .filter(|(t, _)| ranges.contains(t))
        .map(|(_, w)| w)
        .sum()
}

/// Posterior marginal of `t_n` given that the thresholds lie in the box.
pub fn marginal(prior: &JointPrior, ranges: &IncentiveRanges, action: usize) -> Result<BeliefVector> {
    let mut all = marginals(prior, ranges)?;
    Ok(all.swap_remove(action))
}

/// Every action's posterior marginal in one pass over the table.
pub fn marginals(prior: &JointPrior, ranges: &IncentiveRanges) -> Result<Vec<BeliefVector>> {
    let n_actions = prior.n_actions();
    let k = prior.n_incentives();
    let mut mass = vec![vec![0.0; k]; n_actions];
    let mut total = 0.0;
    for (tuple, w) in prior.entries() {
        if w == 0.0 || !ranges.contains(tuple) {
            continue;
        }
        total += w;
        for (row, &t) in mass.iter_mut().zip(tuple) {
            row[t] += w;
        }
    }
    if total <= 0.0 {
        return Err(IdpError::EmptySupport);
    }
    Ok(mass
        .into_iter()
        .enumerate()
        .map(|(action, row)| BeliefVector {
            action,
            probs: row.into_iter().map(|m| m / total).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn build_model_checks_invariants() {
        let m = IdpModel::new(vec![0.5], 2.0, vec![0.5, 1.0], 1.0).unwrap();
        assert_eq!((m.n_actions(), m.n_incentives()), (1, 2));

        let err = IdpModel::new(vec![1.5], 2.0, vec![0.5, 1.0], 1.0).unwrap_err();
        assert!(err.to_string().contains("c_N + δ_K"), "{err}");
        assert!(IdpModel::new(vec![1.0], 2.0, vec![0.5, 1.0], 1.0).is_ok());

        let m = IdpModel::new(vec![1.0 / 3.0, 2.0 / 3.0, 1.0], 2.0, vec![0.2, 0.4, 0.6, 0.8, 1.0], 1.0)
            .unwrap();
        assert_eq!((m.n_actions(), m.n_incentives()), (3, 5));
    }

    #[test]
    fn build_model_rejects_bad_orderings_and_discount() {
        assert!(IdpModel::new(vec![0.5, 0.4], 2.0, vec![0.5], 1.0).is_err());
        assert!(IdpModel::new(vec![0.5], 2.0, vec![0.5, 0.5], 1.0).is_err());
        assert!(IdpModel::new(vec![0.5], 2.0, vec![0.5], 0.0).is_err());
        assert!(IdpModel::new(vec![0.5], 2.0, vec![0.5], 1.01).is_err());
        assert!(IdpModel::new(vec![], 2.0, vec![0.5], 1.0).is_err());
    }

    #[test]
    fn experiment_parameterization() {
        let m = IdpModel::experiment(3, 5, 1.0).unwrap();
        assert_eq!(m.default_cost(), 2.0);
        assert_eq!(m.discount(), 1.0);
        for (c, want) in m.action_costs().iter().zip([1.0 / 3.0, 2.0 / 3.0, 1.0]) {
            assert!((c - want).abs() < 1e-15);
        }
        for (d, want) in m.incentives().iter().zip([0.2, 0.4, 0.6, 0.8, 1.0]) {
            assert!((d - want).abs() < 1e-15);
        }

        let m = IdpModel::experiment(1, 1, 1.0).unwrap();
        assert_eq!((m.action_costs(), m.incentives()), (&[1.0][..], &[1.0][..]));

        // 0.5^0.75 = 2^-0.75 = 0.5946035575013605
        let m = IdpModel::experiment(2, 2, 0.75).unwrap();
        assert!((m.action_cost(0) - 0.594_603_557_501_360_5).abs() < 1e-15);
        assert_eq!(m.action_cost(1), 1.0);
        assert_eq!(m.incentives(), &[0.5, 1.0]);

        assert!(IdpModel::experiment(3, 5, 0.0).is_err());
    }

    #[test]
    fn uniform_prior_counts() {
        let p = JointPrior::uniform(1, 4).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.entries().all(|(_, w)| w == 0.25));

        let p = JointPrior::uniform(2, 2).unwrap();
        let tuples: Vec<_> = p.entries().map(|(t, _)| t.to_vec()).collect();
        assert_eq!(tuples, vec![vec![0, 0], vec![1, 0], vec![1, 1]]);

        let p = JointPrior::uniform(3, 5).unwrap();
        assert_eq!(p.len(), 35);
        assert!(p.entries().all(|(_, w)| (w - 1.0 / 35.0).abs() < 1e-15));
    }

    #[test]
    fn monotone_tuples_match_brute_force() {
        for n in 1..=3 {
            for k in 1usize..=5 {
                let mut brute = Vec::new();
                for code in 0..k.pow(n as u32) {
                    let t: Vec<usize> = (0..n).map(|i| code / k.pow((n - 1 - i) as u32) % k).collect();
                    if t.windows(2).all(|w| w[0] >= w[1]) {
                        brute.push(t);
                    }
                }
                assert_eq!(monotone_tuples(n, k), brute);
            }
        }
    }

    #[test]
    fn prior_validation() {
        assert!(JointPrior::from_entries(2, 2, [(vec![0, 1], 1.0)]).is_err());
        assert!(JointPrior::from_entries(2, 2, [(vec![1, 0], 0.5)]).is_err());
        assert!(JointPrior::from_entries(2, 2, [(vec![2, 0], 1.0)]).is_err());
        assert!(JointPrior::from_entries(2, 2, [(vec![1, 0], 1.5), (vec![0, 0], -0.5)]).is_err());
        let p = JointPrior::normalized(2, 2, [(vec![1, 0], 3.0), (vec![1, 1], 1.0)]).unwrap();
        assert_eq!(p.entries().map(|(_, w)| w).collect::<Vec<_>>(), vec![0.75, 0.25]);
    }

    #[test]
    fn sampling_point_mass_and_determinism() {
        let truth = TrueIncentives::new(vec![1, 0], 2).unwrap();
        let p = JointPrior::point_mass(&truth, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(p.sample(&mut rng), truth);
        }

        let p = JointPrior::uniform(3, 5).unwrap();
        let a = p.sample(&mut ChaCha8Rng::seed_from_u64(42));
        let b = p.sample(&mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_frequencies_match_prior() {
        let p = JointPrior::uniform(1, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 4];
        let draws = 100_000;
        for _ in 0..draws {
            counts[p.sample(&mut rng).threshold(0)] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn marginal_examples() {
        let p = JointPrior::uniform(1, 4).unwrap();
        let r = IncentiveRanges::new(vec![(1, 2)], 4).unwrap();
        assert_eq!(marginal(&p, &r, 0).unwrap().probs, vec![0.0, 0.5, 0.5, 0.0]);

        let p = JointPrior::uniform(2, 2).unwrap();
        let b = marginal(&p, &IncentiveRanges::full(2, 2), 0).unwrap();
        assert!((b.probs[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.probs[1] - 2.0 / 3.0).abs() < 1e-15);

        let p = JointPrior::uniform(3, 4).unwrap();
        let r = IncentiveRanges::new(vec![(3, 3), (2, 2), (0, 2)], 4).unwrap();
        assert_eq!(marginal(&p, &r, 1).unwrap().probs, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn marginal_empty_support() {
        let p = JointPrior::from_entries(2, 3, [(vec![2, 2], 1.0)]).unwrap();
        let r = IncentiveRanges::new(vec![(0, 1), (0, 1)], 3).unwrap();
        assert_eq!(marginal(&p, &r, 0), Err(IdpError::EmptySupport));
    }

    #[test]
    fn update_ranges_examples() {
        let r = IncentiveRanges::full(2, 2);
        let acc = r.update(Offer::new(0, 0), Outcome::Accept).unwrap();
        assert_eq!(acc.as_slice(), &[(0, 0), (0, 0)]);
        let rej = r.update(Offer::new(1, 0), Outcome::Reject).unwrap();
        assert_eq!(rej.as_slice(), &[(1, 1), (1, 1)]);

        let r = IncentiveRanges::new(vec![(1, 2)], 4).unwrap();
        assert_eq!(r.update(Offer::new(0, 2), Outcome::Accept).unwrap(), r);
    }

    #[test]
    fn update_ranges_inconsistent() {
        let r = IncentiveRanges::new(vec![(2, 3)], 4).unwrap();
        assert_eq!(
            r.update(Offer::new(0, 1), Outcome::Accept),
            Err(IdpError::InconsistentObservation { action: 1 })
        );
        assert!(r.update(Offer::new(0, 3), Outcome::Reject).is_err());
    }

    #[test]
    fn support_mass_examples() {
        let p = JointPrior::uniform(2, 2).unwrap();
        assert!((posterior_support_mass(&p, &IncentiveRanges::full(2, 2)) - 1.0).abs() < 1e-15);
        let r = IncentiveRanges::new(vec![(1, 1), (0, 1)], 2).unwrap();
        assert!((posterior_support_mass(&p, &r) - 2.0 / 3.0).abs() < 1e-15);
        let q = JointPrior::from_entries(2, 2, [(vec![0, 0], 1.0)]).unwrap();
        assert_eq!(posterior_support_mass(&q, &r), 0.0);
    }

    #[test]
    fn ranges_validation() {
        assert!(IncentiveRanges::new(vec![(1, 0)], 3).is_err());
        assert!(IncentiveRanges::new(vec![(0, 3)], 3).is_err());
        assert!(IncentiveRanges::new(vec![(0, 1), (0, 2)], 3).is_err());
        assert!(IncentiveRanges::new(vec![(0, 2), (1, 2)], 3).is_err());
    }

    #[test]
    fn uniform_prior_is_markov() {
        assert!(JointPrior::uniform(4, 3).unwrap().is_markov_chain());
        let p = JointPrior::normalized(
            3,
            2,
            [(vec![1, 0, 0], 1.0), (vec![0, 0, 0], 3.0), (vec![1, 1, 1], 1.0), (vec![1, 1, 0], 1.0)],
        )
        .unwrap();
        assert!(p.is_markov_chain());
        // t_3 depends on t_1 with t_2 held fixed.
        let q = JointPrior::normalized(
            3,
            3,
            [(vec![2, 1, 1], 1.0), (vec![2, 1, 0], 3.0), (vec![1, 1, 1], 3.0), (vec![1, 1, 0], 1.0)],
        )
        .unwrap();
        assert!(!q.is_markov_chain());
    }
}
