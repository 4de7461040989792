//! Agent response model, episode execution, Monte Carlo evaluation and
//! planning-time benchmarks.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{DaaPolicy, GreedyPolicy};
use crate::error::{IdpError, Result};
use crate::model::{IdpModel, JointPrior, Offer, Outcome, TrueIncentives};
use crate::solver_exact::{solve_finite, solve_infinite, ExactSolution};
use crate::solver_seq::{solve_seq_finite, solve_seq_infinite, SeqSolution};

/// A stateful principal policy driven one interaction at a time.
///
/// `decide` must be a deterministic function of the observations made since
/// the last `reset`.
pub trait Decider {
    /// Returns to the initial belief.
    fn reset(&mut self);

    /// Offer to make with `remaining` interactions left (including this one).
    fn decide(&mut self, remaining: usize) -> Result<Offer>;

    /// Incorporates the agent's response to `offer`.
    fn observe(&mut self, offer: Offer, outcome: Outcome) -> Result<()>;
}

impl<D: Decider + ?Sized> Decider for Box<D> {
    fn reset(&mut self) {
        (**self).reset()
    }

    fn decide(&mut self, remaining: usize) -> Result<Offer> {
        (**self).decide(remaining)
    }

    fn observe(&mut self, offer: Offer, outcome: Outcome) -> Result<()> {
        (**self).observe(offer, outcome)
    }
}

/// A myopic agent accepts any incentive at or above its threshold.
pub fn respond(truth: &TrueIncentives, offer: Offer) -> Outcome {
    if offer.incentive >= truth.threshold(offer.action) {
        Outcome::Accept
    } else {
        Outcome::Reject
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStep {
    pub step: usize,
    pub offer: Offer,
    pub outcome: Outcome,
    /// Undiscounted cost of this interaction.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub steps: Vec<EpisodeStep>,
    /// Discounted sum `Σ γ^step · cost`.
    pub total_cost: f64,
}

impl EpisodeTrace {
    /// Recomputes the discounted total from the offers and outcomes alone.
    pub fn recompute_total(&self, model: &IdpModel) -> f64 {
        let gamma = model.discount();
        let mut weight = 1.0;
        let mut total = 0.0;
        for s in &self.steps {
            total += weight * model.step_cost(s.offer, s.outcome);
            weight *= gamma;
        }
        total
    }
}

/// Runs `horizon` interactions of `decider` against an agent with thresholds
/// `truth`. The decider is used from its current state; call `reset` first.
pub fn run_episode<D: Decider + ?Sized>(
    model: &IdpModel,
    decider: &mut D,
    truth: &TrueIncentives,
    horizon: usize,
) -> Result<EpisodeTrace> {
    let gamma = model.discount();
    let mut steps = Vec::with_capacity(horizon);
    let mut weight = 1.0;
    let mut total = 0.0;
    for step in 0..horizon {
        let offer = decider.decide(horizon - step)?;
        model.check_offer(offer)?;
        let outcome = respond(truth, offer);
        let cost = model.step_cost(offer, outcome);
        total += weight * cost;
        weight *= gamma;
        decider.observe(offer, outcome)?;
        steps.push(EpisodeStep { step, offer, outcome, cost });
    }
    Ok(EpisodeTrace { steps, total_cost: total })
}

/// Summary of repeated Monte Carlo rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStats {
    /// Mean total cost of each round.
    pub round_means: Vec<f64>,
    pub grand_mean: f64,
    /// Sample standard deviation of the round means (zero for one round).
    pub round_std: f64,
    /// Sample standard deviation over every individual run.
    pub run_std: f64,
    pub runs: usize,
    pub rounds: usize,
    pub seed: u64,
}

impl McStats {
    /// Standard error of the grand mean estimated from the spread of the
    /// round means.
    pub fn round_stderr(&self) -> f64 {
        self.round_std / (self.rounds as f64).sqrt()
    }

    /// Standard error of the grand mean estimated from all runs pooled.
    pub fn run_stderr(&self) -> f64 {
        self.run_std / ((self.runs * self.rounds) as f64).sqrt()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the ChaCha8 stream used by run `run` of round `round`.
///
/// Streams depend only on `(seed, round, run)`, never on scheduling, so
/// parallel and sequential execution give identical results.
pub fn stream_seed(seed: u64, round: usize, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ round as u64) ^ run as u64)
}

pub fn stream_rng(seed: u64, round: usize, run: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, round, run))
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Draws `runs` agents per round from the prior and averages the total cost
/// of `make_decider`'s policy over `horizon` interactions.
pub fn monte_carlo<F, D>(
    model: &IdpModel,
    prior: &JointPrior,
    make_decider: F,
    horizon: usize,
    runs: usize,
    rounds: usize,
    seed: u64,
) -> Result<McStats>
where
    F: Fn() -> D + Sync,
    D: Decider,
{
    if runs == 0 || rounds == 0 {
        return Err(IdpError::Validation("runs and rounds must be at least 1".into()));
    }
    prior.check_model(model)?;
    let mut round_means = Vec::with_capacity(rounds);
    let mut all = Vec::with_capacity(runs * rounds);
    for round in 0..rounds {
        let costs: Vec<f64> = (0..runs)
            .into_par_iter()
            .map(|run| {
                let mut rng = stream_rng(seed, round, run);
                let truth = prior.sample(&mut rng);
                let mut decider = make_decider();
                decider.reset();
                run_episode(model, &mut decider, &truth, horizon).map(|t| t.total_cost)
            })
            .collect::<Result<_>>()?;
        round_means.push(costs.iter().sum::<f64>() / runs as f64);
        all.extend(costs);
    }
    let grand_mean = round_means.iter().sum::<f64>() / rounds as f64;
    let round_std = sample_std(&round_means, grand_mean);
    let run_std = sample_std(&all, grand_mean);
    Ok(McStats { round_means, grand_mean, round_std, run_std, runs, rounds, seed })
}

/// The four policies compared in the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exact,
    Seq,
    Greedy,
    Daa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Exact, Algorithm::Seq, Algorithm::Greedy, Algorithm::Daa];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::Seq => "seq",
            Algorithm::Greedy => "greedy",
            Algorithm::Daa => "daa",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected exact, seq, greedy or daa)"))
    }
}

#[derive(Debug, Clone)]
enum PlannedKind {
    Exact(Arc<ExactSolution>),
    Seq(Arc<SeqSolution>),
    Greedy,
    Daa,
}

/// A planned policy ready to spawn per-episode deciders.
#[derive(Debug, Clone)]
pub struct PlannedPolicy {
    pub algorithm: Algorithm,
    pub plan_time: Duration,
    model: Arc<IdpModel>,
    prior: Arc<JointPrior>,
    kind: PlannedKind,
}

impl PlannedPolicy {
    /// Root value predicted by the planner, for the planning algorithms.
    pub fn planned_value(&self) -> Option<f64> {
        match &self.kind {
            PlannedKind::Exact(s) => Some(s.root().value),
            PlannedKind::Seq(s) => Some(s.root().value),
            _ => None,
        }
    }

    pub fn exact_solution(&self) -> Option<&Arc<ExactSolution>> {
        match &self.kind {
            PlannedKind::Exact(s) => Some(s),
            _ => None,
        }
    }

    pub fn seq_solution(&self) -> Option<&Arc<SeqSolution>> {
        match &self.kind {
            PlannedKind::Seq(s) => Some(s),
            _ => None,
        }
    }

    /// A fresh decider for one episode.
    pub fn decider(&self) -> Box<dyn Decider + Send> {
        match &self.kind {
            PlannedKind::Exact(s) => Box::new(s.policy()),
            PlannedKind::Seq(s) => Box::new(s.policy()),
            PlannedKind::Greedy => Box::new(GreedyPolicy::new(Arc::clone(&self.model), Arc::clone(&self.prior))),
            PlannedKind::Daa => Box::new(DaaPolicy::new(Arc::clone(&self.model))),
        }
    }
}

/// Plans `algorithm` for `horizon` steps. Undiscounted models use the
/// finite-horizon solvers; discounted models use the stationary
/// infinite-horizon solution for every horizon.
pub fn plan(algorithm: Algorithm, model: &IdpModel, prior: &JointPrior, horizon: usize) -> Result<PlannedPolicy> {
    prior.check_model(model)?;
    let discounted = model.discount() < 1.0;
    let start = Instant::now();
    let kind = match algorithm {
        Algorithm::Exact if discounted => PlannedKind::Exact(Arc::new(solve_infinite(model, prior)?)),
        Algorithm::Exact => PlannedKind::Exact(Arc::new(solve_finite(model, prior, horizon)?)),
        Algorithm::Seq if discounted => PlannedKind::Seq(Arc::new(solve_seq_infinite(model, prior)?)),
        Algorithm::Seq => PlannedKind::Seq(Arc::new(solve_seq_finite(model, prior, horizon)?)),
        Algorithm::Greedy => PlannedKind::Greedy,
        Algorithm::Daa => PlannedKind::Daa,
    };
    Ok(PlannedPolicy {
        algorithm,
        plan_time: start.elapsed(),
        model: Arc::new(model.clone()),
        prior: Arc::new(prior.clone()),
        kind,
    })
}

/// One row of a planning-time benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n_actions: usize,
    pub n_incentives: usize,
    pub median_plan_time: Duration,
}

/// Median wall-clock planning time of each algorithm on experiment models
/// (`eta`, uniform prior) over a grid of `(N, K)` sizes.
pub fn bench_planning(
    grid: &[(usize, usize)],
    algorithms: &[Algorithm],
    eta: f64,
    horizon: usize,
    repetitions: usize,
) -> Result<Vec<BenchRow>> {
    let reps = repetitions.max(1);
    let mut rows = Vec::new();
    for &(n, k) in grid {
        let model = IdpModel::experiment(n, k, eta)?;
        let prior = JointPrior::uniform(n, k)?;
        for &algorithm in algorithms {
            let mut times = Vec::with_capacity(reps);
            for _ in 0..reps {
                times.push(plan(algorithm, &model, &prior, horizon)?.plan_time);
            }
            times.sort();
            rows.push(BenchRow {
                algorithm,
                n_actions: n,
                n_incentives: k,
                median_plan_time: times[reps / 2],
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(Offer);

    impl Decider for Fixed {
        fn reset(&mut self) {}
        fn decide(&mut self, _: usize) -> Result<Offer> {
            Ok(self.0)
        }
        fn observe(&mut self, _: Offer, _: Outcome) -> Result<()> {
            Ok(())
        }
    }

    #[test]
    fn respond_rule() {
        let truth = TrueIncentives::new(vec![1, 0], 3).unwrap();
        assert_eq!(respond(&truth, Offer::new(0, 1)), Outcome::Accept);
        assert_eq!(respond(&truth, Offer::new(0, 0)), Outcome::Reject);
        assert_eq!(respond(&truth, Offer::new(1, 0)), Outcome::Accept);
        assert_eq!(respond(&truth, Offer::new(1, 2)), Outcome::Accept);
    }

    #[test]
    fn fixed_offer_episode_cost() {
        let m = IdpModel::experiment(2, 3, 1.0).unwrap();
        let truth = TrueIncentives::new(vec![2, 1], 3).unwrap();
        let mut d = Fixed(Offer::new(1, 2));
        let trace = run_episode(&m, &mut d, &truth, 5).unwrap();
        assert!((trace.total_cost - 5.0 * 2.0).abs() < 1e-12);
        assert_eq!(trace.recompute_total(&m), trace.total_cost);

        let discounted = m.clone().with_discount(0.5).unwrap();
        let trace = run_episode(&discounted, &mut d, &truth, 3).unwrap();
        assert!((trace.total_cost - 2.0 * 1.75).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let m = IdpModel::experiment(2, 3, 1.0).unwrap();
        let p = JointPrior::uniform(2, 3).unwrap();
        let planned = plan(Algorithm::Daa, &m, &p, 4).unwrap();
        let a = monte_carlo(&m, &p, || planned.decider(), 4, 200, 3, 11).unwrap();
        let b = monte_carlo(&m, &p, || planned.decider(), 4, 200, 3, 11).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo(&m, &p, || planned.decider(), 4, 200, 3, 12).unwrap();
        assert_ne!(a.round_means, c.round_means);
    }

    #[test]
    fn point_mass_has_zero_spread() {
        let m = IdpModel::experiment(2, 3, 1.0).unwrap();
        let truth = TrueIncentives::new(vec![1, 1], 3).unwrap();
        let p = JointPrior::point_mass(&truth, 3).unwrap();
        let stats = monte_carlo(&m, &p, || Fixed(Offer::new(0, 2)), 3, 50, 4, 1).unwrap();
        assert_eq!(stats.round_std, 0.0);
        assert!((stats.grand_mean - 3.0 * (0.5 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("optimal".parse::<Algorithm>().is_err());
    }

    #[test]
    fn trivial_bench_is_fast() {
        let rows = bench_planning(&[(1, 1)], &Algorithm::ALL, 1.0, 20, 5).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.median_plan_time < Duration::from_millis(1)));
        assert!(bench_planning(&[], &Algorithm::ALL, 1.0, 20, 5).unwrap().is_empty());
    }
}
