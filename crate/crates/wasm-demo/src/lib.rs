//! Browser bindings. Each export takes plain numbers and returns a JSON
//! string; the `*_json` functions hold the logic so they can be tested
//! natively.

use std::sync::Arc;

use idp_core::baselines::{DaaPolicy, GreedyPolicy};
use idp_core::oracle::policy_expected_cost;
use idp_core::sim::{respond, run_episode};
use idp_core::solver_exact::{enumerate_reachable_states, solve_finite};
use idp_core::solver_seq::{seq_bound, seq_bound_alt, solve_seq_finite, DescendingSweepPolicy};
use idp_core::{Algorithm, Decider, Decision, IdpModel, JointPrior, Offer, Outcome, TrueIncentives};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_ACTIONS: usize = 5;
const MAX_INCENTIVES: usize = 6;
const MAX_HORIZON: usize = 30;

fn instance(n: usize, k: usize, eta: f64, horizon: usize) -> Result<(IdpModel, JointPrior), String> {
    if !(1..=MAX_ACTIONS).contains(&n) || !(1..=MAX_INCENTIVES).contains(&k) {
        return Err(format!("N must be 1..={MAX_ACTIONS} and K 1..={MAX_INCENTIVES}"));
    }
    if !(1..=MAX_HORIZON).contains(&horizon) {
        return Err(format!("H must be 1..={MAX_HORIZON}"));
    }
    if eta.is_nan() || eta <= 0.0 {
        return Err("eta must be positive".into());
    }
    let model = IdpModel::experiment(n, k, eta).map_err(|e| e.to_string())?;
    let prior = JointPrior::uniform(n, k).map_err(|e| e.to_string())?;
    Ok((model, prior))
}

fn describe(d: Decision) -> String {
    match d {
        Decision::Probe(o) => format!("probe {o}"),
        Decision::Commit(o) => format!("commit {o}"),
    }
}

#[derive(Serialize)]
struct SolveReport {
    optimal_value: f64,
    seq_value: f64,
    sweep_value: f64,
    optimal_first: String,
    seq_first: String,
    forward_slack: f64,
    reverse_slack: f64,
    reachable_states: usize,
    seq_states: usize,
}

/// Optimal and sequential values under a uniform prior, with both bounds.
pub fn solve_json(n: usize, k: usize, eta: f64, horizon: usize) -> Result<String, String> {
    let (model, prior) = instance(n, k, eta, horizon)?;
    let exact = solve_finite(&model, &prior, horizon).map_err(|e| e.to_string())?;
    let seq = solve_seq_finite(&model, &prior, horizon).map_err(|e| e.to_string())?;
    let mut sweep = DescendingSweepPolicy::new(Arc::new(model.clone()));
    let sweep_value = policy_expected_cost(&model, &prior, &mut sweep, horizon).map_err(|e| e.to_string())?;
    let report = SolveReport {
        optimal_value: exact.root().value,
        seq_value: seq.root().value,
        sweep_value,
        optimal_first: describe(exact.root().decision),
        seq_first: describe(seq.root().decision),
        forward_slack: seq_bound(&model).slack,
        reverse_slack: seq_bound_alt(&model).slack,
        reachable_states: enumerate_reachable_states(&model, &prior),
        seq_states: seq.state_count(),
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

fn decider(alg: Algorithm, model: &IdpModel, prior: &JointPrior, horizon: usize) -> Result<Box<dyn Decider>, String> {
    Ok(match alg {
        Algorithm::Exact => Box::new(Arc::new(solve_finite(model, prior, horizon).map_err(|e| e.to_string())?).policy()),
        Algorithm::Seq => Box::new(Arc::new(solve_seq_finite(model, prior, horizon).map_err(|e| e.to_string())?).policy()),
        Algorithm::Greedy => Box::new(GreedyPolicy::new(Arc::new(model.clone()), Arc::new(prior.clone()))),
        Algorithm::Daa => Box::new(DaaPolicy::new(Arc::new(model.clone()))),
    })
}

#[derive(Serialize)]
struct Curve {
    algorithm: Algorithm,
    /// Expected total cost for H = 1..=max_horizon.
    costs: Vec<f64>,
}

/// Expected total cost of every algorithm for each horizon up to
/// `max_horizon`, computed exactly over the prior.
pub fn curves_json(n: usize, k: usize, eta: f64, max_horizon: usize) -> Result<String, String> {
    let (model, prior) = instance(n, k, eta, max_horizon)?;
    let mut curves = Vec::new();
    for alg in Algorithm::ALL {
        let mut costs = Vec::with_capacity(max_horizon);
        for h in 1..=max_horizon {
            let mut d = decider(alg, &model, &prior, h)?;
            costs.push(policy_expected_cost(&model, &prior, &mut d, h).map_err(|e| e.to_string())?);
        }
        curves.push(Curve { algorithm: alg, costs });
    }
    serde_json::to_string(&curves).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct TraceStep {
    offer: Offer,
    label: String,
    accepted: bool,
    cost: f64,
}

#[derive(Serialize)]
struct Trace {
    steps: Vec<TraceStep>,
    total_cost: f64,
}

/// One episode of `algorithm` against the agent with one-based thresholds
/// `truth` (comma separated, nonincreasing).
pub fn trace_json(n: usize, k: usize, eta: f64, horizon: usize, algorithm: &str, truth: &str) -> Result<String, String> {
    let (model, prior) = instance(n, k, eta, horizon)?;
    let alg: Algorithm = algorithm.parse()?;
    let thresholds: Vec<usize> = truth
        .split(',')
        .map(|t| t.trim().parse::<usize>().ok().filter(|&t| t >= 1).map(|t| t - 1))
        .collect::<Option<_>>()
        .ok_or("thresholds must be one-based integers")?;
    if thresholds.len() != n {
        return Err(format!("expected {n} thresholds"));
    }
    let truth = TrueIncentives::new(thresholds, k).map_err(|e| e.to_string())?;
    let mut d = decider(alg, &model, &prior, horizon)?;
    d.reset();
    let trace = run_episode(&model, &mut d, &truth, horizon).map_err(|e| e.to_string())?;
    let steps = trace
        .steps
        .iter()
        .map(|s| TraceStep {
            offer: s.offer,
            label: s.offer.to_string(),
            accepted: respond(&truth, s.offer) == Outcome::Accept,
            cost: s.cost,
        })
        .collect();
    serde_json::to_string(&Trace { steps, total_cost: trace.total_cost }).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn solve(n: usize, k: usize, eta: f64, horizon: usize) -> Result<String, JsError> {
    solve_json(n, k, eta, horizon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn curves(n: usize, k: usize, eta: f64, max_horizon: usize) -> Result<String, JsError> {
    curves_json(n, k, eta, max_horizon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn trace(n: usize, k: usize, eta: f64, horizon: usize, algorithm: &str, truth: &str) -> Result<String, JsError> {
    trace_json(n, k, eta, horizon, algorithm, truth).map_err(|e| JsError::new(&e))
}
