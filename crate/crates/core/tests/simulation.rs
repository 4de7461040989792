mod common;

use std::sync::Arc;

use common::prior_family;
use idp_core::baselines::{DaaPhase, DaaPolicy};
use idp_core::oracle::policy_expected_cost;
use idp_core::sim::{monte_carlo, plan, run_episode};
use idp_core::{Algorithm, Decider, IdpModel, JointPrior, Offer, Outcome, Result, TrueIncentives};

struct Scripted(Vec<Offer>, usize);

impl Decider for Scripted {
    fn reset(&mut self) {
        self.1 = 0;
    }
    fn decide(&mut self, _: usize) -> Result<Offer> {
        Ok(self.0[self.1])
    }
    fn observe(&mut self, _: Offer, _: Outcome) -> Result<()> {
        self.1 += 1;
        Ok(())
    }
}

#[test]
fn scripted_episode_costs() {
    let m = IdpModel::new(vec![0.5], 2.0, vec![0.5, 1.0], 1.0).unwrap();
    let truth = TrueIncentives::new(vec![1], 2).unwrap();
    let mut d = Scripted(vec![Offer::new(0, 0), Offer::new(0, 1)], 0);
    let trace = run_episode(&m, &mut d, &truth, 2).unwrap();
    assert_eq!(trace.steps[0].outcome, Outcome::Reject);
    assert_eq!(trace.steps[0].cost, 2.0);
    assert_eq!(trace.steps[1].outcome, Outcome::Accept);
    assert_eq!(trace.steps[1].cost, 1.5);
    assert_eq!(trace.total_cost, 3.5);
    assert_eq!(trace.recompute_total(&m), 3.5);
}

#[test]
fn planned_value_equals_executed_expectation() {
    for (n, k) in [(1, 3), (2, 3), (3, 3), (2, 4)] {
        let m = IdpModel::experiment(n, k, 1.0).unwrap();
        for p in prior_family(n, k, 4, 59) {
            for h in 1..=5 {
                for alg in [Algorithm::Exact, Algorithm::Seq] {
                    let planned = plan(alg, &m, &p, h).unwrap();
                    let mut d = planned.decider();
                    let c = policy_expected_cost(&m, &p, &mut d, h).unwrap();
                    let v = planned.planned_value().unwrap();
                    assert!((c - v).abs() <= 1e-9, "{alg} N={n} K={k} H={h}: {c} vs {v}");
                }
            }
        }
    }
}

#[test]
fn monte_carlo_mean_converges_to_planned_value() {
    let m = IdpModel::experiment(2, 3, 1.0).unwrap();
    let p = JointPrior::uniform(2, 3).unwrap();
    let planned = plan(Algorithm::Exact, &m, &p, 4).unwrap();
    let stats = monte_carlo(&m, &p, || planned.decider(), 4, 10_000, 1, 7).unwrap();
    let v = planned.planned_value().unwrap();
    assert!((stats.grand_mean - v).abs() <= 4.0 * stats.run_stderr());
}

#[test]
fn monte_carlo_is_reproducible() {
    let m = IdpModel::experiment(3, 4, 1.0).unwrap();
    let p = JointPrior::uniform(3, 4).unwrap();
    let planned = plan(Algorithm::Seq, &m, &p, 6).unwrap();
    let a = monte_carlo(&m, &p, || planned.decider(), 6, 500, 3, 99).unwrap();
    let b = monte_carlo(&m, &p, || planned.decider(), 6, 500, 3, 99).unwrap();
    assert_eq!(a, b);
}

#[test]
fn daa_probe_count_and_final_pair() {
    for (n, k) in [(1, 4), (2, 5), (3, 4), (3, 7)] {
        let m = Arc::new(IdpModel::experiment(n, k, 1.0).unwrap());
        let cap = n * (k as f64).log2().ceil() as usize;
        for (tuple, _) in JointPrior::uniform(n, k).unwrap().entries() {
            let truth = TrueIncentives::new(tuple.to_vec(), k).unwrap();
            let mut daa = DaaPolicy::new(Arc::clone(&m));
            let mut probes = 0;
            while matches!(daa.phase(), DaaPhase::Diagnosing(_)) {
                let offer = daa.decide(1).unwrap();
                daa.observe(offer, idp_core::sim::respond(&truth, offer)).unwrap();
                probes += 1;
            }
            assert!(probes <= cap, "{tuple:?}: {probes} probes > {cap}");
            let DaaPhase::Acting(pair) = daa.phase() else { unreachable!() };
            assert_eq!(m.accept_cost(pair), truth.best_accept_cost(&m));
        }
    }
}
