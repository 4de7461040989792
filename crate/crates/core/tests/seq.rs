mod common;

use std::sync::Arc;

use common::prior_family;
use idp_core::oracle::policy_expected_cost;
use idp_core::solver_exact::solve_finite;
use idp_core::solver_seq::{seq_bound, seq_bound_alt, solve_seq_finite, solve_seq_infinite, DescendingSweepPolicy};
use idp_core::solver_exact::solve_infinite;
use idp_core::IdpModel;

#[test]
fn restricted_value_within_bound_of_optimum() {
    for n in 1..=3 {
        for k in 2..=4 {
            let m = IdpModel::experiment(n, k, 1.0).unwrap();
            let slack = seq_bound(&m).slack.min(seq_bound_alt(&m).slack);
            for (i, p) in prior_family(n, k, 4, 41).iter().enumerate() {
                for h in 1..=10 {
                    let v = solve_finite(&m, p, h).unwrap().root().value;
                    let s = solve_seq_finite(&m, p, h).unwrap().root().value;
                    assert!(s >= v - 1e-9, "N={n} K={k} prior {i} H={h}: seq {s} < opt {v}");
                    assert!(s - v <= slack + 1e-9, "N={n} K={k} prior {i} H={h}: gap {}", s - v);
                }
            }
        }
    }
}

#[test]
fn sweep_policy_within_forward_bound() {
    for n in 1..=3 {
        for k in 2..=4 {
            let m = Arc::new(IdpModel::experiment(n, k, 1.0).unwrap());
            let slack = seq_bound(&m).slack;
            for p in prior_family(n, k, 4, 43) {
                for h in 1..=10 {
                    let v = solve_finite(&m, &p, h).unwrap().root().value;
                    let mut sweep = DescendingSweepPolicy::new(Arc::clone(&m));
                    let c = policy_expected_cost(&m, &p, &mut sweep, h).unwrap();
                    assert!(c <= v + slack + 1e-9, "N={n} K={k} H={h}: sweep {c} opt {v} slack {slack}");
                }
            }
        }
    }
}

#[test]
fn seq_equals_exact_for_one_action() {
    for k in 2..=5 {
        let m = IdpModel::experiment(1, k, 1.0).unwrap();
        for p in prior_family(1, k, 3, 47) {
            for h in 1..=8 {
                let v = solve_finite(&m, &p, h).unwrap().root().value;
                let s = solve_seq_finite(&m, &p, h).unwrap().root().value;
                assert!((v - s).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn discounted_seq_dominates_exact() {
    let m = IdpModel::experiment(3, 3, 1.0).unwrap().with_discount(0.9).unwrap();
    for p in prior_family(3, 3, 3, 53) {
        let v = solve_infinite(&m, &p).unwrap().root().value;
        let s = solve_seq_infinite(&m, &p).unwrap().root().value;
        assert!(s >= v - 1e-9);
    }
}

#[test]
fn markov_state_count_is_polynomial() {
    for n in 1..=5 {
        for k in 2..=5 {
            let m = IdpModel::experiment(n, k, 1.0).unwrap();
            let p = idp_core::JointPrior::uniform(n, k).unwrap();
            let sol = solve_seq_finite(&m, &p, 6).unwrap();
            assert!(sol.uses_markov_key());
            let cap = 4 * n * n * k * k * k;
            assert!(sol.state_count() <= cap, "N={n} K={k}: {} > {cap}", sol.state_count());
        }
    }
}
