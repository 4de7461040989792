mod common;

use common::prior_family;
use idp_core::baselines::greedy_decide;
use idp_core::oracle::{
    expectimax_value, expectimax_value_with, full_dp_value, posterior_expectimax_value, OfferSet,
};
use idp_core::solver_exact::{solve_finite, solve_infinite};
use idp_core::{IdpModel, IncentiveRanges, JointPrior, TrueIncentives};

#[test]
fn exact_matches_expectimax_on_small_grid() {
    for n in 1..=2 {
        for k in 2..=4 {
            let m = IdpModel::experiment(n, k, 1.0).unwrap();
            for (i, p) in prior_family(n, k, 6, 11).iter().enumerate() {
                for h in 1..=3 {
                    let want = expectimax_value(&m, p, h).unwrap();
                    let got = solve_finite(&m, p, h).unwrap().root().value;
                    assert!((got - want).abs() <= 1e-9, "N={n} K={k} prior {i} H={h}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn undominated_offer_pruning_is_lossless() {
    let m = IdpModel::experiment(2, 3, 0.5).unwrap();
    for p in prior_family(2, 3, 4, 5) {
        for h in 1..=3 {
            let all = expectimax_value_with(&m, &p, h, OfferSet::All).unwrap();
            let pruned = expectimax_value_with(&m, &p, h, OfferSet::Undominated).unwrap();
            assert!((all - pruned).abs() <= 1e-12);
        }
    }
}

#[test]
fn exact_matches_full_dp_for_one_action() {
    for k in 2..=4 {
        let m = IdpModel::experiment(1, k, 1.0).unwrap();
        for p in prior_family(1, k, 4, 3) {
            for h in 1..=6 {
                let want = full_dp_value(&m, &p, h).unwrap();
                let got = solve_finite(&m, &p, h).unwrap().root().value;
                assert!((got - want).abs() <= 1e-9, "K={k} H={h}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn value_is_nondecreasing_in_horizon() {
    let m = IdpModel::experiment(2, 4, 1.0).unwrap();
    for p in prior_family(2, 4, 4, 17) {
        let mut prev = 0.0;
        for h in 1..=8 {
            let v = solve_finite(&m, &p, h).unwrap().root().value;
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}

#[test]
fn value_lies_between_full_information_and_blind_commit() {
    let m = IdpModel::experiment(3, 3, 1.0).unwrap();
    for p in prior_family(3, 3, 4, 23) {
        for h in 1..=6 {
            let v = solve_finite(&m, &p, h).unwrap().root().value;
            let informed: f64 = p
                .entries()
                .map(|(t, w)| w * TrueIncentives::new(t.to_vec(), 3).unwrap().best_accept_cost(&m))
                .sum();
            let blind = (0..3)
                .map(|n| m.action_cost(n) + m.incentive(2))
                .fold(f64::INFINITY, f64::min);
            assert!(v >= h as f64 * informed - 1e-9);
            assert!(v <= h as f64 * blind + 1e-9);
        }
    }
}

#[test]
fn discounted_infinite_value_matches_long_truncation() {
    let m = IdpModel::experiment(1, 2, 1.0).unwrap().with_discount(0.9).unwrap();
    let p = JointPrior::uniform(1, 2).unwrap();
    let v = solve_infinite(&m, &p).unwrap().root().value;
    let truncated = posterior_expectimax_value(&m, &p, 200).unwrap();
    assert!((v - truncated).abs() <= 1e-6, "{v} vs {truncated}");

    let m = IdpModel::experiment(2, 3, 1.0).unwrap().with_discount(0.8).unwrap();
    for p in prior_family(2, 3, 3, 29) {
        let v = solve_infinite(&m, &p).unwrap().root().value;
        let truncated = posterior_expectimax_value(&m, &p, 120).unwrap();
        assert!((v - truncated).abs() <= 1e-6, "{v} vs {truncated}");
    }
}

#[test]
fn myopic_discount_reduces_to_greedy() {
    let m = IdpModel::experiment(2, 4, 1.0).unwrap().with_discount(1e-9).unwrap();
    for p in prior_family(2, 4, 6, 31) {
        let root = solve_infinite(&m, &p).unwrap().root();
        let greedy = greedy_decide(&m, &p, &IncentiveRanges::full(2, 4)).unwrap();
        assert_eq!(root.decision.offer(), greedy);
    }
}

#[test]
fn greedy_is_optimal_for_one_step() {
    use idp_core::baselines::GreedyPolicy;
    use idp_core::oracle::policy_expected_cost;
    use std::sync::Arc;
    let m = IdpModel::experiment(3, 4, 1.0).unwrap();
    for p in prior_family(3, 4, 6, 37) {
        let v = solve_finite(&m, &p, 1).unwrap().root().value;
        let mut greedy = GreedyPolicy::new(Arc::new(m.clone()), Arc::new(p.clone()));
        let g = policy_expected_cost(&m, &p, &mut greedy, 1).unwrap();
        assert!((v - g).abs() <= 1e-12);
    }
}
