#![allow(dead_code)]

use idp_core::model::{monotone_tuples, JointPrior};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random prior over monotone tuples. With `sparsity > 0` some tuples get
/// zero weight, keeping at least one positive.
pub fn random_prior(n: usize, k: usize, sparsity: f64, seed: u64) -> JointPrior {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples = monotone_tuples(n, k);
    let mut weights: Vec<f64> = tuples
        .iter()
        .map(|_| {
            if rng.gen::<f64>() < sparsity {
                0.0
            } else {
                -(1.0 - rng.gen::<f64>()).ln()
            }
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        let i = rng.gen_range(0..weights.len());
        weights[i] = 1.0;
    }
    JointPrior::normalized(n, k, tuples.into_iter().zip(weights)).unwrap()
}

/// Uniform prior followed by `count` random priors, half of them sparse.
pub fn prior_family(n: usize, k: usize, count: usize, seed: u64) -> Vec<JointPrior> {
    let mut priors = vec![JointPrior::uniform(n, k).unwrap()];
    for i in 0..count {
        let sparsity = if i % 2 == 0 { 0.0 } else { 0.3 };
        priors.push(random_prior(n, k, sparsity, seed ^ (i as u64 * 7919 + n as u64 * 131 + k as u64)));
    }
    priors
}

use idp_core::model::{marginals, posterior_support_mass, IncentiveRanges, Offer, Outcome};
use idp_core::sim::respond;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

/// Every belief invariant for one random instance: a prior drawn from `seed`,
/// an agent drawn from that prior, and the offers in `raw` (reduced modulo
/// `N` and `K`) answered truthfully.
pub fn check_belief_invariants(n: usize, k: usize, seed: u64, raw: &[(usize, usize)]) -> Result<(), String> {
    let prior = random_prior(n, k, if seed.is_multiple_of(2) { 0.0 } else { 0.3 }, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31));
    let truth = prior.sample(&mut rng);
    let history: Vec<(Offer, Outcome)> = raw
        .iter()
        .map(|&(a, i)| {
            let offer = Offer::new(a % n, i % k);
            (offer, respond(&truth, offer))
        })
        .collect();

    let mut ranges = IncentiveRanges::full(n, k);
    for (step, &(offer, outcome)) in history.iter().enumerate() {
        let beliefs = marginals(&prior, &ranges).map_err(|e| e.to_string())?;
        let (s, e) = ranges.get(offer.action);

        // Acceptance probability is the ratio of support masses.
        let mass = posterior_support_mass(&prior, &ranges);
        let accepted = ranges.update(offer, Outcome::Accept).ok();
        let acc_mass = accepted.as_ref().map_or(0.0, |r| posterior_support_mass(&prior, r));
        let p_acc = beliefs[offer.action].accept_probability(offer.incentive);
        if !close(p_acc, acc_mass / mass) {
            return Err(format!("step {step}: P_acc {p_acc} vs mass ratio {}", acc_mass / mass));
        }

        let next = ranges.update(offer, outcome).map_err(|e| e.to_string())?;
        IncentiveRanges::new(next.as_slice().to_vec(), k).map_err(|e| format!("step {step}: {e}"))?;
        let uninformative = match outcome {
            Outcome::Accept => offer.incentive >= e,
            Outcome::Reject => offer.incentive < s,
        };
        if uninformative && next != ranges {
            return Err(format!("step {step}: uninformative offer changed ranges"));
        }
        if !next.contains(truth.thresholds()) {
            return Err(format!("step {step}: truth left the box"));
        }
        ranges = next;
        check_marginals(&prior, &ranges, step)?;
    }

    // Applying the same observations in reverse order reaches the same box.
    let mut reversed = IncentiveRanges::full(n, k);
    for &(offer, outcome) in history.iter().rev() {
        reversed = reversed.update(offer, outcome).map_err(|e| e.to_string())?;
    }
    if reversed != ranges {
        return Err(format!("order dependence: {:?} vs {:?}", ranges.as_slice(), reversed.as_slice()));
    }
    Ok(())
}

fn check_marginals(prior: &JointPrior, ranges: &IncentiveRanges, step: usize) -> Result<(), String> {
    let beliefs = marginals(prior, ranges).map_err(|e| e.to_string())?;
    let total = posterior_support_mass(prior, ranges);
    for (a, b) in beliefs.iter().enumerate() {
        let sum: f64 = b.probs.iter().sum();
        if !close(sum, 1.0) {
            return Err(format!("step {step}: action {a} sums to {sum}"));
        }
        let (s, e) = ranges.get(a);
        for (i, &p) in b.probs.iter().enumerate() {
            if (i < s || i > e) && p != 0.0 {
                return Err(format!("step {step}: action {a} has mass {p} at {i} outside [{s},{e}]"));
            }
            // Conditioning the raw table by brute force.
            let brute: f64 = prior
                .entries()
                .filter(|(t, _)| t[a] == i && t.iter().enumerate().all(|(j, &x)| x >= ranges.get(j).0 && x <= ranges.get(j).1))
                .map(|(_, w)| w)
                .sum::<f64>()
                / total;
            if !close(p, brute) {
                return Err(format!("step {step}: action {a} index {i}: {p} vs {brute}"));
            }
        }
    }
    // The posterior keeps prior odds between tuples inside the box.
    let inside: Vec<(&[usize], f64)> = prior.entries().filter(|(t, w)| *w > 0.0 && ranges.contains(t)).collect();
    if let [(_, w0), rest @ ..] = inside.as_slice() {
        for (_, w) in rest {
            if !close((w / total) / (w0 / total), w / w0) {
                return Err(format!("step {step}: odds not preserved"));
            }
        }
    }
    Ok(())
}
