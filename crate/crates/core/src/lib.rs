//! Planning and simulation for incentive decision processes: a principal
//! repeatedly offers incentives to a myopic agent whose acceptance
//! thresholds are hidden, and wants to minimize its expected total cost.
//!
//! * [`model`]: instances, priors and range-box beliefs.
//! * [`solver_exact`]: optimal policies on the range-box belief MDP.
//! * [`solver_seq`]: the cost-ordered restriction and its additive bounds.
//! * [`baselines`]: greedy and diagnose-and-act comparison policies.
//! * [`oracle`]: brute-force references used to check the planners.
//! * [`sim`]: the agent, episodes, Monte Carlo and planning benchmarks.

pub mod baselines;
pub mod error;
pub mod model;
pub mod oracle;
mod plan;
pub mod sim;
pub mod solver_exact;
pub mod solver_seq;

pub use error::{IdpError, Result};
pub use model::{
    marginal, marginals, posterior_support_mass, BeliefVector, IdpModel, IncentiveRanges, JointPrior, Offer,
    Outcome, TrueIncentives,
};
pub use plan::{Decision, Horizon, PlanResult};
pub use sim::{Algorithm, Decider};
