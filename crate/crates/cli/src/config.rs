//! Experiment configuration: a flat TOML file whose keys can be overridden
//! from the command line.

use std::path::{Path, PathBuf};

use idp_core::{Algorithm, IdpModel, JointPrior};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One prior entry with thresholds given as one-based incentive indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorEntry {
    pub thresholds: Vec<usize>,
    pub weight: f64,
}

/// `"uniform"` or an explicit table of weights (rescaled to sum to one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorSpec {
    Named(String),
    Table(Vec<PriorEntry>),
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec::Named("uniform".into())
    }
}

impl std::str::FromStr for PriorSpec {
    type Err = String;

    /// `uniform`, or entries like `2,1=0.5;1,1=0.5`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "uniform" {
            return Ok(PriorSpec::default());
        }
        let mut entries = Vec::new();
        for part in s.split(';').filter(|p| !p.trim().is_empty()) {
            let (tuple, weight) = part
                .split_once('=')
                .ok_or_else(|| format!("prior entry {part:?} is not of the form t1,t2,...=weight"))?;
            let thresholds = parse_list(tuple).map_err(|e| format!("prior entry {part:?}: {e}"))?;
            let weight = weight.trim().parse().map_err(|_| format!("prior entry {part:?}: bad weight"))?;
            entries.push(PriorEntry { thresholds, weight });
        }
        if entries.is_empty() {
            return Err("prior must be \"uniform\" or at least one entry".into());
        }
        Ok(PriorSpec::Table(entries))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_actions: usize,
    pub n_incentives: usize,
    pub eta: f64,
    pub default_cost: f64,
    pub horizons: Vec<usize>,
    pub gamma: f64,
    pub algorithms: Vec<Algorithm>,
    pub runs: usize,
    pub rounds: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub prior: PriorSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_actions: 3,
            n_incentives: 5,
            eta: 1.0,
            default_cost: 2.0,
            horizons: vec![20],
            gamma: 1.0,
            algorithms: Algorithm::ALL.to_vec(),
            runs: 1000,
            rounds: 10,
            seed: 0,
            output: None,
            prior: PriorSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: &str| Err(CliError::Config(format!("{field}: {msg}")));
        if self.n_actions == 0 {
            return fail("n_actions", "must be at least 1");
        }
        if self.n_incentives == 0 {
            return fail("n_incentives", "must be at least 1");
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return fail("eta", &format!("must be positive, got {}", self.eta));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail("gamma", &format!("must lie in (0, 1], got {}", self.gamma));
        }
        if self.horizons.is_empty() {
            return fail("horizons", "must not be empty");
        }
        if self.horizons.contains(&0) {
            return fail("horizons", "must be at least 1");
        }
        if self.algorithms.is_empty() {
            return fail("algorithms", "must not be empty");
        }
        if self.runs == 0 {
            return fail("runs", "must be at least 1");
        }
        if self.rounds == 0 {
            return fail("rounds", "must be at least 1");
        }
        if let PriorSpec::Named(name) = &self.prior {
            if name != "uniform" {
                return fail("prior", &format!("unknown prior {name:?}"));
            }
        }
        self.model()?;
        self.joint_prior()?;
        Ok(())
    }

    /// `c_n = (n/N)^eta`, `δ_k = k/K`, with the configured default cost and
    /// discount.
    pub fn model(&self) -> Result<IdpModel, CliError> {
        let base = IdpModel::experiment(self.n_actions, self.n_incentives, self.eta)
            .map_err(|e| CliError::Config(format!("eta: {e}")))?;
        IdpModel::new(base.action_costs().to_vec(), self.default_cost, base.incentives().to_vec(), self.gamma)
            .map_err(|e| CliError::Config(format!("default_cost: {e}")))
    }

    pub fn joint_prior(&self) -> Result<JointPrior, CliError> {
        let (n, k) = (self.n_actions, self.n_incentives);
        let prior = match &self.prior {
            PriorSpec::Named(_) => JointPrior::uniform(n, k),
            PriorSpec::Table(entries) => {
                let mut converted = Vec::with_capacity(entries.len());
                for e in entries {
                    if e.thresholds.contains(&0) {
                        return Err(CliError::Config("prior: thresholds are one-based".into()));
                    }
                    converted.push((e.thresholds.iter().map(|t| t - 1).collect(), e.weight));
                }
                JointPrior::normalized(n, k, converted)
            }
        };
        prior.map_err(|e| CliError::Config(format!("prior: {e}")))
    }
}

/// Comma-separated integers with `a-b` ranges, e.g. `1-5,10`.
pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("{part:?} is not an integer or a-b range");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

/// `NxK` pairs separated by commas, e.g. `3x2,3x3`. Empty input is an empty grid.
pub fn parse_grid(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (n, k) = p.split_once('x').ok_or_else(|| format!("grid entry {p:?} is not NxK"))?;
            let n = n.parse().map_err(|_| format!("grid entry {p:?}: bad N"))?;
            let k = k.parse().map_err(|_| format!("grid entry {p:?}: bad K"))?;
            Ok((n, k))
        })
        .collect()
}
