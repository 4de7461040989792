use std::fs::File;
use std::io::Write;
use std::path::Path;

use idp_core::oracle::policy_expected_cost;
use idp_core::sim::{bench_planning, monte_carlo, plan, run_episode, stream_rng, EpisodeStep};
use idp_core::solver_seq::{seq_bound, seq_bound_alt};
use idp_core::{Algorithm, Decision, TrueIncentives};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::{CliError, Format};

const BOUND_TOL: f64 = 1e-9;

fn write_json<W: Write + ?Sized, T: Serialize>(out: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn describe(decision: Decision) -> String {
    match decision {
        Decision::Probe(o) => format!("probe {o}"),
        Decision::Commit(o) => format!("commit {o}"),
    }
}

#[derive(Serialize)]
struct SolveRecord {
    algorithm: Algorithm,
    horizon: Option<usize>,
    value: f64,
    first_offer: String,
    reachable_states: usize,
    plan_time_ms: f64,
}

pub fn solve<W: Write + ?Sized>(cfg: &ExperimentConfig, format: Format, out: &mut W) -> Result<(), CliError> {
    let (model, prior) = (cfg.model()?, cfg.joint_prior()?);
    let planners: Vec<Algorithm> = cfg
        .algorithms
        .iter()
        .copied()
        .filter(|a| matches!(a, Algorithm::Exact | Algorithm::Seq))
        .collect();
    if planners.is_empty() {
        return Err(CliError::Config("algorithms: solve needs exact or seq".into()));
    }
    let discounted = cfg.gamma < 1.0;
    let horizons: &[usize] = if discounted { &cfg.horizons[..1] } else { &cfg.horizons };
    let mut records = Vec::new();
    for &h in horizons {
        for &alg in &planners {
            let planned = plan(alg, &model, &prior, h)?;
            let (root, states) = match (planned.exact_solution(), planned.seq_solution()) {
                (Some(s), _) => (s.root(), s.node_count()),
                (_, Some(s)) => (s.root(), s.state_count()),
                _ => unreachable!("planners only"),
            };
            records.push(SolveRecord {
                algorithm: alg,
                horizon: (!discounted).then_some(h),
                value: root.value,
                first_offer: describe(root.decision),
                reachable_states: states,
                plan_time_ms: ms(planned.plan_time),
            });
        }
    }
    match format {
        Format::Json => write_json(out, &records)?,
        Format::Text => {
            for r in &records {
                let h = r.horizon.map_or("inf".to_string(), |h| h.to_string());
                writeln!(
                    out,
                    "{} H={h}: V = {:.6}, first offer {}, {} states, planned in {:.3} ms",
                    r.algorithm, r.value, r.first_offer, r.reachable_states, r.plan_time_ms
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareRow {
    algorithm: Algorithm,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    eta: f64,
    #[serde(rename = "H")]
    h: usize,
    round: usize,
    mean_cost: f64,
    plan_time_ms: f64,
}

#[derive(Serialize)]
pub struct CompareSummary {
    algorithm: Algorithm,
    #[serde(rename = "H")]
    h: usize,
    grand_mean: f64,
    stderr: f64,
    ratio_to_exact: Option<f64>,
}

/// Writes the per-round CSV to `csv_out` and returns the JSON summary records.
pub fn compare<W: Write>(cfg: &ExperimentConfig, csv_out: W) -> Result<Vec<CompareSummary>, CliError> {
    let (model, prior) = (cfg.model()?, cfg.joint_prior()?);
    let mut writer = csv::Writer::from_writer(csv_out);
    let mut summary = Vec::new();
    for &h in &cfg.horizons {
        let mut exact_mean = None;
        let mut block = Vec::new();
        for &alg in &cfg.algorithms {
            let planned = plan(alg, &model, &prior, h)?;
            let stats = monte_carlo(&model, &prior, || planned.decider(), h, cfg.runs, cfg.rounds, cfg.seed)?;
            for (round, &mean_cost) in stats.round_means.iter().enumerate() {
                writer.serialize(CompareRow {
                    algorithm: alg,
                    n: cfg.n_actions,
                    k: cfg.n_incentives,
                    eta: cfg.eta,
                    h,
                    round,
                    mean_cost,
                    plan_time_ms: ms(planned.plan_time),
                })?;
            }
            if alg == Algorithm::Exact {
                exact_mean = Some(stats.grand_mean);
            }
            let stderr = if cfg.rounds > 1 { stats.round_stderr() } else { stats.run_stderr() };
            block.push(CompareSummary { algorithm: alg, h, grand_mean: stats.grand_mean, stderr, ratio_to_exact: None });
        }
        for s in &mut block {
            s.ratio_to_exact = exact_mean.map(|e| s.grand_mean / e);
        }
        summary.extend(block);
    }
    writer.flush()?;
    Ok(summary)
}

#[derive(Serialize)]
struct BoundRecord {
    horizon: Option<usize>,
    optimal_value: f64,
    seq_value: f64,
    forward_slack: f64,
    reverse_slack: f64,
    gap: f64,
    holds: bool,
}

pub fn bound<W: Write + ?Sized>(cfg: &ExperimentConfig, format: Format, out: &mut W) -> Result<(), CliError> {
    let (model, prior) = (cfg.model()?, cfg.joint_prior()?);
    let forward = seq_bound(&model).slack;
    let reverse = seq_bound_alt(&model).slack;
    let discounted = cfg.gamma < 1.0;
    let horizons: &[usize] = if discounted { &cfg.horizons[..1] } else { &cfg.horizons };
    let mut records = Vec::new();
    for &h in horizons {
        let v = plan(Algorithm::Exact, &model, &prior, h)?.planned_value().unwrap();
        let s = plan(Algorithm::Seq, &model, &prior, h)?.planned_value().unwrap();
        let gap = s - v;
        records.push(BoundRecord {
            horizon: (!discounted).then_some(h),
            optimal_value: v,
            seq_value: s,
            forward_slack: forward,
            reverse_slack: reverse,
            gap,
            holds: gap >= -BOUND_TOL && gap <= forward + BOUND_TOL,
        });
    }
    match format {
        Format::Json => write_json(out, &records)?,
        Format::Text => {
            for r in &records {
                let h = r.horizon.map_or("inf".to_string(), |h| h.to_string());
                writeln!(
                    out,
                    "H={h}: V* = {:.6}, V_seq = {:.6}, gap = {:.6}, forward slack = {:.6}, reverse slack = {:.6}{}",
                    r.optimal_value,
                    r.seq_value,
                    r.gap,
                    r.forward_slack,
                    r.reverse_slack,
                    if r.holds { "" } else { "  VIOLATED" }
                )?;
            }
        }
    }
    if let Some(bad) = records.iter().find(|r| !r.holds) {
        return Err(CliError::Invariant(format!(
            "bound violated: gap {} outside [0, {}]",
            bad.gap, bad.forward_slack
        )));
    }
    Ok(())
}

pub fn bench<W: Write>(
    cfg: &ExperimentConfig,
    grid: &[(usize, usize)],
    reps: usize,
    out: W,
) -> Result<(), CliError> {
    let rows = bench_planning(grid, &cfg.algorithms, cfg.eta, cfg.horizons[0], reps)?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["algorithm", "N", "K", "median_plan_time_ms"])?;
    for r in rows {
        writer.write_record([
            r.algorithm.name().to_string(),
            r.n_actions.to_string(),
            r.n_incentives.to_string(),
            ms(r.median_plan_time).to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateReport {
    algorithm: Algorithm,
    horizon: usize,
    seed: u64,
    /// One-based.
    thresholds: Vec<usize>,
    steps: Vec<EpisodeStep>,
    total_cost: f64,
    expected_cost: Option<f64>,
}

pub fn simulate<W: Write + ?Sized>(
    cfg: &ExperimentConfig,
    truth: Option<&[usize]>,
    format: Format,
    out: &mut W,
) -> Result<(), CliError> {
    let (model, prior) = (cfg.model()?, cfg.joint_prior()?);
    let (alg, h) = (cfg.algorithms[0], cfg.horizons[0]);
    let truth = match truth {
        Some(t) => {
            if t.contains(&0) {
                return Err(CliError::Config("truth: thresholds are one-based".into()));
            }
            TrueIncentives::new(t.iter().map(|x| x - 1).collect(), cfg.n_incentives)
                .map_err(|e| CliError::Config(format!("truth: {e}")))?
        }
        None => prior.sample(&mut stream_rng(cfg.seed, 0, 0)),
    };
    if truth.thresholds().len() != cfg.n_actions {
        return Err(CliError::Config(format!("truth: expected {} thresholds", cfg.n_actions)));
    }
    let planned = plan(alg, &model, &prior, h)?;
    let mut decider = planned.decider();
    decider.reset();
    let trace = run_episode(&model, &mut decider, &truth, h)?;
    let expected_cost = match planned.planned_value() {
        Some(v) if cfg.gamma == 1.0 => Some(v),
        _ if cfg.gamma == 1.0 => Some(policy_expected_cost(&model, &prior, &mut planned.decider(), h)?),
        _ => None,
    };
    let report = SimulateReport {
        algorithm: alg,
        horizon: h,
        seed: cfg.seed,
        thresholds: truth.thresholds().iter().map(|t| t + 1).collect(),
        steps: trace.steps,
        total_cost: trace.total_cost,
        expected_cost,
    };
    match format {
        Format::Json => write_json(out, &report)?,
        Format::Text => {
            let t: Vec<String> = report.thresholds.iter().map(|t| format!("δ_{t}")).collect();
            writeln!(out, "{} over H={} against thresholds ({})", alg, h, t.join(", "))?;
            for s in &report.steps {
                writeln!(out, "{:>4}  offer {}  {:?}  cost {}", s.step + 1, s.offer, s.outcome, s.cost)?;
            }
            writeln!(out, "total cost {}", report.total_cost)?;
            if let Some(e) = report.expected_cost {
                writeln!(out, "expected cost under the prior {e:.6}")?;
            }
        }
    }
    Ok(())
}

pub fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}
