//! `idp`: solve, compare, bound-check, benchmark and simulate incentive
//! decision processes.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use idp_core::{Algorithm, IdpError};

use config::{parse_grid, parse_list, ExperimentConfig, PriorSpec};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or flags; exit code 2.
    Config(String),
    /// An invariant the planners guarantee was violated; exit code 3.
    Invariant(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violation: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<IdpError> for CliError {
    fn from(e: IdpError) -> Self {
        match e {
            IdpError::Validation(_)
            | IdpError::InvalidPrior(_)
            | IdpError::InvalidRanges(_)
            | IdpError::InvalidHorizon
            | IdpError::DiscountedFiniteUnsupported(_)
            | IdpError::UndiscountedInfinite => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "idp", version, about = "Incentive decision process planner and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan each horizon and report the value and first decision.
    Solve(Common),
    /// Monte Carlo comparison of the algorithms over the horizons (CSV).
    Compare(Common),
    /// Check the sequential-restriction gap against its bound.
    Bound(Common),
    /// Median planning time over a grid of sizes (CSV).
    Bench {
        #[command(flatten)]
        common: Common,
        /// Sizes as NxK pairs, e.g. `3x2,3x3`. Defaults to the configured size.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Run and trace a single episode.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// One-based thresholds of the agent, e.g. `3,1`. Sampled from the prior with the seed otherwise.
        #[arg(long)]
        truth: Option<String>,
    },
}

/// Flags override the matching keys of `--config`.
#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, visible_alias = "n")]
    n_actions: Option<usize>,
    #[arg(long, visible_alias = "k")]
    n_incentives: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    #[arg(long)]
    default_cost: Option<f64>,
    /// Comma-separated horizons with `a-b` ranges, e.g. `1-20`.
    #[arg(long, visible_alias = "horizon")]
    horizons: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    /// `uniform` or one-based entries like `2,1=0.5;1,1=0.5`.
    #[arg(long)]
    prior: Option<PriorSpec>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            )*};
        }
        set!(n_actions, n_incentives, eta, default_cost, gamma, prior, algorithms, runs, rounds, seed);
        if let Some(h) = &self.horizons {
            cfg.horizons = parse_list(h).map_err(|e| CliError::Config(format!("horizons: {e}")))?;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        cfg.validate()?;
        let logged: Vec<String> = cfg.to_toml().lines().map(|l| format!("# {l}")).collect();
        eprintln!("# resolved config\n{}", logged.join("\n"));
        Ok(cfg)
    }
}

fn with_output<F>(cfg: &ExperimentConfig, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match &cfg.output {
        Some(path) => f(&mut commands::create(path)?),
        None => f(&mut std::io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = c.resolve()?;
            with_output(&cfg, |out| commands::solve(&cfg, c.format, out))
        }
        Command::Bound(c) => {
            let cfg = c.resolve()?;
            with_output(&cfg, |out| commands::bound(&cfg, c.format, out))
        }
        Command::Compare(c) => {
            let cfg = c.resolve()?;
            let summary = match &cfg.output {
                Some(path) => commands::compare(&cfg, commands::create(path)?)?,
                None => commands::compare(&cfg, std::io::stdout())?,
            };
            let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
            match &cfg.output {
                Some(path) => {
                    let summary_path = path.with_extension("summary.json");
                    writeln!(commands::create(&summary_path)?, "{json}")?;
                    println!("{json}");
                }
                None => eprintln!("{json}"),
            }
            Ok(())
        }
        Command::Bench { common, grid, reps } => {
            let cfg = common.resolve()?;
            let grid = match grid {
                Some(g) => parse_grid(&g).map_err(|e| CliError::Config(format!("grid: {e}")))?,
                None => vec![(cfg.n_actions, cfg.n_incentives)],
            };
            with_output(&cfg, |out| commands::bench(&cfg, &grid, reps, out))
        }
        Command::Simulate { common, truth } => {
            let cfg = common.resolve()?;
            let truth = truth
                .map(|t| parse_list(&t).map_err(|e| CliError::Config(format!("truth: {e}"))))
                .transpose()?;
            with_output(&cfg, |out| commands::simulate(&cfg, truth.as_deref(), common.format, out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
