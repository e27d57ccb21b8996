//! Command-line arguments. The parsed values double as the resolved
//! configuration recorded in every report.

use std::path::PathBuf;

use bayes_rmst::inference::Priors;
use bayes_rmst::simulation::Scenario;
use bayes_rmst::{EffectKind, Family, SamplerConfig};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::ingest::ColumnSpec;

#[derive(Debug, Parser)]
#[command(name = "bayes-rmst", version, about = "Bayesian restricted mean survival time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a CSV file and summarise parameters and RMSTs.
    Fit(FitArgs),
    /// Repeatedly simulate a scenario, fit it, and score the RMST difference.
    Simulate(SimulateArgs),
    /// Evaluate a closed-form RMST for given parameters.
    Rmst(RmstArgs),
    /// Compare models by WAIC on one dataset.
    Waic(WaicArgs),
    /// Write one simulated scenario dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "time")]
    pub time_col: String,
    /// Event indicator column (1 = event, 0 = censored).
    #[arg(long, default_value = "event")]
    pub event_col: String,
    /// Two-level group column compared by the RMST difference.
    #[arg(long, default_value = "group")]
    pub group_col: String,
    /// Covariate column (repeatable); default: every other column.
    #[arg(long = "covariate")]
    pub covariates: Vec<String>,
    /// Cluster column; default: `cluster` when present.
    #[arg(long)]
    pub cluster_col: Option<String>,
}

impl DataArgs {
    pub fn column_spec(&self) -> ColumnSpec {
        let default = ColumnSpec::default();
        ColumnSpec {
            time: self.time_col.clone(),
            event: self.event_col.clone(),
            group: self.group_col.clone(),
            covariates: (!self.covariates.is_empty()).then(|| self.covariates.clone()),
            cluster: self.cluster_col.clone().or(default.cluster),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 2)]
    pub chains: usize,
    /// Iterations per chain, burn-in included.
    #[arg(long = "iter", default_value_t = 2000)]
    pub iterations: usize,
    #[arg(long = "burnin", default_value_t = 1000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Prior variance of every regression coefficient.
    #[arg(long, default_value_t = 100.0)]
    pub coef_variance: f64,
}

impl SamplerArgs {
    pub fn config(&self) -> SamplerConfig {
        SamplerConfig {
            chains: self.chains,
            iterations: self.iterations,
            burn_in: self.burn_in,
            seed: self.seed,
            ..SamplerConfig::default()
        }
    }

    pub fn priors(&self) -> Priors {
        Priors { coef_variance: vec![self.coef_variance], ..Priors::default() }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub family: Family,
    #[arg(long, default_value = "none")]
    pub effect: EffectKind,
    #[arg(long, default_value_t = 100.0)]
    pub tau: f64,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = 0.95)]
    pub ci_level: f64,
    /// Report P(difference < value) (repeatable).
    #[arg(long = "threshold", allow_negative_numbers = true)]
    pub thresholds: Vec<f64>,
    /// Covariate value for the RMST, as NAME=VALUE (repeatable; default 0).
    #[arg(long = "at")]
    pub at: Vec<String>,
    /// Histogram bins for the RMST difference.
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    /// Integrate log-normal frailty RMSTs numerically.
    #[arg(long)]
    pub exact: bool,
    /// JSON report path; a `.txt` table is written beside it.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub replications: usize,
    #[arg(long, default_value_t = 4)]
    pub clusters: usize,
    #[arg(long)]
    pub family: Family,
    #[arg(long, default_value = "none")]
    pub effect: EffectKind,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RmstArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long, default_value = "none")]
    pub effect: EffectKind,
    /// Exponential rate or Weibull scale.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Weibull or log-logistic shape.
    #[arg(long)]
    pub k: Option<f64>,
    /// Log-logistic or log-normal location.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Log-normal variance.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Time scale for the alternate Weibull/log-logistic form.
    #[arg(long)]
    pub time_scale: Option<f64>,
    /// Random effect.
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    /// Frailty.
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WaicArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Family to fit (repeatable).
    #[arg(long = "family", required = true)]
    pub families: Vec<Family>,
    #[arg(long, default_value = "none")]
    pub effect: EffectKind,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub scenario: Scenario,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub clusters: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub replicate: u64,
    /// CSV destination.
    #[arg(long)]
    #[serde(skip)]
    pub output: PathBuf,
}
