//! Synthetic two-group clustered survival data and the replication harness
//! that scores posterior RMST differences against known truths.
//!
//! Scenario linear predictors use `η = β₀ + β₁ x₁ + β₂ x₂ + u`:
//!
//! * A: log-logistic with `S(t) = 1 / (1 + (e^{-η} t)^k)`, i.e. location `-kη`
//! * B: log-normal with log-mean `η` and variance `σ²`
//! * C: exponential with rate `e^η`
//!
//! Each subject is independently censored with the configured probability at
//! a time uniform on `(0, T)`; anything beyond the administrative cap is then
//! censored at the cap.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::families::FamilyParams;
use crate::inference::ModelSpec;
use crate::rmst::{rmst_base, rmst_distribution, RmstQuery};
use crate::sampler::{run_chains, SamplerConfig};
use crate::seeds::derive_seed;
use crate::summaries::summarize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    A,
    B,
    C,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::A => "A",
            Scenario::B => "B",
            Scenario::C => "C",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Scenario::A),
            "B" => Ok(Scenario::B),
            "C" => Ok(Scenario::C),
            _ => Err(Error::Config(format!("unknown scenario `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub clusters: usize,
    pub beta: [f64; 3],
    pub random_effect_variance: f64,
    /// `k` for scenario A, `σ²` for B; unused for C.
    pub shape: f64,
    pub censor_probability: f64,
    pub admin_cap: f64,
    pub tau: f64,
    pub replications: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, n: usize) -> Self {
        let (beta, shape) = match scenario {
            Scenario::A => ([5.0, -0.2, 1.0], 2.0),
            Scenario::B => ([3.0, -0.5, 1.0], 1.0),
            Scenario::C => ([-4.5, 0.5, 1.0], 1.0),
        };
        Self {
            scenario,
            n,
            clusters: 4,
            beta,
            random_effect_variance: 0.1,
            shape,
            censor_probability: 0.1,
            admin_cap: 100.0,
            tau: 100.0,
            replications: 10,
            seed: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.n == 0 || self.n % (2 * self.clusters) != 0 {
            return Err(Error::Config(format!(
                "n = {} must be a positive multiple of 2 × {} clusters",
                self.n, self.clusters
            )));
        }
        if !(0.0..=1.0).contains(&self.censor_probability) {
            return Err(Error::Config("censoring probability outside [0, 1]".into()));
        }
        if !(self.random_effect_variance >= 0.0 && self.random_effect_variance.is_finite()) {
            return Err(Error::Config("random-effect variance must be >= 0".into()));
        }
        if self.scenario != Scenario::C && !(self.shape > 0.0 && self.shape.is_finite()) {
            return Err(Error::Config("shape must be > 0".into()));
        }
        if !(self.admin_cap > 0.0 && self.tau > 0.0) {
            return Err(Error::Config("cap and tau must be > 0".into()));
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Data-generating distribution at linear predictor `eta`.
    pub fn params_at(&self, eta: f64) -> FamilyParams<f64> {
        match self.scenario {
            Scenario::A => FamilyParams::LogLogistic { location: -self.shape * eta, shape: self.shape },
            Scenario::B => FamilyParams::LogNormal { location: eta, variance: self.shape },
            Scenario::C => FamilyParams::Exponential { rate: eta.exp() },
        }
    }

    /// Distribution of a group at `x₂ = 0`, `u = 0`.
    pub fn group_params(&self, group: f64) -> FamilyParams<f64> {
        self.params_at(self.beta[0] + self.beta[1] * group)
    }
}

/// Uncensored event times with their covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSample {
    pub group: Vec<f64>,
    pub x2: Vec<f64>,
    pub cluster: Vec<usize>,
    pub effects: Vec<f64>,
    pub time: Vec<f64>,
}

fn replicate_rng(cfg: &ScenarioConfig, replicate: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, replicate))
}

fn latent_from(cfg: &ScenarioConfig, rng: &mut ChaCha20Rng) -> Result<LatentSample> {
    cfg.validate()?;
    let re = Normal::new(0.0, cfg.random_effect_variance.sqrt()).map_err(|e| Error::Config(e.to_string()))?;
    let effects: Vec<f64> = (0..cfg.clusters).map(|_| re.sample(rng)).collect();
    let mut out = LatentSample {
        group: Vec::with_capacity(cfg.n),
        x2: Vec::with_capacity(cfg.n),
        cluster: Vec::with_capacity(cfg.n),
        effects: effects.clone(),
        time: Vec::with_capacity(cfg.n),
    };
    for i in 0..cfg.n {
        let cluster = i % cfg.clusters;
        let group = ((i / cfg.clusters) % 2) as f64;
        let x2: f64 = rng.sample(StandardNormal);
        let eta = cfg.beta[0] + cfg.beta[1] * group + cfg.beta[2] * x2 + effects[cluster];
        // 1 - U with U in [0, 1) keeps the survival level in (0, 1].
        let s: f64 = 1.0 - rng.random::<f64>();
        let t = match cfg.scenario {
            Scenario::A => eta.exp() * ((1.0 - s) / s).powf(1.0 / cfg.shape),
            Scenario::B => (eta + cfg.shape.sqrt() * rng.sample::<f64, _>(StandardNormal)).exp(),
            Scenario::C => -s.ln() / eta.exp(),
        };
        out.group.push(group);
        out.x2.push(x2);
        out.cluster.push(cluster);
        out.time.push(t);
    }
    Ok(out)
}

/// Event times before any censoring for replicate `replicate`.
pub fn latent_sample(cfg: &ScenarioConfig, replicate: u64) -> Result<LatentSample> {
    latent_from(cfg, &mut replicate_rng(cfg, replicate))
}

/// Observed dataset for replicate `replicate`, with design columns
/// `(Intercept)`, `group`, `x2`.
pub fn generate_scenario(cfg: &ScenarioConfig, replicate: u64) -> Result<SurvivalDataset> {
    let mut rng = replicate_rng(cfg, replicate);
    let latent = latent_from(cfg, &mut rng)?;
    let n = cfg.n;
    let mut time = Vec::with_capacity(n);
    let mut event = Vec::with_capacity(n);
    for &t in &latent.time {
        let censored = rng.random::<f64>() < cfg.censor_probability;
        let (mut obs, mut d) = if censored {
            (t * (1.0 - rng.random::<f64>()), false)
        } else {
            (t, true)
        };
        if obs > cfg.admin_cap {
            obs = cfg.admin_cap;
            d = false;
        }
        // Underflow guard for extreme draws.
        time.push(obs.max(f64::MIN_POSITIVE));
        event.push(d);
    }
    let design = (0..n).map(|i| vec![1.0, latent.group[i], latent.x2[i]]).collect();
    SurvivalDataset::new(
        time,
        event,
        design,
        latent.cluster,
        vec!["(Intercept)".into(), "group".into(), "x2".into()],
        (1..=cfg.clusters).map(|c| c.to_string()).collect(),
    )
}

/// Group RMSTs at `x₂ = 0`, `u = 0` and their difference (group 1 minus
/// group 0).
pub fn scenario_truth(cfg: &ScenarioConfig) -> Result<(f64, f64, f64)> {
    let g0 = rmst_base(&cfg.group_params(0.0), cfg.tau)?;
    let g1 = rmst_base(&cfg.group_params(1.0), cfg.tau)?;
    Ok((g0, g1, g1 - g0))
}

/// Posterior RMST-difference summary of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub truth: f64,
    /// Average of `mean - truth`.
    pub bias: f64,
    /// Average of `(mean - truth)²`.
    pub mse: f64,
    /// Average of `mode - truth`.
    pub mode: f64,
    /// Average of `median - truth`.
    pub median: f64,
    /// Fraction of credible intervals containing the truth.
    pub coverage: f64,
    pub replications: usize,
    pub failures: usize,
}

impl SimMetrics {
    /// Aggregates replicate records (order-independent).
    pub fn from_records(truth: f64, records: &[ReplicateRecord], failures: usize) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InsufficientDraws { need: 1, got: 0 });
        }
        let mut sorted = records.to_vec();
        sorted.sort_by_key(|r| r.replicate);
        let n = sorted.len() as f64;
        let avg = |f: &dyn Fn(&ReplicateRecord) -> f64| sorted.iter().map(f).sum::<f64>() / n;
        Ok(Self {
            truth,
            bias: avg(&|r| r.mean - truth),
            mse: avg(&|r| (r.mean - truth).powi(2)),
            mode: avg(&|r| r.mode - truth),
            median: avg(&|r| r.median - truth),
            coverage: avg(&|r| f64::from(u8::from(r.lo <= truth && truth <= r.hi))),
            replications: sorted.len(),
            failures,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub replicate: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub metrics: SimMetrics,
    pub records: Vec<ReplicateRecord>,
    pub failures: Vec<ReplicateFailure>,
}

/// Fits one replicate and summarises its RMST-difference posterior.
pub fn fit_replicate(
    cfg: &ScenarioConfig,
    spec: &ModelSpec,
    sampler: &SamplerConfig,
    replicate: u64,
    level: f64,
) -> Result<ReplicateRecord> {
    let data = generate_scenario(cfg, replicate)?;
    let scfg = SamplerConfig { seed: derive_seed(sampler.seed, replicate), ..sampler.clone() };
    let draws = run_chains(&data, spec, &scfg)?;
    let mut q = RmstQuery::new(cfg.tau);
    q.covariates = vec![0.0];
    let dist = rmst_distribution(&draws, &q)?;
    let s = summarize(&dist.difference.values, level, &[])?;
    Ok(ReplicateRecord { replicate, mean: s.mean, median: s.median, mode: s.mode, lo: s.lo, hi: s.hi })
}

/// Runs `cfg.replications` fits in parallel and scores them against the
/// scenario truth with 95% intervals.
pub fn evaluate_replications(cfg: &ScenarioConfig, spec: &ModelSpec, sampler: &SamplerConfig) -> Result<SimReport> {
    cfg.validate()?;
    sampler.validate()?;
    let (_, _, truth) = scenario_truth(cfg)?;
    let results: Vec<(u64, Result<ReplicateRecord>)> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| (r, fit_replicate(cfg, spec, sampler, r, 0.95)))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in results {
        match res {
            Ok(rec) => records.push(rec),
            Err(e) => {
                log::warn!("replicate {r} failed: {e}");
                failures.push(ReplicateFailure { replicate: r, error: e.to_string() });
            }
        }
    }
    let metrics = SimMetrics::from_records(truth, &records, failures.len())?;
    Ok(SimReport { metrics, records, failures })
}
