//! Subcommand implementations.

use bayes_rmst::diagnostics::{effective_sample_size, split_rhat};
use bayes_rmst::rmst::{rmst_alt, rmst_conditional, rmst_distribution};
use bayes_rmst::sampler::run_chains;
use bayes_rmst::simulation::{evaluate_replications, generate_scenario, scenario_truth, ScenarioConfig};
use bayes_rmst::summaries::{forest_rows, histogram_bins, summarize};
use bayes_rmst::waic::waic;
use bayes_rmst::{
    AltFamilyParams, ClusterSelector, EffectKind, EffectValue, Family, FamilyParams, ModelSpec, PosteriorDraws,
    RmstQuery, SurvivalDataset,
};

use crate::args::{FitArgs, GenerateArgs, RmstArgs, SimulateArgs, WaicArgs};
use crate::error::{CliError, Result};
use crate::ingest::{export_csv, ingest_csv};
use crate::report::{
    DataInfo, FitReport, ParamRow, RmstReport, RmstRow, SimulateReport, Tool, Truth, WaicReport, WaicRow, WaicSummary,
};

const MIN_WAIC_DRAWS: usize = 100;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn data_info(data: &SurvivalDataset) -> DataInfo {
    DataInfo {
        rows: data.len(),
        events: data.event_count(),
        covariates: data.covariate_names().to_vec(),
        clusters: data.cluster_labels().to_vec(),
    }
}

/// Values for design columns 2.. from `NAME=VALUE` pairs; unnamed columns
/// stay at zero.
fn covariate_values(data: &SurvivalDataset, at: &[String]) -> Result<Vec<f64>> {
    let names = data.covariate_names();
    let mut values = vec![0.0; names.len().saturating_sub(2)];
    for item in at {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--at expects NAME=VALUE, got `{item}`")))?;
        let j = names
            .iter()
            .skip(2)
            .position(|n| n == name.trim())
            .ok_or_else(|| usage(format!("--at: `{name}` is not an adjustable covariate")))?;
        values[j] = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("--at: `{value}` is not a number")))?;
    }
    Ok(values)
}

fn parameter_rows(draws: &PosteriorDraws, level: f64) -> Result<Vec<ParamRow>> {
    (0..draws.dim())
        .map(|j| {
            let values: Vec<f64> = draws.column(j).concat();
            let s = summarize(&values, level, &[])?;
            Ok(ParamRow {
                name: draws.column_names()[j].clone(),
                mode: s.mode,
                median: s.median,
                mean: s.mean,
                se: s.sd,
                lo: s.lo,
                hi: s.hi,
                rhat: split_rhat(draws, j).ok(),
                ess: effective_sample_size(draws, j).ok(),
            })
        })
        .collect()
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--ci-level {level} must lie in (0, 1)")))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--tau {tau} must be positive")))
    }
}

pub fn fit(args: &FitArgs) -> Result<FitReport> {
    check_tau(args.tau)?;
    check_level(args.ci_level)?;
    if args.bins == 0 {
        return Err(usage("--bins must be positive"));
    }
    let data = ingest_csv(&args.data.input, &args.data.column_spec())?;
    let covariates = covariate_values(&data, &args.at)?;
    let spec = ModelSpec::new(args.family, args.effect).with_priors(args.sampler.priors());
    let draws = run_chains(&data, &spec, &args.sampler.config())?;
    let level = args.ci_level;

    let query = RmstQuery { tau: args.tau, covariates, cluster: ClusterSelector::Marginal, exact: args.exact };
    let dist = rmst_distribution(&draws, &query)?;
    let mut rmst = Vec::new();
    for (label, v) in [("group 0", &dist.group0), ("group 1", &dist.group1), ("difference", &dist.difference)] {
        rmst.push(RmstRow { label: label.into(), summary: summarize(&v.values, level, &args.thresholds)? });
    }
    let marginal = &rmst[2].summary;
    let mut clusters = Vec::new();
    if args.effect != EffectKind::None {
        for (c, label) in data.cluster_labels().iter().enumerate() {
            let q = RmstQuery { cluster: ClusterSelector::Cluster(c), ..query.clone() };
            let d = rmst_distribution(&draws, &q)?;
            clusters.push((label.clone(), summarize(&d.difference.values, level, &[])?));
        }
    }
    let forest = forest_rows(&clusters, marginal);
    let histogram = histogram_bins(&dist.difference.values, args.bins)?;
    let waic = if draws.len() >= MIN_WAIC_DRAWS {
        let w = waic(&data, &spec, &draws)?;
        Some(WaicSummary { waic: w.waic, lppd: w.lppd, p_waic: w.p_waic })
    } else {
        None
    };
    Ok(FitReport {
        tool: Tool::current(),
        config: args.clone(),
        data: data_info(&data),
        parameters: parameter_rows(&draws, level)?,
        rmst,
        forest,
        histogram,
        waic,
        acceptance: draws.acceptance().to_vec(),
    })
}

fn scenario_config(scenario: bayes_rmst::Scenario, n: usize, clusters: usize, seed: u64) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::new(scenario, n).with_seed(seed);
    cfg.clusters = clusters;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs) -> Result<SimulateReport> {
    let mut cfg = scenario_config(args.scenario, args.n, args.clusters, args.sampler.seed)?;
    if args.replications == 0 {
        return Err(usage("--replications must be positive"));
    }
    cfg.replications = args.replications;
    let spec = ModelSpec::new(args.family, args.effect).with_priors(args.sampler.priors());
    let (group0, group1, difference) = scenario_truth(&cfg)?;
    let result = evaluate_replications(&cfg, &spec, &args.sampler.config())?;
    Ok(SimulateReport {
        tool: Tool::current(),
        config: args.clone(),
        truth: Truth { group0, group1, difference },
        result,
    })
}

fn require(value: Option<f64>, flag: &str, family: Family) -> Result<f64> {
    value.ok_or_else(|| usage(format!("{family} needs --{flag}")))
}

fn reject(values: &[(Option<f64>, &str)], family: Family) -> Result<()> {
    match values.iter().find(|(v, _)| v.is_some()) {
        Some((_, flag)) => Err(usage(format!("--{flag} does not apply to {family}"))),
        None => Ok(()),
    }
}

fn rmst_params(a: &RmstArgs) -> Result<(FamilyParams, Option<AltFamilyParams<f64>>)> {
    let f = a.family;
    let (lambda, k, mu, s2, ts) = (
        (a.lambda, "lambda"),
        (a.k, "k"),
        (a.mu, "mu"),
        (a.sigma2, "sigma2"),
        (a.time_scale, "time-scale"),
    );
    match f {
        Family::Exponential => {
            reject(&[k, mu, s2, ts], f)?;
            Ok((FamilyParams::Exponential { rate: require(lambda.0, lambda.1, f)? }, None))
        }
        Family::Weibull => {
            reject(&[mu, s2], f)?;
            let shape = require(k.0, k.1, f)?;
            match (lambda.0, ts.0) {
                (Some(scale), None) => Ok((FamilyParams::Weibull { scale, shape }, None)),
                (None, Some(time_scale)) => {
                    let alt = AltFamilyParams::Weibull { time_scale, shape };
                    alt.validate()?;
                    Ok((alt.to_standard(), Some(alt)))
                }
                _ => Err(usage("weibull needs exactly one of --lambda and --time-scale")),
            }
        }
        Family::LogLogistic => {
            reject(&[lambda, s2], f)?;
            let shape = require(k.0, k.1, f)?;
            match (mu.0, ts.0) {
                (Some(location), None) => Ok((FamilyParams::LogLogistic { location, shape }, None)),
                (None, Some(time_scale)) => {
                    let alt = AltFamilyParams::LogLogistic { time_scale, shape };
                    alt.validate()?;
                    Ok((alt.to_standard(), Some(alt)))
                }
                _ => Err(usage("loglogistic needs exactly one of --mu and --time-scale")),
            }
        }
        Family::LogNormal => {
            reject(&[lambda, k, ts], f)?;
            Ok((
                FamilyParams::LogNormal { location: require(mu.0, mu.1, f)?, variance: require(s2.0, s2.1, f)? },
                None,
            ))
        }
    }
}

pub fn rmst(args: &RmstArgs) -> Result<RmstReport> {
    check_tau(args.tau)?;
    let (params, alt) = rmst_params(args)?;
    let effect = match args.effect {
        EffectKind::None => {
            reject(&[(args.u, "u"), (args.v, "v")], args.family)?;
            EffectValue::None
        }
        EffectKind::Random => {
            if args.v.is_some() {
                return Err(usage("--v applies to the frailty effect"));
            }
            EffectValue::RandomOffset(args.u.ok_or_else(|| usage("random effect needs --u"))?)
        }
        EffectKind::Frailty => {
            if args.u.is_some() {
                return Err(usage("--u applies to the random effect"));
            }
            EffectValue::Frailty(args.v.ok_or_else(|| usage("frailty needs --v"))?)
        }
    };
    let value = match (alt, effect) {
        (Some(alt), EffectValue::None) => rmst_alt(&alt, args.tau)?,
        _ => rmst_conditional(&params, effect, args.tau, args.exact)?,
    };
    Ok(RmstReport { tool: Tool::current(), config: args.clone(), params, rmst: value })
}

pub fn waic_compare(args: &WaicArgs) -> Result<WaicReport> {
    let data = ingest_csv(&args.data.input, &args.data.column_spec())?;
    let cfg = args.sampler.config();
    let mut models = Vec::new();
    for &family in &args.families {
        let spec = ModelSpec::new(family, args.effect).with_priors(args.sampler.priors());
        let draws = run_chains(&data, &spec, &cfg)?;
        let w = waic(&data, &spec, &draws)?;
        models.push(WaicRow {
            family: family.to_string(),
            effect: args.effect.to_string(),
            waic: WaicSummary { waic: w.waic, lppd: w.lppd, p_waic: w.p_waic },
        });
    }
    models.sort_by(|a, b| a.waic.waic.total_cmp(&b.waic.waic));
    Ok(WaicReport { tool: Tool::current(), config: args.clone(), data: data_info(&data), models })
}

pub fn generate(args: &GenerateArgs) -> Result<usize> {
    let cfg = scenario_config(args.scenario, args.n, args.clusters, args.seed)?;
    let data = generate_scenario(&cfg, args.replicate)?;
    export_csv(&data, &args.output)?;
    Ok(data.len())
}
