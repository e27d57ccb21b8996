//! Report documents and their plain-text tables.

use std::fmt::Write;

use bayes_rmst::sampler::BlockAcceptance;
use bayes_rmst::simulation::SimReport;
use bayes_rmst::summaries::{ForestRow, Histogram};
use bayes_rmst::{FamilyParams, RmstSummary};
use serde::Serialize;

use crate::args::{FitArgs, RmstArgs, SimulateArgs, WaicArgs};

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Self {
        Self { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DataInfo {
    pub rows: usize,
    pub events: usize,
    pub covariates: Vec<String>,
    pub clusters: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamRow {
    pub name: String,
    pub mode: f64,
    pub median: f64,
    pub mean: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
    pub rhat: Option<f64>,
    pub ess: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmstRow {
    pub label: String,
    #[serde(flatten)]
    pub summary: RmstSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaicSummary {
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub tool: Tool,
    pub config: FitArgs,
    pub data: DataInfo,
    pub parameters: Vec<ParamRow>,
    pub rmst: Vec<RmstRow>,
    pub forest: Vec<ForestRow<f64>>,
    pub histogram: Histogram<f64>,
    pub waic: Option<WaicSummary>,
    pub acceptance: Vec<Vec<BlockAcceptance>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Truth {
    pub group0: f64,
    pub group1: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub tool: Tool,
    pub config: SimulateArgs,
    pub truth: Truth,
    #[serde(flatten)]
    pub result: SimReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmstReport {
    pub tool: Tool,
    pub config: RmstArgs,
    pub params: FamilyParams,
    pub rmst: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaicRow {
    pub family: String,
    pub effect: String,
    #[serde(flatten)]
    pub waic: WaicSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaicReport {
    pub tool: Tool,
    pub config: WaicArgs,
    pub data: DataInfo,
    /// Sorted by WAIC, best first.
    pub models: Vec<WaicRow>,
}

fn opt(x: Option<f64>, prec: usize) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.prec$}"))
}

fn ci(lo: f64, hi: f64) -> String {
    format!("[{lo:.2}, {hi:.2}]")
}

pub fn fit_text(r: &FitReport) -> String {
    let c = &r.config;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} model, effect: {}; {} chains x {} iterations ({} burn-in), seed {}",
        c.family, c.effect, c.sampler.chains, c.sampler.iterations, c.sampler.burn_in, c.sampler.seed
    );
    let _ = writeln!(s, "rows {}, events {}, clusters {}", r.data.rows, r.data.events, r.data.clusters.len());
    let level = (c.ci_level * 100.0).round();
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<24} {:>9} {:>9} {:>9} {:>8}  {:<20} {:>6} {:>7}",
        "Parameter",
        "Mode",
        "Median",
        "Mean",
        "SE",
        format!("{level}% CI"),
        "Rhat",
        "ESS"
    );
    for p in &r.parameters {
        let _ = writeln!(
            s,
            "{:<24} {:>9.3} {:>9.3} {:>9.3} {:>8.3}  {:<20} {:>6} {:>7}",
            p.name,
            p.mode,
            p.median,
            p.mean,
            p.se,
            ci(p.lo, p.hi),
            opt(p.rhat, 2),
            opt(p.ess, 0)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<24} {:>9} {:>9} {:>9} {:>8}  {:<20}",
        format!("RMST (tau = {})", c.tau),
        "Mode",
        "Median",
        "Mean",
        "SE",
        format!("{level}% CI")
    );
    for row in &r.rmst {
        let m = &row.summary;
        let _ = writeln!(
            s,
            "{:<24} {:>9.2} {:>9.2} {:>9.2} {:>8.2}  {:<20}",
            row.label,
            m.mode,
            m.median,
            m.mean,
            m.sd,
            ci(m.lo, m.hi)
        );
    }
    if let Some(diff) = r.rmst.last() {
        for e in &diff.summary.exceedance {
            let _ = writeln!(s, "P(difference < {}) = {:.3}", e.threshold, e.probability);
        }
    }
    if r.forest.len() > 1 {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<24} {:>9}  {:<20}", "Difference by cluster", "Mean", format!("{level}% CI"));
        for f in &r.forest {
            let _ = writeln!(s, "{:<24} {:>9.2}  {:<20}", f.label, f.mean, ci(f.lo, f.hi));
        }
    }
    if let Some(w) = &r.waic {
        let _ = writeln!(s);
        let _ = writeln!(s, "WAIC {:.2} (lppd {:.2}, p_waic {:.2})", w.waic, w.lppd, w.p_waic);
    }
    s
}

pub fn simulate_text(r: &SimulateReport) -> String {
    let c = &r.config;
    let m = &r.result.metrics;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario {}, n = {}, {} replications; fitted {} model, effect: {}",
        c.scenario, c.n, c.replications, c.family, c.effect
    );
    let _ = writeln!(
        s,
        "true RMST: group 0 {:.2}, group 1 {:.2}, difference {:.2}",
        r.truth.group0, r.truth.group1, r.truth.difference
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "{:>9} {:>9} {:>9} {:>9} {:>9} {:>9}", "Bias", "MSE", "Mode", "Median", "Coverage", "Failures");
    let _ = writeln!(
        s,
        "{:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9}",
        m.bias, m.mse, m.mode, m.median, m.coverage, m.failures
    );
    for f in &r.result.failures {
        let _ = writeln!(s, "replicate {} failed: {}", f.replicate, f.error);
    }
    s
}

pub fn rmst_text(r: &RmstReport) -> String {
    format!("RMST({}) = {:.4}\n", r.config.tau, r.rmst)
}

pub fn waic_text(r: &WaicReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<14} {:<9} {:>12} {:>12} {:>9}", "Family", "Effect", "WAIC", "lppd", "p_waic");
    for m in &r.models {
        let _ = writeln!(
            s,
            "{:<14} {:<9} {:>12.2} {:>12.2} {:>9.2}",
            m.family, m.effect, m.waic.waic, m.waic.lppd, m.waic.p_waic
        );
    }
    s
}
