//! Censored-data likelihoods, priors and log-posteriors for the twelve model
//! variants (four families, each without effects, with normal random
//! offsets, or with gamma frailties).
//!
//! Parameters live in an unconstrained vector laid out as
//!
//! ```text
//! [ β_0 .. β_{q-1} | log k or log σ² | u_1..u_M or log v_1..log v_M | log φ ]
//! ```
//!
//! where the shape slot exists only for families with a second parameter and
//! the effect and `log φ` slots only for clustered models. Linear predictors
//! follow `λ = exp(xᵀβ)` for the exponential and Weibull and `μ = xᵀβ` for
//! the log-logistic and log-normal.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::families::{Effect, Family};
use crate::specfun::ln_gamma;

/// Rows above which pointwise terms are evaluated in parallel.
const PARALLEL_ROWS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    None,
    Random,
    Frailty,
}

impl EffectKind {
    pub const ALL: [EffectKind; 3] = [EffectKind::None, EffectKind::Random, EffectKind::Frailty];

    pub fn name(self) -> &'static str {
        match self {
            EffectKind::None => "none",
            EffectKind::Random => "random",
            EffectKind::Frailty => "frailty",
        }
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EffectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "fixed" => Ok(EffectKind::None),
            "random" | "mixed" => Ok(EffectKind::Random),
            "frailty" => Ok(EffectKind::Frailty),
            _ => Err(Error::Config(format!("unknown effect type `{s}`"))),
        }
    }
}

/// Prior hyperparameters.
///
/// * `β_j ~ N(0, coef_variance[j])` (a single entry is broadcast to all)
/// * `φ ~ U(0, phi_upper)`
/// * `k ~ Gamma(shape_prior_shape, shape_prior_rate)`
/// * `σ² ~ U(0, variance_upper)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub coef_variance: Vec<f64>,
    pub phi_upper: f64,
    pub shape_prior_shape: f64,
    pub shape_prior_rate: f64,
    pub variance_upper: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self {
            coef_variance: vec![100.0],
            phi_upper: 10.0,
            shape_prior_shape: 0.01,
            shape_prior_rate: 0.01,
            variance_upper: 100.0,
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        if self.coef_variance.is_empty() {
            return Err(Error::Config("coef_variance must not be empty".into()));
        }
        let all = self.coef_variance.iter().chain([
            &self.phi_upper,
            &self.shape_prior_shape,
            &self.shape_prior_rate,
            &self.variance_upper,
        ]);
        for &x in all {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("prior hyperparameters must be positive, got {x}")));
            }
        }
        Ok(())
    }

    fn coef_var(&self, j: usize) -> f64 {
        self.coef_variance.get(j).copied().unwrap_or(self.coef_variance[self.coef_variance.len() - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub effect: EffectKind,
    pub priors: Priors,
}

impl ModelSpec {
    pub fn new(family: Family, effect: EffectKind) -> Self {
        Self { family, effect, priors: Priors::default() }
    }

    pub fn with_priors(mut self, priors: Priors) -> Self {
        self.priors = priors;
        self
    }

    pub fn layout(&self, data: &SurvivalDataset) -> ParamLayout {
        ParamLayout {
            family: self.family,
            effect: self.effect,
            n_coef: data.n_coef(),
            n_clusters: data.n_clusters(),
        }
    }
}

/// Positions of each parameter block inside a parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub family: Family,
    pub effect: EffectKind,
    pub n_coef: usize,
    pub n_clusters: usize,
}

impl ParamLayout {
    pub fn coef_range(&self) -> Range<usize> {
        0..self.n_coef
    }

    pub fn shape_index(&self) -> Option<usize> {
        self.family.has_shape().then_some(self.n_coef)
    }

    fn effects_start(&self) -> usize {
        self.n_coef + usize::from(self.family.has_shape())
    }

    pub fn effect_range(&self) -> Range<usize> {
        let start = self.effects_start();
        match self.effect {
            EffectKind::None => start..start,
            _ => start..start + self.n_clusters,
        }
    }

    pub fn phi_index(&self) -> Option<usize> {
        match self.effect {
            EffectKind::None => None,
            _ => Some(self.effect_range().end),
        }
    }

    pub fn dim(&self) -> usize {
        self.phi_index().map_or(self.effect_range().end, |i| i + 1)
    }

    /// Column labels for the natural-scale draws.
    pub fn column_names(&self, covariate_names: &[String], cluster_labels: &[String]) -> Vec<String> {
        let mut names: Vec<String> = (0..self.n_coef)
            .map(|j| match covariate_names.get(j) {
                Some(n) => format!("beta[{n}]"),
                None => format!("beta[{j}]"),
            })
            .collect();
        if let Some(s) = self.family.shape_name() {
            names.push(s.to_string());
        }
        let prefix = match self.effect {
            EffectKind::None => None,
            EffectKind::Random => Some("u"),
            EffectKind::Frailty => Some("v"),
        };
        if let Some(p) = prefix {
            for c in 0..self.n_clusters {
                let label = cluster_labels.get(c).cloned().unwrap_or_else(|| (c + 1).to_string());
                names.push(format!("{p}[{label}]"));
            }
            names.push("phi".into());
        }
        names
    }

    /// Whether coordinate `i` is stored on the log scale.
    pub fn is_log_scale(&self, i: usize) -> bool {
        Some(i) == self.shape_index()
            || Some(i) == self.phi_index()
            || (self.effect == EffectKind::Frailty && self.effect_range().contains(&i))
    }

    /// Unconstrained coordinates to natural scale.
    pub fn to_natural(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .enumerate()
            .map(|(i, &x)| if self.is_log_scale(i) { x.exp() } else { x })
            .collect()
    }

    /// Natural-scale coordinates back to the unconstrained vector.
    pub fn from_natural(&self, natural: &[f64]) -> Vec<f64> {
        natural
            .iter()
            .enumerate()
            .map(|(i, &x)| if self.is_log_scale(i) { x.ln() } else { x })
            .collect()
    }

    /// Conditioning effect of cluster `c` under unconstrained `theta`.
    pub fn cluster_effect(&self, theta: &[f64], c: usize) -> Effect<f64> {
        let r = self.effect_range();
        match self.effect {
            EffectKind::None => Effect::None,
            EffectKind::Random => Effect::RandomOffset(theta[r.start + c]),
            EffectKind::Frailty => Effect::Frailty(theta[r.start + c].exp()),
        }
    }

    /// Natural-scale second parameter (1 for the exponential, where unused).
    pub fn shape_value(&self, theta: &[f64]) -> f64 {
        self.shape_index().map_or(1.0, |i| theta[i].exp())
    }

    fn check(&self, spec: &ModelSpec, data: &SurvivalDataset, theta: &[f64]) -> Result<()> {
        if spec.family != self.family || spec.effect != self.effect {
            return Err(Error::Layout("layout does not match model spec".into()));
        }
        if data.n_coef() != self.n_coef || data.n_clusters() != self.n_clusters {
            return Err(Error::Layout(format!(
                "dataset has {} coefficients and {} clusters, layout expects {} and {}",
                data.n_coef(),
                data.n_clusters(),
                self.n_coef,
                self.n_clusters
            )));
        }
        self.check_theta(theta)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::Layout(format!(
                "parameter vector has length {}, expected {}",
                theta.len(),
                self.dim()
            )));
        }
        if let Some(x) = theta.iter().find(|x| !x.is_finite()) {
            return Err(Error::Layout(format!("non-finite parameter {x}")));
        }
        Ok(())
    }
}

/// Row `i`'s contribution `δ log f + (1 - δ) log S`.
fn row_term(data: &SurvivalDataset, layout: &ParamLayout, theta: &[f64], shape: f64, i: usize) -> Result<f64> {
    let beta = &theta[layout.coef_range()];
    let eta: f64 = data.row(i).iter().zip(beta).map(|(x, b)| x * b).sum();
    let params = layout.family.from_linear_predictor(eta, shape);
    let effect = layout.cluster_effect(theta, data.cluster(i));
    let t = data.time(i);
    if data.event(i) {
        params.log_density(effect, t)
    } else {
        params.log_survival(effect, t)
    }
}

/// Per-observation log-likelihood terms, in row order.
pub fn pointwise_log_likelihood(data: &SurvivalDataset, spec: &ModelSpec, theta: &[f64]) -> Result<Vec<f64>> {
    let layout = spec.layout(data);
    layout.check(spec, data, theta)?;
    let shape = layout.shape_value(theta);
    if data.len() >= PARALLEL_ROWS {
        (0..data.len())
            .into_par_iter()
            .map(|i| row_term(data, &layout, theta, shape, i))
            .collect()
    } else {
        (0..data.len()).map(|i| row_term(data, &layout, theta, shape, i)).collect()
    }
}

/// Total censored-data log-likelihood, summed with a fixed pairwise tree so
/// the result does not depend on thread count.
pub fn log_likelihood(data: &SurvivalDataset, spec: &ModelSpec, theta: &[f64]) -> Result<f64> {
    Ok(pairwise_sum(&pointwise_log_likelihood(data, spec, theta)?))
}

/// Log-likelihood restricted to `rows`, without layout checks.
pub(crate) fn rows_log_likelihood(
    data: &SurvivalDataset,
    layout: &ParamLayout,
    theta: &[f64],
    rows: &[usize],
) -> f64 {
    let shape = layout.shape_value(theta);
    let terms: Vec<f64> = rows
        .iter()
        .map(|&i| row_term(data, layout, theta, shape, i).unwrap_or(f64::NAN))
        .collect();
    pairwise_sum(&terms)
}

/// Log prior density of unconstrained `theta`, up to an additive constant,
/// including the Jacobians of the log transforms. `-∞` outside the support
/// of a uniform prior.
pub fn log_prior(spec: &ModelSpec, layout: &ParamLayout, theta: &[f64]) -> Result<f64> {
    if spec.family != layout.family || spec.effect != layout.effect {
        return Err(Error::Layout("layout does not match model spec".into()));
    }
    layout.check_theta(theta)?;
    spec.priors.validate()?;
    Ok(log_prior_unchecked(spec, layout, theta))
}

pub(crate) fn log_prior_unchecked(spec: &ModelSpec, layout: &ParamLayout, theta: &[f64]) -> f64 {
    let pr = &spec.priors;
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let mut lp = 0.0;

    for (j, &b) in theta[layout.coef_range()].iter().enumerate() {
        let c = pr.coef_var(j);
        lp += -0.5 * b * b / c - 0.5 * c.ln() - half_ln_2pi;
    }

    if let Some(i) = layout.shape_index() {
        let log_s = theta[i];
        let s = log_s.exp();
        match layout.family {
            Family::LogNormal => {
                if s >= pr.variance_upper {
                    return f64::NEG_INFINITY;
                }
                lp += -pr.variance_upper.ln() + log_s;
            }
            _ => {
                let (a, b) = (pr.shape_prior_shape, pr.shape_prior_rate);
                lp += a * b.ln() - ln_gamma(a).unwrap_or(f64::NAN) + (a - 1.0) * log_s - b * s + log_s;
            }
        }
    }

    if let Some(pi) = layout.phi_index() {
        let log_phi = theta[pi];
        let phi = log_phi.exp();
        if phi >= pr.phi_upper {
            return f64::NEG_INFINITY;
        }
        lp += -pr.phi_upper.ln() + log_phi;
        let effects = &theta[layout.effect_range()];
        match layout.effect {
            EffectKind::Random => {
                for &u in effects {
                    lp += -half_ln_2pi - log_phi - 0.5 * u * u / (phi * phi);
                }
            }
            EffectKind::Frailty => {
                let alpha = 1.0 / phi;
                let norm = alpha * alpha.ln() - ln_gamma(alpha).unwrap_or(f64::NAN);
                for &w in effects {
                    lp += norm + (alpha - 1.0) * w - alpha * w.exp() + w;
                }
            }
            EffectKind::None => {}
        }
    }
    lp
}

/// `log_likelihood + log_prior`; `-∞` propagates without evaluating the
/// likelihood.
pub fn log_posterior(data: &SurvivalDataset, spec: &ModelSpec, theta: &[f64]) -> Result<f64> {
    let layout = spec.layout(data);
    layout.check(spec, data, theta)?;
    let lp = log_prior(spec, &layout, theta)?;
    if lp == f64::NEG_INFINITY {
        return Ok(lp);
    }
    Ok(log_likelihood(data, spec, theta)? + lp)
}

/// Sum with a fixed binary-tree association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}
