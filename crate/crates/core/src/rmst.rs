//! Restricted mean survival time `∫_0^τ S(t) dt` in closed form, by
//! quadrature, and over posterior draws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::families::{AltFamilyParams, Effect, FamilyParams};
use crate::inference::EffectKind;
use crate::quadrature::{adaptive_simpson, DEFAULT_ABS_TOL, DEFAULT_MAX_DEPTH};
use crate::sampler::PosteriorDraws;
use crate::scalar::{as_f64, lit, Real};
use crate::specfun::{incomplete_beta_complemented, ln_lower_incomplete_gamma, ln_std_normal_cdf, ln_std_normal_sf};

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau > T::zero() && tau.is_finite() {
        Ok(())
    } else {
        domain("tau must be > 0", as_f64(tau))
    }
}

fn clamp<T: Real>(x: T, tau: T) -> T {
    x.max(T::zero()).min(tau)
}

/// `(1 - e^{-λτ}) / λ`.
pub fn rmst_exponential<T: Real>(rate: T, tau: T) -> Result<T> {
    FamilyParams::Exponential { rate }.validate()?;
    check_tau(tau)?;
    Ok(clamp(-(-rate * tau).exp_m1() / rate, tau))
}

/// `λ^{-1/k} γ(λτ^k; 1/k + 1) + τ e^{-λτ^k}`.
pub fn rmst_weibull<T: Real>(scale: T, shape: T, tau: T) -> Result<T> {
    FamilyParams::Weibull { scale, shape }.validate()?;
    check_tau(tau)?;
    if shape == T::one() {
        return rmst_exponential(scale, tau);
    }
    let inv_k = shape.recip();
    let x = scale * tau.powf(shape);
    let head = (ln_lower_incomplete_gamma(x, inv_k + T::one())? - inv_k * scale.ln()).exp();
    Ok(clamp(head + tau * (-x).exp(), tau))
}

/// `e^{-μ/k} B(w/(1+w); 1+1/k, 1-1/k) + τ/(1+w)` with `w = e^μ τ^k`.
///
/// The closed form needs `k > 1`; smaller shapes are integrated numerically.
pub fn rmst_loglogistic<T: Real>(location: T, shape: T, tau: T) -> Result<T> {
    let p = FamilyParams::LogLogistic { location, shape };
    p.validate()?;
    check_tau(tau)?;
    if shape <= T::one() {
        return rmst_numeric(&p, Effect::None, tau);
    }
    loglogistic_closed(location, shape, T::one(), tau)
}

/// `v e^{-μ/k} B(z; 1+1/k, v-1/k) + τ (1+w)^{-v}`; `v = 1` is the base case.
fn loglogistic_closed<T: Real>(location: T, shape: T, v: T, tau: T) -> Result<T> {
    let inv_k = shape.recip();
    let x = location + shape * tau.ln();
    let z = logistic(x);
    let zc = logistic(-x);
    let b = incomplete_beta_complemented(z, zc, T::one() + inv_k, v - inv_k)?;
    let tail = tau * (-(v * crate::families::softplus(x))).exp();
    Ok(clamp(v * (-location * inv_k).exp() * b + tail, tau))
}

fn logistic<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `e^{μ+σ²/2} Φ((log τ - μ - σ²)/σ) + τ (1 - Φ((log τ - μ)/σ))`.
pub fn rmst_lognormal<T: Real>(location: T, variance: T, tau: T) -> Result<T> {
    FamilyParams::LogNormal { location, variance }.validate()?;
    check_tau(tau)?;
    let sigma = variance.sqrt();
    let half: T = lit(0.5);
    let a = (tau.ln() - location - variance) / sigma;
    let b = (tau.ln() - location) / sigma;
    let head = (location + half * variance + ln_std_normal_cdf(a)).exp();
    Ok(clamp(head + tau * ln_std_normal_sf(b).exp(), tau))
}

/// RMST of the unconditioned distribution.
pub fn rmst_base<T: Real>(p: &FamilyParams<T>, tau: T) -> Result<T> {
    match *p {
        FamilyParams::Exponential { rate } => rmst_exponential(rate, tau),
        FamilyParams::Weibull { scale, shape } => rmst_weibull(scale, shape, tau),
        FamilyParams::LogLogistic { location, shape } => rmst_loglogistic(location, shape, tau),
        FamilyParams::LogNormal { location, variance } => rmst_lognormal(location, variance, tau),
    }
}

/// RMST of `S(t)^v`.
///
/// The log-normal case uses the approximation
/// `e^{μ+σ²/2} (1/v)(1 - (1 - Φ(a))^v) + τ (1 - Φ(b))^v`; see
/// [`rmst_conditional`] for the exact value.
pub fn rmst_frailty<T: Real>(p: &FamilyParams<T>, v: T, tau: T) -> Result<T> {
    p.validate()?;
    Effect::Frailty(v).validate()?;
    check_tau(tau)?;
    if v == T::one() {
        return rmst_base(p, tau);
    }
    match *p {
        FamilyParams::Exponential { rate } => rmst_exponential(v * rate, tau),
        FamilyParams::Weibull { scale, shape } => rmst_weibull(v * scale, shape, tau),
        FamilyParams::LogLogistic { location, shape } => loglogistic_closed(location, shape, v, tau),
        FamilyParams::LogNormal { location, variance } => {
            let sigma = variance.sqrt();
            let a = (tau.ln() - location - variance) / sigma;
            let b = (tau.ln() - location) / sigma;
            let mass = -(v * ln_std_normal_sf(a)).exp_m1();
            let head = (location + lit::<T>(0.5) * variance).exp() * mass / v;
            Ok(clamp(head + tau * (v * ln_std_normal_sf(b)).exp(), tau))
        }
    }
}

/// RMST with the linear-scale parameter shifted by `u`.
pub fn rmst_random_effect<T: Real>(p: &FamilyParams<T>, u: T, tau: T) -> Result<T> {
    p.validate()?;
    Effect::RandomOffset(u).validate()?;
    if u == T::zero() {
        return rmst_base(p, tau);
    }
    rmst_base(&p.with_offset(u), tau)
}

/// Closed-form RMST under any effect. With `exact`, the log-normal frailty
/// case is integrated numerically instead of approximated.
pub fn rmst_conditional<T: Real>(p: &FamilyParams<T>, effect: Effect<T>, tau: T, exact: bool) -> Result<T> {
    match effect.normalized() {
        Effect::None => rmst_base(p, tau),
        Effect::RandomOffset(u) => rmst_random_effect(p, u, tau),
        Effect::Frailty(v) => match p {
            FamilyParams::LogNormal { .. } if exact => rmst_numeric(p, effect, tau),
            _ => rmst_frailty(p, v, tau),
        },
    }
}

/// Alternate-parameterisation closed forms:
/// Weibull `θ γ((τ/θ)^k; 1/k+1) + τ e^{-(τ/θ)^k}` and log-logistic
/// `α B(w/(1+w); 1+1/k, 1-1/k) + τ/(1+w)` with `w = (τ/α)^k`.
pub fn rmst_alt<T: Real>(p: &AltFamilyParams<T>, tau: T) -> Result<T> {
    p.validate()?;
    check_tau(tau)?;
    match *p {
        AltFamilyParams::Weibull { time_scale, shape } => {
            let x = (tau / time_scale).powf(shape);
            let head = time_scale * ln_lower_incomplete_gamma(x, shape.recip() + T::one())?.exp();
            Ok(clamp(head + tau * (-x).exp(), tau))
        }
        AltFamilyParams::LogLogistic { time_scale, shape } => {
            if shape <= T::one() {
                return rmst_numeric(&p.to_standard(), Effect::None, tau);
            }
            let inv_k = shape.recip();
            let x = shape * (tau / time_scale).ln();
            let b = incomplete_beta_complemented(logistic(x), logistic(-x), T::one() + inv_k, T::one() - inv_k)?;
            Ok(clamp(time_scale * b + tau * logistic(-x), tau))
        }
    }
}

/// `∫_0^τ S(t | effect) dt` by adaptive Simpson quadrature.
///
/// Integrates `2τ s S(τ s²)` over `s ∈ [0, 1]` on 16 equal panels, which keeps
/// shapes below one (infinite slope at the origin) within the depth limit.
pub fn rmst_numeric<T: Real>(p: &FamilyParams<T>, effect: Effect<T>, tau: T) -> Result<T> {
    p.validate()?;
    effect.validate()?;
    check_tau(tau)?;
    let two: T = lit(2.0);
    let f = |s: T| two * tau * s * p.survival(effect, tau * s * s);
    let panels = 16;
    let floor = 64.0 * as_f64(T::epsilon()) * as_f64(tau);
    let tol: T = lit(DEFAULT_ABS_TOL.max(floor) / panels as f64);
    let mut total = T::zero();
    for i in 0..panels {
        let a: T = lit(i as f64 / panels as f64);
        let b: T = lit((i + 1) as f64 / panels as f64);
        total = total + adaptive_simpson(&f, a, b, tol, DEFAULT_MAX_DEPTH)?;
    }
    Ok(clamp(total, tau))
}

/// Which conditioning a posterior RMST uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterSelector {
    /// `u = 0` or `v = 1`.
    Marginal,
    /// Zero-based cluster index.
    Cluster(usize),
}

/// Evaluation settings for posterior RMST distributions.
///
/// Design column 1 carries the group indicator; `covariates` fixes columns
/// 2, 3, ... (missing entries are zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmstQuery {
    pub tau: f64,
    pub covariates: Vec<f64>,
    pub cluster: ClusterSelector,
    pub exact: bool,
}

impl RmstQuery {
    pub fn new(tau: f64) -> Self {
        Self { tau, covariates: Vec::new(), cluster: ClusterSelector::Marginal, exact: false }
    }

    pub fn for_cluster(mut self, c: usize) -> Self {
        self.cluster = ClusterSelector::Cluster(c);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RmstLabel {
    Group0,
    Group1,
    Difference,
}

/// Per-draw RMST values in draw order (chains concatenated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmstSampleVector<T> {
    pub label: RmstLabel,
    pub values: Vec<T>,
}

/// Paired group RMSTs and their per-draw difference (group 1 minus group 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmstDistribution {
    pub group0: RmstSampleVector<f64>,
    pub group1: RmstSampleVector<f64>,
    pub difference: RmstSampleVector<f64>,
}

/// RMST of one group for every posterior draw.
pub fn rmst_group(draws: &PosteriorDraws, q: &RmstQuery, group: f64) -> Result<Vec<f64>> {
    let layout = draws.layout();
    if layout.n_coef < 2 {
        return Err(Error::Layout("design needs an intercept and a group column".into()));
    }
    if q.covariates.len() > layout.n_coef - 2 {
        return Err(Error::Layout(format!(
            "{} extra covariate values for {} extra columns",
            q.covariates.len(),
            layout.n_coef - 2
        )));
    }
    if let ClusterSelector::Cluster(c) = q.cluster {
        if c >= layout.n_clusters {
            return Err(Error::Layout(format!("cluster index {c} out of range")));
        }
    }
    check_tau(q.tau)?;
    let shape_idx = layout.shape_index();
    let effect_start = layout.effect_range().start;
    let rows: Vec<&[f64]> = draws.iter_draws().collect();
    rows.par_iter()
        .map(|d| {
            let mut eta = d[0] + d[1] * group;
            for (j, x) in q.covariates.iter().enumerate() {
                eta += d[j + 2] * x;
            }
            let shape = shape_idx.map_or(1.0, |i| d[i]);
            let params = layout.family.from_linear_predictor(eta, shape);
            let effect = match (q.cluster, layout.effect) {
                (ClusterSelector::Marginal, _) | (_, EffectKind::None) => Effect::None,
                (ClusterSelector::Cluster(c), EffectKind::Random) => Effect::RandomOffset(d[effect_start + c]),
                (ClusterSelector::Cluster(c), EffectKind::Frailty) => Effect::Frailty(d[effect_start + c]),
            };
            rmst_conditional(&params, effect, q.tau, q.exact)
        })
        .collect()
}

/// Group-0, group-1 and difference RMST vectors aligned with the draws.
pub fn rmst_distribution(draws: &PosteriorDraws, q: &RmstQuery) -> Result<RmstDistribution> {
    let g0 = rmst_group(draws, q, 0.0)?;
    let g1 = rmst_group(draws, q, 1.0)?;
    let diff = g0.iter().zip(&g1).map(|(a, b)| b - a).collect();
    Ok(RmstDistribution {
        group0: RmstSampleVector { label: RmstLabel::Group0, values: g0 },
        group1: RmstSampleVector { label: RmstLabel::Group1, values: g1 },
        difference: RmstSampleVector { label: RmstLabel::Difference, values: diff },
    })
}
