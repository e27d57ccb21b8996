//! Widely applicable information criterion on the deviance scale.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::inference::{pairwise_sum, pointwise_log_likelihood, ModelSpec};
use crate::sampler::PosteriorDraws;

const MIN_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaicResult {
    /// `-2 (lppd - p_waic)`.
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
    /// Per-observation `-2 (lppd_i - p_i)`.
    pub pointwise: Vec<f64>,
}

/// WAIC from a `draws × observations` matrix of log-likelihood terms.
///
/// `lppd_i = log mean_s exp(ℓ_is)` and `p_i` is the variance of `ℓ_is` over
/// draws with divisor `S`, so repeating every draw leaves the result
/// unchanged.
pub fn waic_from_pointwise(loglik: &[Vec<f64>]) -> Result<WaicResult> {
    let s = loglik.len();
    if s == 0 {
        return Err(Error::InsufficientDraws { need: 1, got: 0 });
    }
    let n = loglik[0].len();
    if loglik.iter().any(|r| r.len() != n) {
        return Err(Error::Layout("pointwise rows have different lengths".into()));
    }
    let sf = s as f64;
    let per_obs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut col: Vec<f64> = loglik.iter().map(|r| r[i]).collect();
            col.sort_by(f64::total_cmp);
            let max = col[s - 1];
            let lse = max + pairwise_sum(&col.iter().map(|x| (x - max).exp()).collect::<Vec<_>>()).ln();
            let mean = pairwise_sum(&col) / sf;
            let var = pairwise_sum(&col.iter().map(|x| (x - mean) * (x - mean)).collect::<Vec<_>>()) / sf;
            (lse - sf.ln(), var)
        })
        .collect();
    let lppd = pairwise_sum(&per_obs.iter().map(|p| p.0).collect::<Vec<_>>());
    let p_waic = pairwise_sum(&per_obs.iter().map(|p| p.1).collect::<Vec<_>>());
    if p_waic == 0.0 && s > 1 {
        log::warn!("pointwise log-likelihoods do not vary over draws; p_waic is 0");
    }
    Ok(WaicResult {
        waic: -2.0 * (lppd - p_waic),
        lppd,
        p_waic,
        pointwise: per_obs.iter().map(|(l, p)| -2.0 * (l - p)).collect(),
    })
}

/// WAIC of a fitted model; needs at least 100 draws.
pub fn waic(data: &SurvivalDataset, spec: &ModelSpec, draws: &PosteriorDraws) -> Result<WaicResult> {
    if draws.len() < MIN_DRAWS {
        return Err(Error::InsufficientDraws { need: MIN_DRAWS, got: draws.len() });
    }
    let layout = spec.layout(data);
    if *draws.layout() != layout {
        return Err(Error::Layout("draws were not produced for this model and dataset".into()));
    }
    let rows: Vec<&[f64]> = draws.iter_draws().collect();
    let loglik: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|d| pointwise_log_likelihood(data, spec, &layout.from_natural(d)))
        .collect::<Result<_>>()?;
    waic_from_pointwise(&loglik)
}
