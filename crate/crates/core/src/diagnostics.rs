//! Convergence diagnostics: classic split-R̂ and multi-chain effective
//! sample size.

use crate::error::{Error, Result};
use crate::sampler::PosteriorDraws;

const MIN_DRAWS: usize = 100;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

fn check_shape(chains: &[Vec<f64>]) -> Result<usize> {
    let n = chains.first().map_or(0, Vec::len);
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::Layout("chains have different lengths".into()));
    }
    Ok(n)
}

/// Split-R̂ of per-chain draws: every chain is halved (dropping a middle
/// draw when odd) and `sqrt(var⁺ / W)` is returned, where `W` is the mean
/// within-half variance and `var⁺ = (n-1)/n W + B/n`.
///
/// Needs two chains or at least 100 draws. Constant input yields 1.
pub fn split_rhat_chains(chains: &[Vec<f64>]) -> Result<f64> {
    let n = check_shape(chains)?;
    let total = n * chains.len();
    if chains.len() < 2 && total < MIN_DRAWS {
        return Err(Error::InsufficientDraws { need: MIN_DRAWS, got: total });
    }
    let half = n / 2;
    if half < 2 {
        return Err(Error::InsufficientDraws { need: 4, got: n });
    }
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..half], &c[n - half..]])
        .collect();
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let w = mean(&halves.iter().map(|h| sample_var(h)).collect::<Vec<_>>());
    let b_over_n = sample_var(&means);
    if w == 0.0 {
        return Ok(if b_over_n == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let nh = half as f64;
    let var_plus = (nh - 1.0) / nh * w + b_over_n;
    Ok((var_plus / w).sqrt())
}

/// Effective sample size pooled over chains, using the combined
/// autocorrelation `ρ_t = 1 - (W - mean_c γ_c(t)) / var⁺` truncated by
/// Geyer's initial monotone sequence.
///
/// Needs at least 100 draws in total. A constant column has ESS 0.
pub fn effective_sample_size_chains(chains: &[Vec<f64>]) -> Result<f64> {
    let n = check_shape(chains)?;
    let m = chains.len();
    let total = n * m;
    if total < MIN_DRAWS || n < 4 {
        return Err(Error::InsufficientDraws { need: MIN_DRAWS, got: total });
    }
    let nf = n as f64;
    let centred: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| {
            let mu = mean(c);
            c.iter().map(|x| x - mu).collect()
        })
        .collect();
    // Biased autocovariance of each chain at lag t.
    let acov = |t: usize| -> f64 {
        centred
            .iter()
            .map(|c| c[..n - t].iter().zip(&c[t..]).map(|(a, b)| a * b).sum::<f64>() / nf)
            .sum::<f64>()
            / m as f64
    };
    let gamma0 = acov(0);
    let w = gamma0 * nf / (nf - 1.0);
    let b_over_n = if m > 1 {
        sample_var(&chains.iter().map(|c| mean(c)).collect::<Vec<_>>())
    } else {
        0.0
    };
    let var_plus = (nf - 1.0) / nf * w + b_over_n;
    if !(var_plus > 0.0) {
        log::warn!("effective sample size of a constant column is taken as 0");
        return Ok(0.0);
    }
    let rho = |t: usize| 1.0 - (w - acov(t)) / var_plus;

    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let mut pair = rho(t) + rho(t + 1);
        if pair < 0.0 {
            break;
        }
        if pair > prev {
            pair = prev;
        }
        sum += pair;
        prev = pair;
        t += 2;
    }
    let tau = (-1.0 + 2.0 * sum).max(1.0 / (total as f64).log10());
    Ok(total as f64 / tau)
}

/// Split-R̂ of one posterior column.
pub fn split_rhat(draws: &PosteriorDraws, column: usize) -> Result<f64> {
    check_column(draws, column)?;
    split_rhat_chains(&draws.column(column))
}

/// Effective sample size of one posterior column.
pub fn effective_sample_size(draws: &PosteriorDraws, column: usize) -> Result<f64> {
    check_column(draws, column)?;
    effective_sample_size_chains(&draws.column(column))
}

fn check_column(draws: &PosteriorDraws, column: usize) -> Result<()> {
    if column >= draws.dim() {
        return Err(Error::Layout(format!("column {column} out of range")));
    }
    Ok(())
}
