use bayes_rmst::diagnostics::{effective_sample_size_chains, split_rhat};
use bayes_rmst::inference::Priors;
use bayes_rmst::sampler::run_chains;
use bayes_rmst::simulation::{generate_scenario, Scenario, ScenarioConfig};
use bayes_rmst::{EffectKind, Family, ModelSpec, SamplerConfig, SurvivalDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Two-group exponential data with administrative censoring at 100.
fn two_group_exponential(n: usize, beta: [f64; 2], seed: u64) -> SurvivalDataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut time = Vec::with_capacity(n);
    let mut event = Vec::with_capacity(n);
    let mut design = Vec::with_capacity(n);
    for i in 0..n {
        let g = (i % 2) as f64;
        let rate = (beta[0] + beta[1] * g).exp();
        let t = -(1.0 - rng.random::<f64>()).ln() / rate;
        time.push(t.min(100.0));
        event.push(t < 100.0);
        design.push(vec![1.0, g]);
    }
    SurvivalDataset::unclustered(time, event, design).unwrap()
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
    (m, v.sqrt())
}

fn flat(chains: Vec<Vec<f64>>) -> Vec<f64> {
    chains.into_iter().flatten().collect()
}

#[test]
fn recovers_exponential_coefficients() {
    let truth = [-4.5, 0.5];
    let data = two_group_exponential(1000, truth, 17);
    let spec = ModelSpec::new(Family::Exponential, EffectKind::None);
    let draws = run_chains(&data, &spec, &SamplerConfig::default()).unwrap();

    // Closed-form MLE per group: log(events / exposure).
    let mut d = [0.0; 2];
    let mut exposure = [0.0; 2];
    for i in 0..data.len() {
        let g = data.row(i)[1] as usize;
        d[g] += f64::from(u8::from(data.event(i)));
        exposure[g] += data.time(i);
    }
    let mle = [(d[0] / exposure[0]).ln(), (d[1] / exposure[1]).ln() - (d[0] / exposure[0]).ln()];

    for j in 0..2 {
        let (m, sd) = mean_sd(&flat(draws.column(j)));
        assert!((m - truth[j]).abs() < 3.0 * sd, "beta{j}: {m} ± {sd} vs truth {}", truth[j]);
        assert!((m - mle[j]).abs() < 0.5 * sd, "beta{j}: {m} vs MLE {}", mle[j]);
        assert!(split_rhat(&draws, j).unwrap() < 1.05);
    }
}

#[test]
fn deterministic_per_seed() {
    let data = generate_scenario(&ScenarioConfig::new(Scenario::C, 64).with_seed(4), 0).unwrap();
    let spec = ModelSpec::new(Family::Weibull, EffectKind::Random);
    let cfg = SamplerConfig { iterations: 300, burn_in: 150, ..SamplerConfig::default() };
    let a = run_chains(&data, &spec, &cfg).unwrap();
    let b = run_chains(&data, &spec, &cfg).unwrap();
    assert_eq!(a, b);
    let c = run_chains(&data, &spec, &SamplerConfig { seed: 2, ..cfg.clone() }).unwrap();
    assert_ne!(a.iter_draws().next(), c.iter_draws().next());
    assert_ne!(a.column(0), c.column(0));
    // Chains are distinct substreams of one seed.
    let cols = a.column(0);
    assert_ne!(cols[0], cols[1]);
}

#[test]
fn invalid_configs_rejected() {
    let data = two_group_exponential(20, [-1.0, 0.0], 1);
    let spec = ModelSpec::new(Family::Exponential, EffectKind::None);
    let base = SamplerConfig::default();
    for cfg in [
        SamplerConfig { iterations: 0, burn_in: 0, ..base.clone() },
        SamplerConfig { chains: 0, ..base.clone() },
        SamplerConfig { burn_in: 2000, ..base.clone() },
    ] {
        assert!(run_chains(&data, &spec, &cfg).is_err(), "{cfg:?}");
    }
}

#[test]
fn output_shape_and_natural_scale() {
    let data = generate_scenario(&ScenarioConfig::new(Scenario::B, 64).with_seed(9), 0).unwrap();
    let spec = ModelSpec::new(Family::LogNormal, EffectKind::Frailty);
    let cfg = SamplerConfig { chains: 3, iterations: 200, burn_in: 100, ..SamplerConfig::default() };
    let draws = run_chains(&data, &spec, &cfg).unwrap();
    assert_eq!(draws.n_chains(), 3);
    assert_eq!(draws.draws_per_chain(), 100);
    assert_eq!(draws.len(), 300);
    assert_eq!(draws.dim(), 3 + 1 + 4 + 1);
    assert_eq!(draws.column_names()[3], "sigma2");
    assert_eq!(draws.column_names()[4], "v[1]");
    for row in draws.iter_draws() {
        assert!(row[3..].iter().all(|&x| x > 0.0));
    }
    assert!(draws.column_index("phi").is_some());
}

#[test]
fn conjugate_gamma_posterior() {
    // With a flat prior on log λ the posterior of λ is Gamma(events, exposure).
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    let n = 150;
    let time: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln() / 0.2).collect();
    let event: Vec<bool> = (0..n).map(|_| rng.random_bool(0.8)).collect();
    let d = event.iter().filter(|&&e| e).count() as f64;
    let exposure: f64 = time.iter().sum();
    let data = SurvivalDataset::unclustered(time, event, vec![vec![1.0]; n]).unwrap();
    let priors = Priors { coef_variance: vec![1e8], ..Priors::default() };
    let spec = ModelSpec::new(Family::Exponential, EffectKind::None).with_priors(priors);
    let cfg = SamplerConfig { chains: 4, iterations: 6000, burn_in: 1000, seed: 5, ..SamplerConfig::default() };
    let draws = run_chains(&data, &spec, &cfg).unwrap();

    let lambda: Vec<Vec<f64>> = draws.column(0).into_iter().map(|c| c.iter().map(|b| b.exp()).collect()).collect();
    let ess = effective_sample_size_chains(&lambda).unwrap();
    let all = flat(lambda);
    let (m, sd) = mean_sd(&all);
    let var = sd * sd;
    let (want_m, want_var) = (d / exposure, d / (exposure * exposure));
    let se_mean = (want_var / ess).sqrt();
    assert!((m - want_m).abs() < 3.0 * se_mean, "mean {m} vs {want_m} (se {se_mean})");
    // Var of the sample variance for a Gamma(d, ·): (μ4 - σ⁴) / ESS with excess kurtosis 6/d.
    let se_var = (want_var * want_var * (2.0 + 6.0 / d) / ess).sqrt();
    assert!((var - want_var).abs() < 3.0 * se_var, "var {var} vs {want_var} (se {se_var})");
}

#[test]
fn acceptance_rates_in_range() {
    let data = generate_scenario(&ScenarioConfig::new(Scenario::C, 512).with_seed(1), 0).unwrap();
    let spec = ModelSpec::new(Family::Exponential, EffectKind::None);
    let draws = run_chains(&data, &spec, &SamplerConfig::default()).unwrap();
    for chain in draws.acceptance() {
        assert!(!chain.is_empty());
        for b in chain {
            assert!((0.1..=0.6).contains(&b.rate), "{}: {}", b.block, b.rate);
        }
    }
}

#[test]
fn clustered_models_run() {
    let data = generate_scenario(&ScenarioConfig::new(Scenario::A, 128).with_seed(2), 0).unwrap();
    for family in Family::ALL {
        for effect in [EffectKind::Random, EffectKind::Frailty] {
            let spec = ModelSpec::new(family, effect);
            let cfg = SamplerConfig { iterations: 400, burn_in: 200, ..SamplerConfig::default() };
            let draws = run_chains(&data, &spec, &cfg).unwrap();
            let blocks: Vec<&str> = draws.acceptance()[0].iter().map(|b| b.block.as_str()).collect();
            assert!(blocks.contains(&"beta") && blocks.contains(&"phi"), "{blocks:?}");
            assert!(draws.iter_draws().all(|r| r.iter().all(|x| x.is_finite())));
        }
    }
}
