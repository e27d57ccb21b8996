//! Adaptive random-walk Metropolis-within-blocks sampler.
//!
//! Each iteration updates, in order:
//!
//! * the coefficients together with the shape coordinate, using a proposal
//!   covariance learned during burn-in (repeated once per coordinate),
//! * the shape coordinate alone,
//! * every cluster effect,
//! * a joint shift of the intercept against all cluster effects, which
//!   leaves the linear predictors unchanged and removes the intercept/effect
//!   ridge,
//! * `log φ`.
//!
//! Proposal scales follow a Robbins-Monro recursion toward the target
//! acceptance rate during burn-in and are frozen afterwards.
//!
//! Chain `c` draws from a ChaCha20 generator seeded with `seed` on stream
//! `c`, so output depends only on the inputs, not on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};
use crate::inference::{log_prior_unchecked, rows_log_likelihood, EffectKind, ModelSpec, ParamLayout};

const INIT_RETRIES: usize = 100;
const INIT_JITTER: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    /// Iterations per chain, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Length of the first covariance-adaptation window for the coefficient
    /// block; later windows double.
    pub adapt_window: usize,
    pub target_accept_block: f64,
    pub target_accept_scalar: f64,
    pub initial_step: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chains: 2,
            iterations: 2000,
            burn_in: 1000,
            seed: 1,
            adapt_window: 50,
            target_accept_block: 0.234,
            target_accept_scalar: 0.44,
            initial_step: 0.1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::Config("at least one chain is required".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        for t in [self.target_accept_block, self.target_accept_scalar] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("target acceptance {t} outside (0, 1)")));
            }
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::Config("initial step must be positive".into()));
        }
        Ok(())
    }

    pub fn kept(&self) -> usize {
        self.iterations - self.burn_in
    }
}

/// Post-burn-in acceptance rate of one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAcceptance {
    pub block: String,
    pub rate: f64,
}

/// Kept draws on the natural scale (`k`, `σ²`, `v`, `φ` exponentiated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    layout: ParamLayout,
    columns: Vec<String>,
    /// One row-major `kept × dim` matrix per chain.
    chains: Vec<Vec<f64>>,
    kept: usize,
    acceptance: Vec<Vec<BlockAcceptance>>,
}

impl PosteriorDraws {
    /// Assembles draws from per-chain row lists.
    pub fn from_chains(layout: ParamLayout, columns: Vec<String>, chains: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let dim = layout.dim();
        if columns.len() != dim {
            return Err(Error::Layout(format!("{} column names for dimension {dim}", columns.len())));
        }
        if chains.is_empty() {
            return Err(Error::Layout("no chains".into()));
        }
        let kept = chains[0].len();
        let mut flat = Vec::with_capacity(chains.len());
        for (c, rows) in chains.iter().enumerate() {
            if rows.len() != kept {
                return Err(Error::Layout(format!("chain {c} has {} draws, expected {kept}", rows.len())));
            }
            let mut m = Vec::with_capacity(kept * dim);
            for row in rows {
                if row.len() != dim {
                    return Err(Error::Layout(format!("draw of length {} for dimension {dim}", row.len())));
                }
                for (i, &x) in row.iter().enumerate() {
                    if !x.is_finite() || (layout.is_log_scale(i) && x <= 0.0) {
                        return Err(Error::Layout(format!("invalid value {x} in column `{}`", columns[i])));
                    }
                }
                m.extend_from_slice(row);
            }
            flat.push(m);
        }
        let acceptance = vec![Vec::new(); flat.len()];
        Ok(Self { layout, columns, chains: flat, kept, acceptance })
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn column_names(&self) -> &[String] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn draws_per_chain(&self) -> usize {
        self.kept
    }

    /// Total number of kept draws over all chains.
    pub fn len(&self) -> usize {
        self.kept * self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Draws of one chain in iteration order.
    pub fn chain(&self, c: usize) -> impl Iterator<Item = &[f64]> + '_ {
        self.chains[c].chunks_exact(self.dim())
    }

    /// All draws, chain by chain.
    pub fn iter_draws(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.chains.iter().flat_map(move |m| m.chunks_exact(self.dim()))
    }

    /// Column `j` split by chain.
    pub fn column(&self, j: usize) -> Vec<Vec<f64>> {
        (0..self.n_chains()).map(|c| self.chain(c).map(|d| d[j]).collect()).collect()
    }

    /// Per-chain block acceptance rates (empty for assembled draws).
    pub fn acceptance(&self) -> &[Vec<BlockAcceptance>] {
        &self.acceptance
    }
}

/// Runs `cfg.chains` independent chains in parallel.
pub fn run_chains(data: &SurvivalDataset, spec: &ModelSpec, cfg: &SamplerConfig) -> Result<PosteriorDraws> {
    cfg.validate()?;
    spec.priors.validate()?;
    let layout = spec.layout(data);
    let results: Vec<Result<ChainOutput>> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| Chain::new(data, spec, layout, cfg, c as u64).and_then(|ch| ch.run()))
        .collect();
    let mut chains = Vec::with_capacity(cfg.chains);
    let mut acceptance = Vec::with_capacity(cfg.chains);
    for r in results {
        let out = r?;
        chains.push(out.draws);
        acceptance.push(out.acceptance);
    }
    Ok(PosteriorDraws {
        layout,
        columns: layout.column_names(data.covariate_names(), data.cluster_labels()),
        chains,
        kept: cfg.kept(),
        acceptance,
    })
}

struct ChainOutput {
    draws: Vec<f64>,
    acceptance: Vec<BlockAcceptance>,
}

/// Robbins-Monro scale for one block.
struct Scale {
    log_scale: f64,
    target: f64,
    accepted: u64,
    tried: u64,
}

impl Scale {
    fn new(scale: f64, target: f64) -> Self {
        Self { log_scale: scale.ln(), target, accepted: 0, tried: 0 }
    }

    fn value(&self) -> f64 {
        self.log_scale.exp()
    }

    fn adapt(&mut self, accept_prob: f64, gain: f64) {
        self.log_scale += gain * (accept_prob - self.target);
    }

    fn record(&mut self, accepted: bool) {
        self.tried += 1;
        self.accepted += u64::from(accepted);
    }

    fn rate(&self) -> f64 {
        if self.tried == 0 {
            0.0
        } else {
            self.accepted as f64 / self.tried as f64
        }
    }
}

struct Chain<'a> {
    data: &'a SurvivalDataset,
    spec: &'a ModelSpec,
    layout: ParamLayout,
    cfg: &'a SamplerConfig,
    rng: ChaCha20Rng,
    rows: Vec<Vec<usize>>,
    theta: Vec<f64>,
    cluster_ll: Vec<f64>,
    prior: f64,
    /// Coefficients plus the shape coordinate, which follows them directly.
    joint_dim: usize,
    coef_chol: Vec<f64>,
    coef_scale: Scale,
    shape_scale: Scale,
    shift_scale: Scale,
    effect_scales: Vec<Scale>,
    phi_scale: Scale,
}

impl<'a> Chain<'a> {
    fn new(
        data: &'a SurvivalDataset,
        spec: &'a ModelSpec,
        layout: ParamLayout,
        cfg: &'a SamplerConfig,
        index: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index);
        let rows = data.rows_by_cluster();
        let q = layout.n_coef + usize::from(layout.family.has_shape());
        let mut coef_chol = vec![0.0; q * q];
        for i in 0..q {
            coef_chol[i * q + i] = cfg.initial_step;
        }
        let step = cfg.initial_step;
        let mut chain = Self {
            data,
            spec,
            layout,
            cfg,
            rng,
            rows,
            theta: Vec::new(),
            cluster_ll: Vec::new(),
            prior: 0.0,
            joint_dim: q,
            coef_chol,
            coef_scale: Scale::new(1.0, cfg.target_accept_block),
            shape_scale: Scale::new(step, cfg.target_accept_scalar),
            shift_scale: Scale::new(step, cfg.target_accept_scalar),
            effect_scales: (0..layout.n_clusters).map(|_| Scale::new(step, cfg.target_accept_scalar)).collect(),
            phi_scale: Scale::new(step, cfg.target_accept_scalar),
        };
        chain.initialise()?;
        Ok(chain)
    }

    fn initialise(&mut self) -> Result<()> {
        // Zero is β = 0, k = 1, σ² = 1, u = 0, v = 1 on the sampling scale.
        let mut base = vec![0.0; self.layout.dim()];
        if let Some(i) = self.layout.phi_index() {
            base[i] = (self.spec.priors.phi_upper / 2.0).ln();
        }
        for _ in 0..INIT_RETRIES {
            let theta: Vec<f64> = base
                .iter()
                .map(|x| x + INIT_JITTER * self.rng.sample::<f64, _>(StandardNormal))
                .collect();
            let prior = log_prior_unchecked(self.spec, &self.layout, &theta);
            if !prior.is_finite() {
                continue;
            }
            let cluster_ll = self.all_cluster_ll(&theta);
            if cluster_ll.iter().all(|x| x.is_finite()) {
                self.theta = theta;
                self.cluster_ll = cluster_ll;
                self.prior = prior;
                return Ok(());
            }
        }
        Err(Error::Initialisation(format!(
            "log posterior not finite after {INIT_RETRIES} jittered starts"
        )))
    }

    fn all_cluster_ll(&self, theta: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| rows_log_likelihood(self.data, &self.layout, theta, r))
            .collect()
    }

    fn gain(iter: usize) -> f64 {
        (iter as f64 + 1.0).powf(-0.6)
    }

    /// Metropolis accept/reject for a proposal whose log posterior changed by
    /// `delta`; returns the acceptance probability and the decision.
    fn decide(&mut self, delta: f64) -> (f64, bool) {
        if !delta.is_finite() {
            return (0.0, false);
        }
        let prob = delta.min(0.0).exp();
        let u: f64 = self.rng.random();
        (prob, u < prob)
    }

    fn current_ll(&self) -> f64 {
        self.cluster_ll.iter().sum()
    }

    /// Proposal touching every cluster (coefficients or shape).
    fn global_step(&mut self, proposal: Vec<f64>) -> (f64, bool) {
        let prior = log_prior_unchecked(self.spec, &self.layout, &proposal);
        if !prior.is_finite() {
            return (0.0, false);
        }
        let ll = self.all_cluster_ll(&proposal);
        let new_ll: f64 = ll.iter().sum();
        let delta = new_ll + prior - self.current_ll() - self.prior;
        let (p, ok) = self.decide(delta);
        if ok {
            self.theta = proposal;
            self.cluster_ll = ll;
            self.prior = prior;
        }
        (p, ok)
    }

    fn update_coefficients(&mut self) -> (f64, bool) {
        let q = self.joint_dim;
        let z: Vec<f64> = (0..q).map(|_| self.rng.sample(StandardNormal)).collect();
        let s = self.coef_scale.value();
        let mut proposal = self.theta.clone();
        for i in 0..q {
            let step: f64 = (0..=i).map(|j| self.coef_chol[i * q + j] * z[j]).sum();
            proposal[i] += s * step;
        }
        self.global_step(proposal)
    }

    fn update_shape(&mut self, idx: usize) -> (f64, bool) {
        let mut proposal = self.theta.clone();
        proposal[idx] += self.shape_scale.value() * self.rng.sample::<f64, _>(StandardNormal);
        self.global_step(proposal)
    }

    fn update_effect(&mut self, c: usize) -> (f64, bool) {
        let idx = self.layout.effect_range().start + c;
        let old = self.theta[idx];
        let step = self.effect_scales[c].value() * self.rng.sample::<f64, _>(StandardNormal);
        self.theta[idx] = old + step;
        let prior = log_prior_unchecked(self.spec, &self.layout, &self.theta);
        let ll = rows_log_likelihood(self.data, &self.layout, &self.theta, &self.rows[c]);
        let delta = ll + prior - self.cluster_ll[c] - self.prior;
        let (p, ok) = self.decide(delta);
        if ok {
            self.cluster_ll[c] = ll;
            self.prior = prior;
        } else {
            self.theta[idx] = old;
        }
        (p, ok)
    }

    /// Moves the intercept by `δ` and every effect by `-δ`.
    fn update_shift(&mut self) -> (f64, bool) {
        let delta = self.shift_scale.value() * self.rng.sample::<f64, _>(StandardNormal);
        let mut proposal = self.theta.clone();
        proposal[0] += delta;
        for i in self.layout.effect_range() {
            proposal[i] -= delta;
        }
        self.global_step(proposal)
    }

    fn update_phi(&mut self, idx: usize) -> (f64, bool) {
        let old = self.theta[idx];
        self.theta[idx] = old + self.phi_scale.value() * self.rng.sample::<f64, _>(StandardNormal);
        let prior = log_prior_unchecked(self.spec, &self.layout, &self.theta);
        let (p, ok) = self.decide(prior - self.prior);
        if ok {
            self.prior = prior;
        } else {
            self.theta[idx] = old;
        }
        (p, ok)
    }

    fn run(mut self) -> Result<ChainOutput> {
        let dim = self.layout.dim();
        let q = self.joint_dim;
        let mut draws = Vec::with_capacity(self.cfg.kept() * dim);
        let mut window = Window::new(self.cfg.adapt_window.max(q + 2), self.cfg.burn_in);
        let mut window_draws: Vec<f64> = Vec::new();

        for iter in 0..self.cfg.iterations {
            let adapting = iter < self.cfg.burn_in;
            let gain = Self::gain(iter);

            for _ in 0..q {
                let (p, ok) = self.update_coefficients();
                if adapting {
                    self.coef_scale.adapt(p, gain);
                } else {
                    self.coef_scale.record(ok);
                }
            }

            if let Some(i) = self.layout.shape_index() {
                let (p, ok) = self.update_shape(i);
                if adapting {
                    self.shape_scale.adapt(p, gain);
                } else {
                    self.shape_scale.record(ok);
                }
            }

            if self.layout.effect != EffectKind::None {
                for c in 0..self.layout.n_clusters {
                    let (p, ok) = self.update_effect(c);
                    if adapting {
                        self.effect_scales[c].adapt(p, gain);
                    } else {
                        self.effect_scales[c].record(ok);
                    }
                }
                let (p, ok) = self.update_shift();
                if adapting {
                    self.shift_scale.adapt(p, gain);
                } else {
                    self.shift_scale.record(ok);
                }
                let i = self.layout.phi_index().expect("phi slot exists with effects");
                let (p, ok) = self.update_phi(i);
                if adapting {
                    self.phi_scale.adapt(p, gain);
                } else {
                    self.phi_scale.record(ok);
                }
            }

            if adapting {
                window_draws.extend_from_slice(&self.theta[..q]);
                if window.closes_at(iter) {
                    self.refresh_covariance(&window_draws);
                    window_draws.clear();
                    window.advance();
                }
            } else {
                draws.extend(self.layout.to_natural(&self.theta));
            }
        }

        Ok(ChainOutput { draws, acceptance: self.acceptance_record() })
    }

    /// Replaces the coefficient proposal covariance with the regularised
    /// sample covariance of the last window and resets its scale.
    fn refresh_covariance(&mut self, samples: &[f64]) {
        let q = self.joint_dim;
        let n = samples.len() / q;
        if n < 2 {
            return;
        }
        let mut mean = vec![0.0; q];
        for row in samples.chunks_exact(q) {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x / n as f64;
            }
        }
        let mut cov = vec![0.0; q * q];
        for row in samples.chunks_exact(q) {
            for i in 0..q {
                for j in 0..=i {
                    cov[i * q + j] += (row[i] - mean[i]) * (row[j] - mean[j]) / (n as f64 - 1.0);
                }
            }
        }
        let w = n as f64 / (n as f64 + 5.0);
        for i in 0..q {
            for j in 0..=i {
                cov[i * q + j] *= w;
            }
            cov[i * q + i] += 1e-3 * (1.0 - w);
        }
        if let Some(l) = cholesky_lower(&cov, q) {
            self.coef_chol = l;
            self.coef_scale.log_scale = (2.38 / (q as f64).sqrt()).ln();
        }
    }

    fn acceptance_record(&self) -> Vec<BlockAcceptance> {
        let mut out = vec![BlockAcceptance { block: "beta".into(), rate: self.coef_scale.rate() }];
        if let Some(name) = self.layout.family.shape_name() {
            out.push(BlockAcceptance { block: name.into(), rate: self.shape_scale.rate() });
        }
        if self.layout.effect != EffectKind::None {
            let prefix = if self.layout.effect == EffectKind::Random { "u" } else { "v" };
            for (c, s) in self.effect_scales.iter().enumerate() {
                let label = &self.data.cluster_labels()[c];
                out.push(BlockAcceptance { block: format!("{prefix}[{label}]"), rate: s.rate() });
            }
            out.push(BlockAcceptance { block: "shift".into(), rate: self.shift_scale.rate() });
            out.push(BlockAcceptance { block: "phi".into(), rate: self.phi_scale.rate() });
        }
        out
    }
}

/// Doubling covariance-adaptation windows inside burn-in.
struct Window {
    end: usize,
    len: usize,
    burn_in: usize,
}

impl Window {
    fn new(first: usize, burn_in: usize) -> Self {
        Self { end: first.min(burn_in), len: first, burn_in }
    }

    fn closes_at(&self, iter: usize) -> bool {
        iter + 1 == self.end
    }

    fn advance(&mut self) {
        self.len *= 2;
        let next = self.end + self.len;
        // A final window too short to double is merged into its predecessor.
        self.end = if next + 2 * self.len > self.burn_in { self.burn_in } else { next };
    }
}

/// Lower Cholesky factor of a symmetric matrix given by its lower triangle.
fn cholesky_lower(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Some(l)
}
