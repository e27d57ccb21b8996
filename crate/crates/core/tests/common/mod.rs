//! Oracles shared by the integration tests: Gauss-Legendre quadrature and
//! survival functions written out directly.

#![allow(dead_code)]

use statrs::function::erf::erfc;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre over `[a, b]` with `panels` equal panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for &(x, w) in &rule {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `∫_0^τ S(t) dt` through `t = τ s^8`, which flattens any power-law
/// behaviour at the origin.
pub fn rmst_quadrature(surv: impl Fn(f64) -> f64, tau: f64) -> f64 {
    integrate(|s| 8.0 * tau * s.powi(7) * surv(tau * s.powi(8)), 0.0, 1.0, 512)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Hand-written survival curve, density and family tag.
#[derive(Debug, Clone, Copy)]
pub enum Oracle {
    Exp { rate: f64 },
    Weibull { scale: f64, shape: f64 },
    LogLogistic { location: f64, shape: f64 },
    LogNormal { location: f64, sigma: f64 },
}

impl Oracle {
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match *self {
            Oracle::Exp { rate } => (-rate * t).exp(),
            Oracle::Weibull { scale, shape } => (-scale * t.powf(shape)).exp(),
            Oracle::LogLogistic { location, shape } => 1.0 / (1.0 + (location + shape * t.ln()).exp()),
            Oracle::LogNormal { location, sigma } => normal_sf((t.ln() - location) / sigma),
        }
    }

    pub fn density(&self, t: f64) -> f64 {
        match *self {
            Oracle::Exp { rate } => rate * (-rate * t).exp(),
            Oracle::Weibull { scale, shape } => scale * shape * t.powf(shape - 1.0) * (-scale * t.powf(shape)).exp(),
            Oracle::LogLogistic { location, shape } => {
                let w = (location + shape * t.ln()).exp();
                shape * w / (t * (1.0 + w) * (1.0 + w))
            }
            Oracle::LogNormal { location, sigma } => normal_pdf((t.ln() - location) / sigma) / (t * sigma),
        }
    }

    /// Shifts the linear-scale parameter by `u`.
    pub fn offset(&self, u: f64) -> Self {
        match *self {
            Oracle::Exp { rate } => Oracle::Exp { rate: rate * u.exp() },
            Oracle::Weibull { scale, shape } => Oracle::Weibull { scale: scale * u.exp(), shape },
            Oracle::LogLogistic { location, shape } => Oracle::LogLogistic { location: location + u, shape },
            Oracle::LogNormal { location, sigma } => Oracle::LogNormal { location: location + u, sigma },
        }
    }

    pub fn params(&self) -> bayes_rmst::FamilyParams {
        use bayes_rmst::FamilyParams as P;
        match *self {
            Oracle::Exp { rate } => P::Exponential { rate },
            Oracle::Weibull { scale, shape } => P::Weibull { scale, shape },
            Oracle::LogLogistic { location, shape } => P::LogLogistic { location, shape },
            Oracle::LogNormal { location, sigma } => P::LogNormal { location, variance: sigma * sigma },
        }
    }
}
