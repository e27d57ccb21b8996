//! The four parametric survival families and their conditional forms.
//!
//! Parameterisations:
//!
//! | family        | survival `S(t)`                      |
//! |---------------|--------------------------------------|
//! | exponential   | `exp(-rate · t)`                     |
//! | Weibull       | `exp(-scale · t^shape)`              |
//! | log-logistic  | `1 / (1 + e^location · t^shape)`     |
//! | log-normal    | `1 - Φ((log t - location) / σ)`      |
//!
//! A random offset `u` moves the linear-scale parameter (`rate·e^u`,
//! `scale·e^u`, `location + u`). A frailty `v` multiplies the cumulative
//! hazard, so `S(t | v) = S(t)^v`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{as_f64, lit, Real};
use crate::specfun::{ln_std_normal_pdf, ln_std_normal_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Weibull,
    LogLogistic,
    LogNormal,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Exponential,
        Family::Weibull,
        Family::LogLogistic,
        Family::LogNormal,
    ];

    /// Whether the family carries a second (shape or variance) parameter.
    pub fn has_shape(self) -> bool {
        !matches!(self, Family::Exponential)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Weibull => "weibull",
            Family::LogLogistic => "loglogistic",
            Family::LogNormal => "lognormal",
        }
    }

    /// Column name of the second parameter, if any.
    pub fn shape_name(self) -> Option<&'static str> {
        match self {
            Family::Exponential => None,
            Family::Weibull | Family::LogLogistic => Some("k"),
            Family::LogNormal => Some("sigma2"),
        }
    }

    /// Builds parameters from a linear predictor `eta` and the second
    /// parameter (ignored for the exponential).
    pub fn from_linear_predictor<T: Real>(self, eta: T, shape: T) -> FamilyParams<T> {
        match self {
            Family::Exponential => FamilyParams::Exponential { rate: eta.exp() },
            Family::Weibull => FamilyParams::Weibull { scale: eta.exp(), shape },
            Family::LogLogistic => FamilyParams::LogLogistic { location: eta, shape },
            Family::LogNormal => FamilyParams::LogNormal { location: eta, variance: shape },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "exponential" | "exp" => Ok(Family::Exponential),
            "weibull" => Ok(Family::Weibull),
            "loglogistic" => Ok(Family::LogLogistic),
            "lognormal" => Ok(Family::LogNormal),
            _ => Err(Error::Config(format!("unknown family `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyParams<T> {
    Exponential { rate: T },
    Weibull { scale: T, shape: T },
    LogLogistic { location: T, shape: T },
    LogNormal { location: T, variance: T },
}

/// Conditioning on a cluster-level effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Effect<T> {
    None,
    RandomOffset(T),
    Frailty(T),
}

impl<T: Real> Effect<T> {
    /// Maps the identity effects (`u = 0`, `v = 1`) to `None`.
    pub fn normalized(self) -> Self {
        match self {
            Effect::RandomOffset(u) if u == T::zero() => Effect::None,
            Effect::Frailty(v) if v == T::one() => Effect::None,
            e => e,
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Effect::None => Ok(()),
            Effect::RandomOffset(u) if u.is_finite() => Ok(()),
            Effect::RandomOffset(u) => domain("random offset must be finite", as_f64(u)),
            Effect::Frailty(v) if v > T::zero() && v.is_finite() => Ok(()),
            Effect::Frailty(v) => domain("frailty must be positive", as_f64(v)),
        }
    }
}

impl<T: Real> FamilyParams<T> {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Exponential { .. } => Family::Exponential,
            FamilyParams::Weibull { .. } => Family::Weibull,
            FamilyParams::LogLogistic { .. } => Family::LogLogistic,
            FamilyParams::LogNormal { .. } => Family::LogNormal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: T, what: &'static str| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                domain(what, as_f64(x))
            }
        };
        let finite = |x: T, what: &'static str| {
            if x.is_finite() {
                Ok(())
            } else {
                domain(what, as_f64(x))
            }
        };
        match *self {
            FamilyParams::Exponential { rate } => positive(rate, "exponential rate must be > 0"),
            FamilyParams::Weibull { scale, shape } => {
                positive(scale, "Weibull scale must be > 0")?;
                positive(shape, "Weibull shape must be > 0")
            }
            FamilyParams::LogLogistic { location, shape } => {
                finite(location, "log-logistic location must be finite")?;
                positive(shape, "log-logistic shape must be > 0")
            }
            FamilyParams::LogNormal { location, variance } => {
                finite(location, "log-normal location must be finite")?;
                positive(variance, "log-normal variance must be > 0")
            }
        }
    }

    /// Applies a random offset to the linear-scale parameter.
    pub fn with_offset(&self, u: T) -> Self {
        match *self {
            FamilyParams::Exponential { rate } => FamilyParams::Exponential { rate: rate * u.exp() },
            FamilyParams::Weibull { scale, shape } => FamilyParams::Weibull {
                scale: scale * u.exp(),
                shape,
            },
            FamilyParams::LogLogistic { location, shape } => FamilyParams::LogLogistic {
                location: location + u,
                shape,
            },
            FamilyParams::LogNormal { location, variance } => FamilyParams::LogNormal {
                location: location + u,
                variance,
            },
        }
    }

    fn base_ln_survival(&self, t: T) -> T {
        match *self {
            FamilyParams::Exponential { rate } => -rate * t,
            FamilyParams::Weibull { scale, shape } => -scale * t.powf(shape),
            FamilyParams::LogLogistic { location, shape } => -softplus(location + shape * t.ln()),
            FamilyParams::LogNormal { location, variance } => {
                ln_std_normal_sf((t.ln() - location) / variance.sqrt())
            }
        }
    }

    fn base_ln_density(&self, t: T) -> T {
        let one = T::one();
        match *self {
            FamilyParams::Exponential { rate } => rate.ln() - rate * t,
            FamilyParams::Weibull { scale, shape } => {
                scale.ln() + shape.ln() + (shape - one) * t.ln() - scale * t.powf(shape)
            }
            FamilyParams::LogLogistic { location, shape } => {
                let x = location + shape * t.ln();
                location + shape.ln() + (shape - one) * t.ln() - lit::<T>(2.0) * softplus(x)
            }
            FamilyParams::LogNormal { location, variance } => {
                let sigma = variance.sqrt();
                let z = (t.ln() - location) / sigma;
                ln_std_normal_pdf(z) - t.ln() - sigma.ln()
            }
        }
    }

    /// `log h(t)` of the unconditioned distribution.
    fn base_ln_hazard(&self, t: T) -> T {
        let one = T::one();
        match *self {
            FamilyParams::Exponential { rate } => rate.ln(),
            FamilyParams::Weibull { scale, shape } => scale.ln() + shape.ln() + (shape - one) * t.ln(),
            FamilyParams::LogLogistic { location, shape } => {
                let x = location + shape * t.ln();
                location + shape.ln() + (shape - one) * t.ln() - softplus(x)
            }
            FamilyParams::LogNormal { .. } => self.base_ln_density(t) - self.base_ln_survival(t),
        }
    }

    /// `log f(t | effect)`.
    pub fn log_density(&self, effect: Effect<T>, t: T) -> Result<T> {
        check_time(t)?;
        Ok(match effect.normalized() {
            Effect::None => self.base_ln_density(t),
            Effect::RandomOffset(u) => self.with_offset(u).base_ln_density(t),
            Effect::Frailty(v) => v.ln() + self.base_ln_hazard(t) + v * self.base_ln_survival(t),
        })
    }

    /// `log S(t | effect)`.
    pub fn log_survival(&self, effect: Effect<T>, t: T) -> Result<T> {
        check_time(t)?;
        Ok(match effect.normalized() {
            Effect::None => self.base_ln_survival(t),
            Effect::RandomOffset(u) => self.with_offset(u).base_ln_survival(t),
            Effect::Frailty(v) => v * self.base_ln_survival(t),
        })
    }

    /// `h(t | effect)`.
    pub fn hazard(&self, effect: Effect<T>, t: T) -> Result<T> {
        check_time(t)?;
        Ok(match effect.normalized() {
            Effect::None => self.base_ln_hazard(t).exp(),
            Effect::RandomOffset(u) => self.with_offset(u).base_ln_hazard(t).exp(),
            Effect::Frailty(v) => v * self.base_ln_hazard(t).exp(),
        })
    }

    /// `S(t | effect)` with `S(0) = 1`.
    pub fn survival(&self, effect: Effect<T>, t: T) -> T {
        if t <= T::zero() {
            return T::one();
        }
        match effect.normalized() {
            Effect::None => self.base_ln_survival(t).exp(),
            Effect::RandomOffset(u) => self.with_offset(u).base_ln_survival(t).exp(),
            Effect::Frailty(v) => (v * self.base_ln_survival(t)).exp(),
        }
    }

    /// Representation with an explicit time scale, where one exists.
    pub fn to_alt(&self) -> Option<AltFamilyParams<T>> {
        match *self {
            FamilyParams::Weibull { scale, shape } => Some(AltFamilyParams::Weibull {
                time_scale: scale.powf(-T::one() / shape),
                shape,
            }),
            FamilyParams::LogLogistic { location, shape } => Some(AltFamilyParams::LogLogistic {
                time_scale: (-location / shape).exp(),
                shape,
            }),
            _ => None,
        }
    }
}

/// Weibull and log-logistic written with a time scale:
/// `S(t) = exp(-(t/scale)^k)` and `S(t) = 1 / (1 + (t/scale)^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum AltFamilyParams<T> {
    Weibull { time_scale: T, shape: T },
    LogLogistic { time_scale: T, shape: T },
}

impl<T: Real> AltFamilyParams<T> {
    pub fn validate(&self) -> Result<()> {
        let (scale, shape) = match *self {
            AltFamilyParams::Weibull { time_scale, shape } => (time_scale, shape),
            AltFamilyParams::LogLogistic { time_scale, shape } => (time_scale, shape),
        };
        if !(scale > T::zero() && scale.is_finite()) {
            return domain("time scale must be > 0", as_f64(scale));
        }
        if !(shape > T::zero() && shape.is_finite()) {
            return domain("shape must be > 0", as_f64(shape));
        }
        Ok(())
    }

    /// Weibull: `scale = time_scale^{-k}`; log-logistic: `location = -k log(time_scale)`.
    pub fn to_standard(&self) -> FamilyParams<T> {
        match *self {
            AltFamilyParams::Weibull { time_scale, shape } => FamilyParams::Weibull {
                scale: time_scale.powf(-shape),
                shape,
            },
            AltFamilyParams::LogLogistic { time_scale, shape } => FamilyParams::LogLogistic {
                location: -shape * time_scale.ln(),
                shape,
            },
        }
    }

    /// Survival evaluated directly in this parameterisation.
    pub fn survival(&self, t: T) -> T {
        match *self {
            AltFamilyParams::Weibull { time_scale, shape } => (-(t / time_scale).powf(shape)).exp(),
            AltFamilyParams::LogLogistic { time_scale, shape } => {
                T::one() / (T::one() + (t / time_scale).powf(shape))
            }
        }
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        domain("time must be positive and finite", as_f64(t))
    }
}
