//! Drift moduli: concave, nondecreasing, positive functions on `[1, ∞)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::rate::RateError;
use crate::real::{log_grid, Real};

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied modulus with its derivative.
#[derive(Clone)]
pub struct CustomPhi<T: Real> {
    label: String,
    value: ScalarFn<T>,
    deriv: ScalarFn<T>,
    config: Option<PhiConfig>,
}

impl<T: Real> fmt::Debug for CustomPhi<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPhi").field("label", &self.label).finish()
    }
}

#[derive(Clone, Debug)]
enum Kind<T: Real> {
    Constant {
        c: T,
    },
    Power {
        c: T,
        alpha: T,
    },
    Logarithmic {
        c: T,
        alpha: T,
    },
    /// `c v / log^α v` for `v >= v0`, tangent line `intercept + slope v` below.
    SubExponential {
        c: T,
        alpha: T,
        v0: T,
        slope: T,
        intercept: T,
        h_v0: T,
    },
    Custom(CustomPhi<T>),
}

/// Family tag of a [`PhiSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiFamily {
    Constant,
    Power,
    Logarithmic,
    SubExponential,
    Custom,
}

/// A drift modulus φ from a named family or user supplied.
#[derive(Clone, Debug)]
pub struct PhiSpec<T: Real> {
    kind: Kind<T>,
}

/// Serializable description `{family, c, alpha, v0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub family: String,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn bad(msg: impl Into<String>) -> RateError {
    RateError::InvalidPhi(msg.into())
}

impl<T: Real> PhiSpec<T> {
    pub fn constant(c: T) -> Result<Self, RateError> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(bad(format!("constant: c must be positive, got {c}")));
        }
        Ok(Self {
            kind: Kind::Constant { c },
        })
    }

    /// `φ(v) = c v^α`, `α ∈ [0, 1)`.
    pub fn power(c: T, alpha: T) -> Result<Self, RateError> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(bad(format!("power: c must be positive, got {c}")));
        }
        if !(alpha >= T::zero() && alpha < T::one()) {
            return Err(bad(format!("power: alpha must lie in [0, 1), got {alpha}")));
        }
        Ok(Self {
            kind: Kind::Power { c, alpha },
        })
    }

    /// `φ(v) = c (1 + log v)^α`, `α >= 0`, `c ∈ (0, 1]`.
    ///
    /// Concavity on `[1, ∞)` additionally requires `α <= 2`; larger exponents
    /// are rejected by [`PhiSpec::validate`].
    pub fn logarithmic(c: T, alpha: T) -> Result<Self, RateError> {
        if !(c > T::zero() && c <= T::one()) {
            return Err(bad(format!("logarithmic: c must lie in (0, 1], got {c}")));
        }
        if !(alpha >= T::zero() && alpha.is_finite()) {
            return Err(bad(format!("logarithmic: alpha must be >= 0, got {alpha}")));
        }
        let spec = Self {
            kind: Kind::Logarithmic { c, alpha },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `φ(v) = c v / log^α(v)` for `v >= v0`, continued below `v0` by its
    /// tangent line so that φ is C¹ and concave on `[1, ∞)`.
    ///
    /// `v0` defaults to `e^{α+1}`, the smallest admissible splice point.
    pub fn sub_exponential(c: T, alpha: T, v0: Option<T>) -> Result<Self, RateError> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(bad(format!("subexponential: c must be positive, got {c}")));
        }
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(bad(format!("subexponential: alpha must be positive, got {alpha}")));
        }
        let min_v0 = (alpha + T::one()).exp();
        let v0 = v0.unwrap_or(min_v0);
        if !(v0 >= min_v0 * (T::one() - T::epsilon() * T::lit(8.0))) {
            return Err(bad(format!(
                "subexponential: splice point v0 = {v0} must be >= e^(alpha+1) = {min_v0}"
            )));
        }
        let l0 = v0.ln();
        let phi_v0 = c * v0 / l0.powf(alpha);
        let slope = c * (l0 - alpha) / l0.powf(alpha + T::one());
        let intercept = phi_v0 - slope * v0;
        // ∫_1^{v0} dx / (intercept + slope x)
        let h_v0 = (slope * (v0 - T::one()) / (intercept + slope)).ln_1p() / slope;
        Ok(Self {
            kind: Kind::SubExponential {
                c,
                alpha,
                v0,
                slope,
                intercept,
                h_v0,
            },
        })
    }

    /// Arbitrary modulus given by value and derivative evaluators.
    pub fn custom<F, D>(label: impl Into<String>, value: F, deriv: D) -> Self
    where
        F: Fn(T) -> T + Send + Sync + 'static,
        D: Fn(T) -> T + Send + Sync + 'static,
    {
        Self {
            kind: Kind::Custom(CustomPhi {
                label: label.into(),
                value: Arc::new(value),
                deriv: Arc::new(deriv),
                config: None,
            }),
        }
    }

    /// `φ(v) = λ v`: the geometric-regime modulus.
    pub fn linear(lambda: T) -> Result<Self, RateError> {
        if !(lambda > T::zero() && lambda.is_finite()) {
            return Err(bad(format!("linear: slope must be positive, got {lambda}")));
        }
        let mut spec = Self::custom(format!("{lambda}*v"), move |v| lambda * v, move |_| lambda);
        spec.set_config(PhiConfig {
            family: "custom-linear".into(),
            c: lambda.to_f64_lossy(),
            alpha: None,
            v0: None,
        });
        Ok(spec)
    }

    /// `φ(v) = c v (1 + log v)^{-a}` for `v >= e^a`, tangent line below.
    pub fn log_damped(c: T, a: T) -> Result<Self, RateError> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(bad(format!("log-damped: c must be positive, got {c}")));
        }
        if !(a >= T::zero() && a.is_finite()) {
            return Err(bad(format!("log-damped: exponent must be >= 0, got {a}")));
        }
        let f = move |v: T| c * v * (T::one() + v.ln()).powf(-a);
        let df = move |v: T| {
            let l1 = T::one() + v.ln();
            c * l1.powf(-a - T::one()) * (l1 - a)
        };
        let vs = a.exp();
        let (fs, ds) = (f(vs), df(vs));
        let value = move |v: T| if v >= vs { f(v) } else { fs + ds * (v - vs) };
        let deriv = move |v: T| if v >= vs { df(v) } else { ds };
        let mut spec = Self::custom(format!("{c}*v*(1+log v)^-{a}"), value, deriv);
        spec.set_config(PhiConfig {
            family: "log-damped".into(),
            c: c.to_f64_lossy(),
            alpha: Some(a.to_f64_lossy()),
            v0: None,
        });
        Ok(spec)
    }

    fn set_config(&mut self, cfg: PhiConfig) {
        if let Kind::Custom(custom) = &mut self.kind {
            custom.config = Some(cfg);
        }
    }

    pub fn from_config(cfg: &PhiConfig) -> Result<Self, RateError> {
        let c = T::lit(cfg.c);
        let alpha = || {
            cfg.alpha
                .map(T::lit)
                .ok_or_else(|| bad(format!("family '{}' needs alpha", cfg.family)))
        };
        match cfg.family.as_str() {
            "constant" => Self::constant(c),
            "power" => Self::power(c, alpha()?),
            "logarithmic" => Self::logarithmic(c, alpha()?),
            "subexponential" => Self::sub_exponential(c, alpha()?, cfg.v0.map(T::lit)),
            "custom-linear" => Self::linear(c),
            "log-damped" => Self::log_damped(c, alpha()?),
            other => Err(bad(format!("unknown phi family '{other}'"))),
        }
    }

    /// Config record, when the modulus has one (every named family does).
    pub fn to_config(&self) -> Option<PhiConfig> {
        let f = |x: T| x.to_f64_lossy();
        match &self.kind {
            Kind::Constant { c } => Some(PhiConfig {
                family: "constant".into(),
                c: f(*c),
                alpha: None,
                v0: None,
            }),
            Kind::Power { c, alpha } => Some(PhiConfig {
                family: "power".into(),
                c: f(*c),
                alpha: Some(f(*alpha)),
                v0: None,
            }),
            Kind::Logarithmic { c, alpha } => Some(PhiConfig {
                family: "logarithmic".into(),
                c: f(*c),
                alpha: Some(f(*alpha)),
                v0: None,
            }),
            Kind::SubExponential { c, alpha, v0, .. } => Some(PhiConfig {
                family: "subexponential".into(),
                c: f(*c),
                alpha: Some(f(*alpha)),
                v0: Some(f(*v0)),
            }),
            Kind::Custom(custom) => custom.config.clone(),
        }
    }

    pub fn family(&self) -> PhiFamily {
        match self.kind {
            Kind::Constant { .. } => PhiFamily::Constant,
            Kind::Power { .. } => PhiFamily::Power,
            Kind::Logarithmic { .. } => PhiFamily::Logarithmic,
            Kind::SubExponential { .. } => PhiFamily::SubExponential,
            Kind::Custom(_) => PhiFamily::Custom,
        }
    }

    /// Scale parameter `c` (the multiplier for custom moduli is not tracked).
    pub fn scale(&self) -> Option<T> {
        match &self.kind {
            Kind::Constant { c }
            | Kind::Power { c, .. }
            | Kind::Logarithmic { c, .. }
            | Kind::SubExponential { c, .. } => Some(*c),
            Kind::Custom(_) => None,
        }
    }

    /// Exponent parameter α of the named families.
    pub fn alpha(&self) -> Option<T> {
        match &self.kind {
            Kind::Power { alpha, .. }
            | Kind::Logarithmic { alpha, .. }
            | Kind::SubExponential { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// φ(v).
    pub fn eval(&self, v: T) -> T {
        match &self.kind {
            Kind::Constant { c } => *c,
            Kind::Power { c, alpha } => *c * v.powf(*alpha),
            Kind::Logarithmic { c, alpha } => *c * (T::one() + v.ln()).powf(*alpha),
            Kind::SubExponential {
                c,
                alpha,
                v0,
                slope,
                intercept,
                ..
            } => {
                if v >= *v0 {
                    *c * v / v.ln().powf(*alpha)
                } else {
                    *intercept + *slope * v
                }
            }
            Kind::Custom(custom) => (custom.value)(v),
        }
    }

    /// φ′(v).
    pub fn deriv(&self, v: T) -> T {
        match &self.kind {
            Kind::Constant { .. } => T::zero(),
            Kind::Power { c, alpha } => {
                if *alpha == T::zero() {
                    T::zero()
                } else {
                    *c * *alpha * v.powf(*alpha - T::one())
                }
            }
            Kind::Logarithmic { c, alpha } => {
                if *alpha == T::zero() {
                    T::zero()
                } else {
                    *c * *alpha * (T::one() + v.ln()).powf(*alpha - T::one()) / v
                }
            }
            Kind::SubExponential {
                c, alpha, v0, slope, ..
            } => {
                if v >= *v0 {
                    let l = v.ln();
                    *c * (l - *alpha) / l.powf(*alpha + T::one())
                } else {
                    *slope
                }
            }
            Kind::Custom(custom) => (custom.deriv)(v),
        }
    }

    /// `β φ`.
    pub fn scaled(&self, beta: T) -> Result<Self, RateError> {
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(bad(format!("scale factor must be positive, got {beta}")));
        }
        match &self.kind {
            Kind::Constant { c } => Self::constant(*c * beta),
            Kind::Power { c, alpha } => Self::power(*c * beta, *alpha),
            Kind::Logarithmic { c, alpha } => Ok(Self {
                kind: Kind::Logarithmic {
                    c: *c * beta,
                    alpha: *alpha,
                },
            }),
            Kind::SubExponential { c, alpha, v0, .. } => {
                Self::sub_exponential(*c * beta, *alpha, Some(*v0))
            }
            Kind::Custom(custom) => {
                let (f, d) = (custom.value.clone(), custom.deriv.clone());
                let mut spec = Self::custom(
                    format!("{beta}*({})", custom.label),
                    move |v| beta * f(v),
                    move |v| beta * d(v),
                );
                if let Some(mut cfg) = custom.config.clone() {
                    cfg.c *= beta.to_f64_lossy();
                    spec.set_config(cfg);
                }
                Ok(spec)
            }
        }
    }

    /// Whether `φ(v) → ∞`. Named families are decided analytically, custom
    /// moduli by evaluation at `v = 1e12` against `threshold`.
    pub fn is_unbounded_beyond(&self, threshold: T) -> bool {
        match &self.kind {
            Kind::Constant { .. } => false,
            Kind::Power { alpha, .. } | Kind::Logarithmic { alpha, .. } => *alpha > T::zero(),
            Kind::SubExponential { .. } => true,
            Kind::Custom(_) => self.eval(T::lit(1e12)) > threshold,
        }
    }

    /// Closed-form `H_φ(v)` where one exists.
    pub(crate) fn h_closed(&self, v: T) -> Option<T> {
        match &self.kind {
            Kind::Constant { c } => Some((v - T::one()) / *c),
            Kind::Power { c, alpha } => {
                let q = T::one() - *alpha;
                Some((q * v.ln()).exp_m1() / (*c * q))
            }
            Kind::SubExponential {
                c,
                alpha,
                v0,
                slope,
                intercept,
                h_v0,
            } => {
                if v <= *v0 {
                    Some((*slope * (v - T::one()) / (*intercept + *slope)).ln_1p() / *slope)
                } else {
                    let a1 = *alpha + T::one();
                    Some(*h_v0 + (v.ln().powf(a1) - v0.ln().powf(a1)) / (*c * a1))
                }
            }
            Kind::Logarithmic { .. } | Kind::Custom(_) => None,
        }
    }

    /// Closed-form `H_φ⁻¹(z)` where one exists.
    pub(crate) fn h_inv_closed(&self, z: T) -> Option<T> {
        match &self.kind {
            Kind::Constant { c } => Some(T::one() + *c * z),
            Kind::Power { c, alpha } => {
                let q = T::one() - *alpha;
                Some(((*c * q * z).ln_1p() / q).exp())
            }
            Kind::SubExponential {
                c,
                alpha,
                v0,
                slope,
                intercept,
                h_v0,
            } => {
                if z <= *h_v0 {
                    Some(T::one() + (*intercept + *slope) * (*slope * z).exp_m1() / *slope)
                } else {
                    let a1 = *alpha + T::one();
                    let l = (v0.ln().powf(a1) + *c * a1 * (z - *h_v0)).powf(T::one() / a1);
                    Some(l.exp())
                }
            }
            Kind::Logarithmic { .. } | Kind::Custom(_) => None,
        }
    }

    /// Checks positivity, monotonicity and the concavity witness (φ′
    /// nonincreasing) on a log-grid over `[1, 1e12]`.
    pub fn validate(&self) -> Result<(), RateError> {
        let grid = log_grid(T::one(), T::lit(1e12), 241);
        let slack = T::tol(1e-12, 64.0);
        let mut prev: Option<(T, T)> = None;
        for &v in &grid {
            let (f, d) = (self.eval(v), self.deriv(v));
            if !(f > T::zero()) || !f.is_finite() {
                return Err(bad(format!("phi({v}) = {f} is not positive and finite")));
            }
            if d < -slack * f / v || d.is_nan() {
                return Err(bad(format!("phi'({v}) = {d} is negative")));
            }
            if let Some((pv, pd)) = prev {
                if d > pd + slack * pd.abs().max(T::epsilon()) {
                    return Err(bad(format!(
                        "concavity witness failed: phi'({pv}) = {pd} < phi'({v}) = {d}"
                    )));
                }
            }
            prev = Some((v, d));
        }
        Ok(())
    }
}

impl<T: Real> fmt::Display for PhiSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Constant { c } => write!(f, "constant(c={c})"),
            Kind::Power { c, alpha } => write!(f, "power(c={c}, alpha={alpha})"),
            Kind::Logarithmic { c, alpha } => write!(f, "logarithmic(c={c}, alpha={alpha})"),
            Kind::SubExponential { c, alpha, v0, .. } => {
                write!(f, "subexponential(c={c}, alpha={alpha}, v0={v0})")
            }
            Kind::Custom(custom) => write!(f, "custom({})", custom.label),
        }
    }
}
