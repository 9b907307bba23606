//! Closed-form growth of `r_φ(n)` for the named families.

use std::fmt;

use crate::rate::{PhiFamily, PhiSpec};
use crate::real::Real;

/// Leading-order behavior of `r_φ(n)` as `n → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticRate<T> {
    /// `r(n) ~ constant · n^exponent`.
    Polynomial { exponent: T, constant: T },
    /// `r(n) ≍ log^exponent(n)`.
    LogPower { exponent: T },
    /// `r(n) ≍ n^prefactor_exponent · exp(scale · n^stretch)`.
    StretchedExponential {
        prefactor_exponent: T,
        stretch: T,
        scale: T,
    },
}

impl<T: Real> AsymptoticRate<T> {
    /// `log` of the leading-order expression at `n`, dropping the constant
    /// factor for the ≍ forms.
    pub fn log_value(&self, n: T) -> T {
        match *self {
            Self::Polynomial { exponent, constant } => constant.ln() + exponent * n.ln(),
            Self::LogPower { exponent } => exponent * n.ln().ln(),
            Self::StretchedExponential {
                prefactor_exponent,
                stretch,
                scale,
            } => prefactor_exponent * n.ln() + scale * n.powf(stretch),
        }
    }
}

impl<T: Real> fmt::Display for AsymptoticRate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial { exponent, constant } => write!(f, "{constant}*n^{exponent}"),
            Self::LogPower { exponent } => write!(f, "log(n)^{exponent}"),
            Self::StretchedExponential {
                prefactor_exponent,
                stretch,
                scale,
            } => write!(f, "n^{prefactor_exponent}*exp({scale}*n^{stretch})"),
        }
    }
}

/// Descriptor for named families, `None` for custom moduli.
pub fn asymptotic_rate<T: Real>(phi: &PhiSpec<T>) -> Option<AsymptoticRate<T>> {
    let c = phi.scale()?;
    match phi.family() {
        PhiFamily::Constant => Some(AsymptoticRate::Polynomial {
            exponent: T::zero(),
            constant: c,
        }),
        PhiFamily::Power => {
            let a = phi.alpha()?;
            let q = T::one() - a;
            let e = a / q;
            // r(z) = c (1 + c(1-α) z)^{α/(1-α)}
            Some(AsymptoticRate::Polynomial {
                exponent: e,
                constant: c * (c * q).powf(e),
            })
        }
        PhiFamily::Logarithmic => Some(AsymptoticRate::LogPower {
            exponent: phi.alpha()?,
        }),
        PhiFamily::SubExponential => {
            let a = phi.alpha()?;
            let a1 = T::one() + a;
            Some(AsymptoticRate::StretchedExponential {
                prefactor_exponent: -a / a1,
                stretch: T::one() / a1,
                scale: (c * a1).powf(T::one() / a1),
            })
        }
        PhiFamily::Custom => None,
    }
}
