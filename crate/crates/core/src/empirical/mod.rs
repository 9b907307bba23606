//! Empirical convergence rates: TV-curve diagnostics against a candidate
//! rate and Monte-Carlo return-time moments.

mod diagnostic;
mod montecarlo;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finite_chain::ChainError;
use crate::models::ModelError;
use crate::rate::{PhiConfig, PhiSpec, RateError, RateFunction};
use crate::real::Real;

pub use diagnostic::{
    brt_truncation_error, fit_rate_exponent, rate_diagnostic, truncation_cap, write_diagnostic_csv,
    DiagnosticOptions, RateClass, RateDiagnostic, RateFit, DEAD_BAND, TRUNCATION_FRACTION,
};
pub use montecarlo::{
    hill_index, mc_return_moment, write_moment_csv, McMoment, McOptions, CENSOR_WARN_FRACTION,
    CYCLE_CAP,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmpiricalError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A candidate rate sequence `r(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateSpec<T> {
    /// `r(n) = max(n, 1)^β`.
    Power { beta: T },
    /// `r(n) = exp(a n^β)`.
    StretchedExp { a: T, beta: T },
    /// `r_φ(n)`.
    Phi { phi: PhiConfig },
    /// `r(0), r(1), …`; indices past the end are an error.
    Tabulated { values: Vec<T> },
}

impl<T: Real> RateSpec<T> {
    /// `r(0), …, r(n_max)`.
    pub fn table(&self, n_max: usize) -> Result<Vec<T>, EmpiricalError> {
        let out = match self {
            Self::Power { beta } => (0..=n_max)
                .map(|n| T::from_usize_lossy(n.max(1)).powf(*beta))
                .collect(),
            Self::StretchedExp { a, beta } => (0..=n_max)
                .map(|n| (*a * T::from_usize_lossy(n).powf(*beta)).exp())
                .collect(),
            Self::Phi { phi } => {
                let spec = PhiSpec::from_config(phi)?;
                RateFunction::tabulate(spec, n_max)?.table()
            }
            Self::Tabulated { values } => {
                if values.len() <= n_max {
                    return Err(EmpiricalError::InsufficientData(format!(
                        "tabulated rate has {} values, need {}",
                        values.len(),
                        n_max + 1
                    )));
                }
                values[..=n_max].to_vec()
            }
        };
        if let Some((n, v)) = out.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
            return Err(EmpiricalError::Domain(format!("r({n}) = {v} is not positive")));
        }
        Ok(out)
    }
}
