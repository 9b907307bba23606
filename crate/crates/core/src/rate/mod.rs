//! Rate calculus: `φ ↦ (H_φ, H_φ⁻¹, r_φ, H_k)` and growth asymptotics.

mod asymptotic;
mod calculus;
mod phi;
mod rate_fn;

use thiserror::Error;

use crate::numerics::NumericError;

pub use asymptotic::{asymptotic_rate, AsymptoticRate};
pub use calculus::{
    classify_regime, h_k, h_k_prime, h_phi, h_phi_inv, is_subgeometric_sequence,
    key_inequality_check, r_phi, KeyInequalityReport, Regime, SubgeometricDiagnostics,
    DECAY_SLOPE, EPS_GEO,
};
pub use phi::{CustomPhi, PhiConfig, PhiFamily, PhiSpec};
pub use rate_fn::{DriftFunctionSeq, RateFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("invalid phi: {0}")]
    InvalidPhi(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}
