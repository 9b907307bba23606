//! Verification of drift conditions `PV + φ∘V ≤ V + b 1_C` and the
//! inequalities that follow from them.

mod record;
mod sequence;
mod verify;

use thiserror::Error;

use crate::finite_chain::ChainError;
use crate::numerics::NumericError;
use crate::rate::RateError;

pub use record::{CertificateRecord, VRecord};
pub use sequence::{
    tt_condition_i, verify_drift_sequence, verify_moment_bounds, BoundCheck, ConditionReport,
    MomentBoundsReport, SequenceReport, MOMENT_REL_TOL,
};
pub use verify::{
    linearity_defect, shrink_threshold, shrink_to_sublevel, verify_drift, CertificateStatus,
    DriftCertificate, DriftReport, FinitePv, PointSlack, Provenance, PvOperator, PvValue, SetSpec,
    EXACT_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriftError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not applicable: {0}")]
    Inapplicable(String),
    #[error("drift violated {} at {at} by {amount:e}", if *on_c { "on C" } else { "off C" })]
    Violation { at: String, amount: f64, on_c: bool },
    #[error("V_k overflows; largest safe k: {k_safe:?}")]
    Overflow { k_safe: Option<u64> },
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}
