//! Young pairs and rate/norm trade-off tables.

mod pairs;
mod tradeoff;

use thiserror::Error;

use crate::rate::RateError;

pub use pairs::{
    conjugate_power_pair, log_pair, mixed_pair, power_pair, validate_pair, validate_pair_grid,
    young_pair_from_density, PairConfig, PairKind, PairValidation, YoungPair, K_GRID_MAX,
    K_GRID_POINTS, PAIR_TOL,
};
pub use tradeoff::{tradeoff_table, Growth, TradeoffRow, TradeoffTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpolationError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error(transparent)]
    Rate(#[from] RateError),
}
