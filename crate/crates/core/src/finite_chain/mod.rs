//! Exact computations on finite kernels.

mod io;
mod kernel;
mod stationary;
mod structure;
mod taboo;

use thiserror::Error;

pub use io::{parse_kernel, write_curve, write_distribution, write_kernel};
pub use kernel::{FiniteKernel, ROW_SUM_TOL};
pub use stationary::{f_norm, stationary, stationary_residual, tv_curve, tv_curve_against};
pub use structure::{check_irreducible_aperiodic, Structure};
pub use taboo::{
    first_passage_solve, modulated_moment, modulated_moments, taboo_solve, taboo_tail,
    taboo_tail_all, MomentOptions, ModulatedMoment, TabooKernel, DIVERGENCE_MARGIN,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("kernel is reducible; closed classes: {closed_classes:?}")]
    Reducible { closed_classes: Vec<Vec<usize>> },
    #[error("kernel is periodic with period {period}")]
    Periodic { period: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("series tail at state {state} bounded by {achieved:e}, requested {requested:e}; increase the horizon")]
    Precision {
        state: usize,
        achieved: f64,
        requested: f64,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type FiniteKernelF64 = FiniteKernel<f64>;
