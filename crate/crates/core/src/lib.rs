//! Drift conditions, subgeometric rate functions and convergence diagnostics
//! for Markov chains.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below fix the common double-precision instantiation.

pub mod drift;
pub mod empirical;
pub mod finite_chain;
pub mod interpolation;
pub mod models;
pub mod numerics;
pub mod rate;
pub mod real;

pub use real::Real;

pub type PhiSpecF64 = rate::PhiSpec<f64>;
pub type RateFunctionF64 = rate::RateFunction<f64>;
pub type YoungPairF64 = interpolation::YoungPair<f64>;
pub type FiniteKernelF64 = finite_chain::FiniteKernel<f64>;
pub type ModelSpecF64 = models::ModelSpec<f64>;
pub type RateSpecF64 = empirical::RateSpec<f64>;
