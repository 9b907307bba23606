//! Quadrature, root finding and ODE integration used by the rate calculus and
//! the continuous-model PV operators.

pub mod ode;
pub mod quadrature;
pub mod roots;

use thiserror::Error;

pub use ode::{solve_autonomous, OdeOptions};
pub use quadrature::{integrate, integrate_with_breaks, Quad, QuadOptions};
pub use roots::{bracket_increasing, brent, RootOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },
    #[error("no sign change on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },
    #[error("iteration limit reached after {iterations} iterations")]
    MaxIterations { iterations: usize },
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("overflow: largest finite abscissa reached was {largest:e}")]
    Overflow { largest: f64 },
    #[error("step size underflow at t = {at}")]
    StepUnderflow { at: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}
