//! Adaptive Dormand–Prince 5(4) integration of a scalar autonomous IVP.

use crate::numerics::NumericError;
use crate::real::Real;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::tol(1e-12, 100.0),
            abs_tol: T::tol(1e-14, 100.0),
            max_steps: 10_000_000,
        }
    }
}

/// Integrates `y' = f(y)` from `(t0, y0)` and returns `y` at each time in
/// `outputs`, which must be nondecreasing and `>= t0`.
pub fn solve_autonomous<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    t0: T,
    y0: T,
    outputs: &[T],
    opts: OdeOptions<T>,
) -> Result<Vec<T>, NumericError> {
    let mut out = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(y);
    let mut h = T::lit(1e-3);
    let mut steps = 0usize;
    let safety = T::lit(0.9);
    let lit = T::lit;
    for &target in outputs {
        if target < t {
            return Err(NumericError::InvalidInput("ODE outputs must be nondecreasing"));
        }
        while t < target {
            if steps >= opts.max_steps {
                return Err(NumericError::MaxIterations { iterations: steps });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            let k2 = f(y + hs * lit(A21) * k1);
            let k3 = f(y + hs * (lit(A31) * k1 + lit(A32) * k2));
            let k4 = f(y + hs * (lit(A41) * k1 + lit(A42) * k2 + lit(A43) * k3));
            let k5 = f(y + hs * (lit(A51) * k1 + lit(A52) * k2 + lit(A53) * k3 + lit(A54) * k4));
            let k6 = f(y + hs
                * (lit(A61) * k1 + lit(A62) * k2 + lit(A63) * k3 + lit(A64) * k4 + lit(A65) * k5));
            let y_new = y + hs
                * (lit(B1) * k1 + lit(B3) * k3 + lit(B4) * k4 + lit(B5) * k5 + lit(B6) * k6);
            let k7 = f(y_new);
            let err = (hs
                * (lit(E1) * k1
                    + lit(E3) * k3
                    + lit(E4) * k4
                    + lit(E5) * k5
                    + lit(E6) * k6
                    + lit(E7) * k7))
                .abs();
            if !y_new.is_finite() || !err.is_finite() {
                return Err(NumericError::NonFinite { context: "ODE state" });
            }
            let scale = opts.abs_tol + opts.rel_tol * y.abs().max(y_new.abs());
            let ratio = err / scale;
            steps += 1;
            if ratio <= T::one() {
                t = if last { target } else { t + hs };
                y = y_new;
                k1 = k7;
                let grow = if ratio == T::zero() {
                    lit(5.0)
                } else {
                    (safety * ratio.powf(lit(-0.2))).min(lit(5.0))
                };
                if !last || grow > T::one() {
                    h = hs * grow.max(lit(0.2));
                }
            } else {
                h = hs * (safety * ratio.powf(lit(-0.25))).max(lit(0.1));
                if h <= T::epsilon() * t.abs().max(T::one()) {
                    return Err(NumericError::StepUnderflow { at: t.to_f64_lossy() });
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}
