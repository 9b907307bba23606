//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance floor: `max(requested, k * eps)`, so tolerances tuned for
    /// `f64` stay meaningful when instantiated at `f32`.
    #[inline]
    fn tol(requested: f64, k: f64) -> Self {
        let req = Self::lit(requested);
        let floor = Self::epsilon() * Self::lit(k);
        if req > floor {
            req
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Log-spaced grid of `n` points on `[lo, hi]` (both endpoints included).
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(lo > T::zero() && hi >= lo, "log_grid needs 0 < lo <= hi");
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + step * T::from_usize_lossy(i)).exp()
            }
        })
        .collect()
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    if sxx <= T::zero() {
        None
    } else {
        Some(sxy / sxx)
    }
}
