//! Safeguarded one-dimensional root finding.

use crate::numerics::NumericError;
use crate::real::Real;

/// Termination tolerances for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for RootOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::min_positive_value(),
            rel_tol: T::epsilon() * T::lit(2.0),
            max_iter: 200,
        }
    }
}

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    opts: RootOptions<T>,
) -> Result<T, NumericError> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if !fa.is_finite() || !fb.is_finite() {
        return Err(NumericError::NonFinite {
            context: "root bracket endpoint",
        });
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(NumericError::NoSignChange {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
        });
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * opts.rel_tol * b.abs() + half * opts.abs_tol;
        let m = half * (c - b);
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (T::lit(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else if m > T::zero() {
            b + tol
        } else {
            b - tol
        };
        fb = f(b);
        if !fb.is_finite() {
            return Err(NumericError::NonFinite {
                context: "root iterate",
            });
        }
    }
    Err(NumericError::MaxIterations { iterations: opts.max_iter })
}

/// Finds `x >= lo` with `g(x) = target` for a nondecreasing `g`, expanding
/// the upper end geometrically from `hi_guess` until bracketed.
///
/// Returns the bracket `(lo, hi)` with `g(lo) <= target <= g(hi)`.
pub fn bracket_increasing<T: Real, G: FnMut(T) -> T>(
    g: &mut G,
    lo: T,
    hi_guess: T,
    target: T,
) -> Result<(T, T), NumericError> {
    let mut lo = lo;
    let mut hi = if hi_guess > lo { hi_guess } else { lo + T::one() };
    let mut step = hi - lo;
    for _ in 0..4096 {
        let gh = g(hi);
        if gh.is_nan() {
            return Err(NumericError::NonFinite {
                context: "bracket expansion",
            });
        }
        if gh >= target {
            return Ok((lo, hi));
        }
        lo = hi;
        step = step * T::lit(2.0);
        let next = hi + step;
        if !next.is_finite() {
            return Err(NumericError::Overflow {
                largest: hi.to_f64_lossy(),
            });
        }
        hi = next;
    }
    Err(NumericError::Overflow {
        largest: hi.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = brent(|x: f64| x * x - 2.0, 0.0, 2.0, RootOptions::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let r = brent(|x: f64| x * x + 1.0, -1.0, 1.0, RootOptions::default());
        assert!(matches!(r, Err(NumericError::NoSignChange { .. })));
    }

    #[test]
    fn steep_function() {
        let r = brent(|x: f64| x.powi(9) - 1e-9, 0.0, 1.0, RootOptions::default()).unwrap();
        assert!((r - 0.1).abs() < 1e-13);
    }

    #[test]
    fn bracket_expands_geometrically() {
        let mut g = |x: f64| x.ln();
        let (lo, hi) = bracket_increasing(&mut g, 1.0, 2.0, 50.0).unwrap();
        assert!(lo.ln() <= 50.0 && hi.ln() >= 50.0);
    }

    #[test]
    fn bracket_overflow_reports_largest() {
        let mut g = |_x: f64| 0.0;
        let r = bracket_increasing(&mut g, 1.0, 2.0, 1.0);
        match r {
            Err(NumericError::Overflow { largest }) => assert!(largest > 1e300),
            other => panic!("unexpected {other:?}"),
        }
    }
}
