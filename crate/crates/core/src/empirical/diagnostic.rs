use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::empirical::EmpiricalError;
use crate::models::BrtSpec;
use crate::real::{ols_slope, Real};

/// Slopes of `log s(n)` within `±DEAD_BAND` read as bounded.
pub const DEAD_BAND: f64 = 0.02;

/// The window ends before the truncation error exceeds this fraction of `d(n)`.
pub const TRUNCATION_FRACTION: f64 = 0.1;

const MIN_DECADES: f64 = 2.0;
const MIN_WINDOW_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateClass {
    Vanishing,
    Bounded,
    Diverging,
}

impl std::fmt::Display for RateClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Vanishing => "vanishing",
            Self::Bounded => "bounded",
            Self::Diverging => "diverging",
        })
    }
}

#[derive(Debug, Clone)]
pub struct DiagnosticOptions<T> {
    pub dead_band: T,
    /// Width of the regression window in decades of `n`.
    pub window_decades: T,
    /// Estimated `|d_trunc(n) − d(n)|`, indexed like the curve.
    pub truncation_error: Option<Vec<T>>,
    pub truncation_fraction: T,
}

impl<T: Real> Default for DiagnosticOptions<T> {
    fn default() -> Self {
        Self {
            dead_band: T::lit(DEAD_BAND),
            window_decades: T::lit(0.5),
            truncation_error: None,
            truncation_fraction: T::lit(TRUNCATION_FRACTION),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateDiagnostic<T> {
    pub class: RateClass,
    /// Log-log slope of `s(n) = r(n) d(n)` over the window.
    pub slope: T,
    /// Inclusive `[n_lo, n_hi]`.
    pub window: (usize, usize),
    /// First `n` whose truncation error exceeds the allowed fraction.
    pub truncation_cap: Option<usize>,
    /// `s(n)` for every `n` of the curve.
    pub products: Vec<T>,
}

/// First `n` with `err(n) > fraction · d(n)`.
pub fn truncation_cap<T: Real>(d: &[T], err: &[T], fraction: T) -> Option<usize> {
    d.iter().zip(err).position(|(dn, e)| *e > fraction * *dn)
}

fn slope_over<T: Real>(ys: &[T], lo: usize, hi: usize) -> Option<T> {
    let (xs, vs): (Vec<T>, Vec<T>) = (lo..=hi)
        .map(|n| (T::from_usize_lossy(n).ln(), ys[n].ln()))
        .unzip();
    ols_slope(&xs, &vs)
}

/// Classifies `r(n) d(n)` by its log-log trend over the last
/// `window_decades` of `n` before the truncation cap.
pub fn rate_diagnostic<T: Real>(
    d: &[T],
    r: &[T],
    opts: &DiagnosticOptions<T>,
) -> Result<RateDiagnostic<T>, EmpiricalError> {
    let n_max = d.len().saturating_sub(1);
    if (n_max as f64) < 10f64.powf(MIN_DECADES) {
        return Err(EmpiricalError::InsufficientData(format!(
            "curve reaches n = {n_max}, need at least {MIN_DECADES} decades"
        )));
    }
    if r.len() < d.len() {
        return Err(EmpiricalError::Domain(format!("rate has {} values, curve {}", r.len(), d.len())));
    }
    if let Some((n, v)) = r.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
        return Err(EmpiricalError::Domain(format!("r({n}) = {v} is not positive")));
    }
    let products: Vec<T> = d.iter().zip(r).map(|(a, b)| *a * *b).collect();
    let cap = match &opts.truncation_error {
        Some(err) => {
            if err.len() < d.len() {
                return Err(EmpiricalError::Domain("truncation error shorter than the curve".into()));
            }
            truncation_cap(d, err, opts.truncation_fraction)
        }
        None => None,
    };
    let mut hi = cap.map_or(n_max, |c| c.saturating_sub(1).min(n_max));
    if let Some(bad) = (1..=hi).find(|&n| !(d[n] > T::zero() && products[n].is_finite() && products[n] > T::zero())) {
        hi = bad - 1;
    }
    let width = T::lit(10.0).powf(opts.window_decades);
    let lo = (T::from_usize_lossy(hi) / width).ceil().to_usize().unwrap_or(0).max(1);
    if hi < lo || hi + 1 - lo < MIN_WINDOW_POINTS {
        return Err(EmpiricalError::InsufficientData(format!(
            "usable curve ends at n = {hi} (truncation cap {cap:?}); window too short"
        )));
    }
    let slope = slope_over(&products, lo, hi)
        .ok_or_else(|| EmpiricalError::InsufficientData("degenerate window".into()))?;
    let class = if slope < -opts.dead_band {
        RateClass::Vanishing
    } else if slope > opts.dead_band {
        RateClass::Diverging
    } else {
        RateClass::Bounded
    };
    Ok(RateDiagnostic {
        class,
        slope,
        window: (lo, hi),
        truncation_cap: cap,
        products,
    })
}

/// `n,d_n,r_n,product` rows.
pub fn write_diagnostic_csv<T: Real, W: Write>(d: &[T], r: &[T], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,d_n,r_n,product")?;
    for (n, (a, b)) in d.iter().zip(r).enumerate() {
        let (a, b) = (a.to_f64_lossy(), b.to_f64_lossy());
        writeln!(out, "{n},{a:.16e},{b:.16e},{:.16e}", a * b)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<T> {
    /// Negated log-log slope over the last decade.
    pub exponent: T,
    pub window: (usize, usize),
    /// Slopes over the lower and upper halves of the window.
    pub half_slopes: (T, T),
    /// False when the half-window slopes disagree, as for geometric decay.
    pub power_law: bool,
}

/// Power-law decay exponent of `d` from its last decade of positive values.
pub fn fit_rate_exponent<T: Real>(d: &[T]) -> Result<RateFit<T>, EmpiricalError> {
    let end = d
        .iter()
        .enumerate()
        .skip(1)
        .take_while(|(_, v)| **v >= T::min_positive_value() && v.is_finite())
        .map(|(n, _)| n)
        .last()
        .ok_or_else(|| EmpiricalError::InsufficientData("no positive values past n = 0".into()))?;
    let lo = (end / 10).max(1);
    if end < 10 * lo || end + 1 - lo < MIN_WINDOW_POINTS {
        return Err(EmpiricalError::InsufficientData(format!(
            "positive values end at n = {end}, need a full decade"
        )));
    }
    let slope = slope_over(d, lo, end).ok_or_else(|| EmpiricalError::Fit("degenerate window".into()))?;
    if !(slope < T::zero()) {
        return Err(EmpiricalError::Fit(format!("curve is not decreasing (slope {slope})")));
    }
    let mid = (T::from_usize_lossy(lo) * T::from_usize_lossy(end)).sqrt().round().to_usize().unwrap_or(lo);
    let s1 = slope_over(d, lo, mid).unwrap_or(slope);
    let s2 = slope_over(d, mid, end).unwrap_or(slope);
    let power_law = (s2 - s1).abs() <= T::lit(0.05) + T::lit(0.1) * slope.abs();
    Ok(RateFit {
        exponent: -slope,
        window: (lo, end),
        half_slopes: (s1, s2),
        power_law,
    })
}

const TAIL_SUM_REL: f64 = 1e-8;
const TAIL_SUM_MAX_FACTOR: usize = 1000;

/// Bound on `|d_N(n) − d(n)|` for the BRT chain truncated at `N` and
/// started at `x0`: the two chains agree until the first visit to `N`, and
/// the stationary laws differ by twice the mass beyond `N`.
pub fn brt_truncation_error<T: Real>(spec: &BrtSpec<T>, x0: usize, n_max: usize) -> Result<Vec<T>, EmpiricalError> {
    let big_n = spec.truncation;
    if x0 > big_n {
        return Err(EmpiricalError::Domain(format!("x0 = {x0} beyond the truncation {big_n}")));
    }
    let start = spec.formula_start()?;
    // tail[k] = ∏_{j<k} p_j of the untruncated chain.
    let mut tail = Vec::with_capacity(big_n + 1);
    let mut t = T::one();
    for k in 0..=big_n {
        tail.push(t);
        t = t * spec.p_with_start(k, start);
    }
    let s_n: T = tail.iter().copied().sum();
    let mut beyond = T::zero();
    let mut k = big_n + 1;
    while t > T::zero() && k <= TAIL_SUM_MAX_FACTOR * big_n {
        beyond = beyond + t;
        if t * T::from_usize_lossy(k) <= T::lit(TAIL_SUM_REL) * beyond {
            break;
        }
        t = t * spec.p_with_start(k, start);
        k += 1;
    }
    let two = T::lit(2.0);
    let pi_err = two * beyond / (s_n + beyond);
    let first = tail[big_n] / tail[x0];
    Ok((0..=n_max)
        .map(|n| {
            let coupling = if n + x0 < big_n {
                T::zero()
            } else {
                (first + T::from_usize_lossy(n) * tail[big_n]).min(T::one())
            };
            (two * coupling + pi_err).min(two)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{brt_kernel, BrtRegime};
    use crate::finite_chain::tv_curve;

    fn curve(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| f(k.max(1) as f64)).collect()
    }

    #[test]
    fn power_law_classes() {
        let d = curve(|n| n.powf(-2.0), 1000);
        let o = DiagnosticOptions::default();
        let r1 = curve(|n| n, 1000);
        let r3 = curve(|n| n.powi(3), 1000);
        let r2 = curve(|n| n * n, 1000);
        assert_eq!(rate_diagnostic(&d, &r1, &o).unwrap().class, RateClass::Vanishing);
        assert_eq!(rate_diagnostic(&d, &r3, &o).unwrap().class, RateClass::Diverging);
        let b = rate_diagnostic(&d, &r2, &o).unwrap();
        assert_eq!(b.class, RateClass::Bounded);
        assert_eq!(b.window, (317, 1000));
    }

    #[test]
    fn short_curve_rejected() {
        let d = curve(|n| n.powf(-2.0), 99);
        assert!(matches!(
            rate_diagnostic(&d, &d, &DiagnosticOptions::default()),
            Err(EmpiricalError::InsufficientData(_))
        ));
    }

    #[test]
    fn cap_moves_window() {
        let d = curve(|n| n.powf(-2.0), 1000);
        let r = curve(|n| n, 1000);
        let err: Vec<f64> = (0..=1000).map(|n| if n >= 500 { 1.0 } else { 0.0 }).collect();
        let o = DiagnosticOptions {
            truncation_error: Some(err),
            ..DiagnosticOptions::default()
        };
        let diag = rate_diagnostic(&d, &r, &o).unwrap();
        assert_eq!(diag.truncation_cap, Some(500));
        assert_eq!(diag.window.1, 499);
    }

    #[test]
    fn exact_power_fit() {
        let d = curve(|n| 5.0 * n.powf(-1.5), 10_000);
        let f = fit_rate_exponent(&d).unwrap();
        assert!((f.exponent - 1.5).abs() < 1e-10);
        assert!(f.power_law);
    }

    #[test]
    fn log_corrected_fit() {
        let d = curve(|n| n.powf(-1.5) * (1.0 + 1.0 / n.ln().max(1.0)), 10_000);
        let f = fit_rate_exponent(&d).unwrap();
        assert!((f.exponent - 1.5).abs() < 0.05, "{}", f.exponent);
        assert!(f.power_law);
    }

    #[test]
    fn geometric_flagged() {
        let d = curve(|n| 0.5_f64.powf(n), 1000);
        let f = fit_rate_exponent(&d).unwrap();
        assert!(!f.power_law);
        assert!(f.half_slopes.1 < 2.0 * f.half_slopes.0);
    }

    #[test]
    fn increasing_rejected() {
        let d = curve(|n| n, 1000);
        assert!(matches!(fit_rate_exponent(&d), Err(EmpiricalError::Fit(_))));
    }

    #[test]
    fn truncation_error_bounds_gap() {
        // The 60- and 400-state truncations agree with the untruncated chain
        // up to the respective error bounds.
        let mk = |n| BrtSpec::new(BrtRegime::Polynomial { theta: 2.0_f64 }, n).unwrap();
        let (small, big) = (mk(60), mk(400));
        let f = |k: usize| vec![1.0; k + 1];
        let ds = tv_curve(&brt_kernel(&small).unwrap(), 0, &f(60), 300).unwrap();
        let db = tv_curve(&brt_kernel(&big).unwrap(), 0, &f(400), 300).unwrap();
        let es = brt_truncation_error(&small, 0, 300).unwrap();
        let eb = brt_truncation_error(&big, 0, 300).unwrap();
        assert!(es[10] > 0.0 && es[10] < es[100]);
        for n in 0..=300 {
            assert!((ds[n] - db[n]).abs() <= es[n] + eb[n] + 1e-12, "n = {n}");
        }
    }
}
