//! `H_φ`, its inverse, `r_φ` and the drift-function sequence `H_k`.

use crate::numerics::{integrate, NumericError, QuadOptions};
use crate::rate::{PhiSpec, RateError};
use crate::real::Real;

fn inversion_tol<T: Real>() -> T {
    T::tol(1e-10, 256.0)
}

fn check_v<T: Real>(v: T) -> Result<(), RateError> {
    if v >= T::one() {
        Ok(())
    } else {
        Err(RateError::Domain(format!("v must be >= 1, got {v}")))
    }
}

/// `∫_a^b dx/φ(x)` computed in the variable `t = log x`.
fn h_segment<T: Real>(phi: &PhiSpec<T>, a: T, b: T) -> Result<T, RateError> {
    if a == b {
        return Ok(T::zero());
    }
    let q = integrate(
        |t: T| {
            let x = t.exp();
            x / phi.eval(x)
        },
        a.ln(),
        b.ln(),
        QuadOptions::with_rel(T::tol(1e-14, 64.0)),
    )?;
    Ok(q.value)
}

/// `H_φ(v) = ∫_1^v dx/φ(x)`.
pub fn h_phi<T: Real>(phi: &PhiSpec<T>, v: T) -> Result<T, RateError> {
    check_v(v)?;
    if v == T::infinity() {
        return Ok(T::infinity());
    }
    if let Some(h) = phi.h_closed(v) {
        return Ok(h);
    }
    h_segment(phi, T::one(), v)
}

/// `H_φ⁻¹(z)`.
pub fn h_phi_inv<T: Real>(phi: &PhiSpec<T>, z: T) -> Result<T, RateError> {
    if !(z >= T::zero()) {
        return Err(RateError::Domain(format!("z must be >= 0, got {z}")));
    }
    if z == T::zero() {
        return Ok(T::one());
    }
    if z == T::infinity() {
        return Ok(T::infinity());
    }
    if let Some(v) = phi.h_inv_closed(z) {
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericError::Overflow {
                largest: T::max_value().to_f64_lossy(),
            }
            .into())
        };
    }
    invert_by_newton(phi, z)
}

/// Newton on the concave increasing map `v ↦ H_φ(v) − z`, started left of
/// the root at `1 + φ(1) z`. Concavity makes the iterates increase
/// monotonically to the root, so no bracket is needed.
fn invert_by_newton<T: Real>(phi: &PhiSpec<T>, z: T) -> Result<T, RateError> {
    let tol = inversion_tol::<T>();
    let mut v = T::one() + phi.eval(T::one()) * z;
    if !v.is_finite() {
        return Err(NumericError::Overflow {
            largest: T::max_value().to_f64_lossy(),
        }
        .into());
    }
    let mut h = h_segment(phi, T::one(), v)?;
    for _ in 0..400 {
        let gap = z - h;
        if gap.abs() <= T::tol(1e-14, 16.0) * (T::one() + z) {
            return Ok(v);
        }
        let step = gap * phi.eval(v);
        let next = v + step;
        if !next.is_finite() {
            return Err(NumericError::Overflow {
                largest: v.to_f64_lossy(),
            }
            .into());
        }
        if next == v {
            return Ok(v);
        }
        h = h + h_segment(phi, v, next)?;
        v = next;
        if step.abs() <= T::epsilon() * v {
            return Ok(v);
        }
    }
    if (z - h).abs() <= tol * (T::one() + z) {
        Ok(v)
    } else {
        Err(NumericError::MaxIterations { iterations: 400 }.into())
    }
}

/// `r_φ(z) = φ(H_φ⁻¹(z))`.
pub fn r_phi<T: Real>(phi: &PhiSpec<T>, z: T) -> Result<T, RateError> {
    Ok(phi.eval(h_phi_inv(phi, z)?))
}

/// `H_k(v) = H_φ⁻¹(H_φ(v) + k) − H_φ⁻¹(k)`.
pub fn h_k<T: Real>(phi: &PhiSpec<T>, k: u64, v: T) -> Result<T, RateError> {
    check_v(v)?;
    if v == T::infinity() {
        return Ok(T::infinity());
    }
    if k == 0 {
        return Ok(v - T::one());
    }
    let kk = T::lit(k as f64);
    Ok(h_phi_inv(phi, h_phi(phi, v)? + kk)? - h_phi_inv(phi, kk)?)
}

/// `H_k′(v) = r_φ(H_φ(v) + k) / φ(v)`.
pub fn h_k_prime<T: Real>(phi: &PhiSpec<T>, k: u64, v: T) -> Result<T, RateError> {
    check_v(v)?;
    Ok(r_phi(phi, h_phi(phi, v)? + T::lit(k as f64))? / phi.eval(v))
}

/// Outcome of [`key_inequality_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct KeyInequalityReport<T> {
    /// Largest positive part of `H_{k+1} − φ H′_{k+1} − H_k + r_φ(k)`.
    pub max_violation: T,
    /// `(v, k)` attaining the largest signed value.
    pub worst: (T, u64),
    pub points_checked: usize,
    /// Grid points skipped because `H_φ⁻¹` left the representable range.
    pub points_skipped: usize,
}

impl<T: Real> KeyInequalityReport<T> {
    pub fn holds_within(&self, tol: T) -> bool {
        self.max_violation <= tol
    }
}

/// Evaluates the key inequality `H_{k+1}(v) − φ(v) H′_{k+1}(v) ≤ H_k(v) − r_φ(k)`
/// on `v_grid × {0..=k_max}`.
pub fn key_inequality_check<T: Real>(
    phi: &PhiSpec<T>,
    v_grid: &[T],
    k_max: u64,
) -> Result<KeyInequalityReport<T>, RateError> {
    if k_max < 1 {
        return Err(RateError::Domain("k_max must be >= 1".into()));
    }
    let ks: Vec<T> = (0..=k_max + 1).map(|k| T::lit(k as f64)).collect();
    let inv_k: Vec<T> = ks
        .iter()
        .map(|&k| h_phi_inv(phi, k))
        .collect::<Result<_, _>>()?;
    let r_k: Vec<T> = inv_k.iter().map(|&v| phi.eval(v)).collect();
    let mut report = KeyInequalityReport {
        max_violation: T::zero(),
        worst: (T::one(), 0),
        points_checked: 0,
        points_skipped: 0,
    };
    let mut worst_signed = T::neg_infinity();
    for &v in v_grid {
        check_v(v)?;
        if !v.is_finite() {
            report.points_skipped += k_max as usize + 1;
            continue;
        }
        let hv = h_phi(phi, v)?;
        let mut shifted = Vec::with_capacity(ks.len());
        let mut overflow = false;
        for &k in &ks {
            match h_phi_inv(phi, hv + k) {
                Ok(x) => shifted.push(x),
                Err(RateError::Numeric(NumericError::Overflow { .. })) => {
                    overflow = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let usable = shifted.len().saturating_sub(1).min(k_max as usize + 1);
        if overflow {
            report.points_skipped += k_max as usize + 1 - usable;
        }
        for k in 0..usable {
            let hk = shifted[k] - inv_k[k];
            let hk1 = shifted[k + 1] - inv_k[k + 1];
            let phi_dh = phi.eval(shifted[k + 1]);
            let val = hk1 - phi_dh - hk + r_k[k];
            report.points_checked += 1;
            if val > worst_signed {
                worst_signed = val;
                report.worst = (v, k as u64);
            }
        }
    }
    report.max_violation = worst_signed.max(T::zero());
    Ok(report)
}

/// Geometric versus subgeometric regime of a modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime<T> {
    Geometric { limit: T },
    Subgeometric,
}

/// Threshold on `lim φ′` separating the regimes for custom moduli.
pub const EPS_GEO: f64 = 1e-3;

/// Named families are subgeometric by construction; custom moduli are
/// classified by `φ′(1e12) > 1e-3` after a monotonicity check of φ′.
pub fn classify_regime<T: Real>(phi: &PhiSpec<T>) -> Result<Regime<T>, RateError> {
    phi.validate()?;
    match phi.family() {
        crate::rate::PhiFamily::Custom => {
            let d = phi.deriv(T::lit(1e12));
            if d > T::lit(EPS_GEO) {
                Ok(Regime::Geometric { limit: d })
            } else {
                Ok(Regime::Subgeometric)
            }
        }
        _ => Ok(Regime::Subgeometric),
    }
}

/// Trend statistics behind [`is_subgeometric_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubgeometricDiagnostics<T> {
    pub is_subgeometric: bool,
    /// `log r(n)/n` nonincreasing over `n ∈ [2, n_max]`.
    pub ratio_nonincreasing: bool,
    /// `log r(n_max)/n_max`.
    pub final_ratio: T,
    /// Log-log slope of `log r(n)/n` over the last decade; `None` when the
    /// ratio is not positive there.
    pub last_decade_slope: Option<T>,
}

/// Slope below which `log r(n)/n` is read as decaying to zero.
pub const DECAY_SLOPE: f64 = -0.05;

/// Heuristic membership test for the subgeometric class on a finite table
/// `r(0..=n_max)`.
pub fn is_subgeometric_sequence<T: Real>(
    r: &[T],
) -> Result<SubgeometricDiagnostics<T>, RateError> {
    if r.len() < 21 {
        return Err(RateError::Domain("need at least 21 table entries".into()));
    }
    if let Some((i, x)) = r.iter().enumerate().find(|(_, x)| !(**x > T::zero())) {
        return Err(RateError::Domain(format!("r({i}) = {x} is not positive")));
    }
    let n_max = r.len() - 1;
    let ratio = |n: usize| r[n].ln() / T::from_usize_lossy(n);
    let slack = T::tol(1e-12, 64.0);
    let ratio_nonincreasing = (3..=n_max).all(|n| {
        let (a, b) = (ratio(n - 1), ratio(n));
        b <= a + slack * a.abs().max(T::one())
    });
    let final_ratio = ratio(n_max);
    let start = (n_max / 10).max(2);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut positive = true;
    for n in start..=n_max {
        let q = ratio(n);
        if q <= T::zero() {
            positive = false;
            break;
        }
        xs.push(T::from_usize_lossy(n).ln());
        ys.push(q.ln());
    }
    let last_decade_slope = if positive {
        crate::real::ols_slope(&xs, &ys)
    } else {
        None
    };
    let decaying = match last_decade_slope {
        Some(s) => s <= T::lit(DECAY_SLOPE),
        // Ratio reached zero or below: r is bounded on the tail.
        None => final_ratio <= T::zero() || !positive,
    };
    Ok(SubgeometricDiagnostics {
        is_subgeometric: ratio_nonincreasing && decaying,
        ratio_nonincreasing,
        final_ratio,
        last_decade_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{brent, RootOptions};

    fn power() -> PhiSpec<f64> {
        PhiSpec::power(1.0, 0.5).unwrap()
    }

    #[test]
    fn h_phi_values() {
        let c = PhiSpec::constant(1.0_f64).unwrap();
        assert_eq!(h_phi(&c, 3.0).unwrap(), 2.0);
        assert!((h_phi(&power(), 4.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(h_phi(&power(), 1.0).unwrap(), 0.0);
        assert!(h_phi(&power(), 0.5).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature_oracle() {
        let q = integrate(|x: f64| 1.0 / x.sqrt(), 1.0, 4.0, QuadOptions::default()).unwrap();
        assert!((q.value - h_phi(&power(), 4.0).unwrap()).abs() < 1e-13);
        let se = PhiSpec::sub_exponential(1.0_f64, 1.0, None).unwrap();
        for v in [2.0, 7.3, 7.4, 50.0, 1e4, 1e9] {
            let oracle = h_segment(&se, 1.0, v).unwrap();
            let closed = h_phi(&se, v).unwrap();
            assert!((oracle - closed).abs() <= 1e-12 * (1.0 + oracle), "v={v}");
        }
    }

    #[test]
    fn inverse_values() {
        let c = PhiSpec::constant(1.0_f64).unwrap();
        assert_eq!(h_phi_inv(&c, 5.0).unwrap(), 6.0);
        assert!((h_phi_inv(&power(), 4.0).unwrap() - 9.0).abs() < 1e-13);
        assert_eq!(h_phi_inv(&power(), 0.0).unwrap(), 1.0);
        // Safeguarded root-find oracle.
        let root = brent(
            |v: f64| 2.0 * (v.sqrt() - 1.0) - 4.0,
            1.0,
            100.0,
            RootOptions::default(),
        )
        .unwrap();
        assert!((root - 9.0).abs() < 1e-12);
    }

    #[test]
    fn r_phi_values() {
        let c = PhiSpec::constant(1.0_f64).unwrap();
        assert_eq!(r_phi(&c, 17.0).unwrap(), 1.0);
        assert!((r_phi(&power(), 4.0).unwrap() - 3.0).abs() < 1e-13);
        let lin = PhiSpec::custom("v", |v: f64| v, |_| 1.0);
        let e = r_phi(&lin, 1.0).unwrap();
        assert!((e - 1f64.exp()).abs() < 1e-9, "{e}");
    }

    #[test]
    fn h_k_values() {
        assert_eq!(h_k(&power(), 0, 7.0).unwrap(), 6.0);
        assert!((h_k(&power(), 2, 4.0).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(h_k(&power(), 5, 1.0).unwrap(), 0.0);
        assert_eq!(h_k(&power(), 5, f64::INFINITY).unwrap(), f64::INFINITY);
    }

    #[test]
    fn h_k_prime_matches_difference_quotient() {
        let phi = PhiSpec::logarithmic(1.0_f64, 1.0).unwrap();
        let (v, k) = (30.0, 3);
        let d = (h_k(&phi, k, v + 1e-4).unwrap() - h_k(&phi, k, v - 1e-4).unwrap()) / 2e-4;
        assert!((d - h_k_prime(&phi, k, v).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn logarithmic_inverse_round_trip() {
        let phi = PhiSpec::logarithmic(0.5_f64, 2.0).unwrap();
        for z in [0.1, 1.0, 10.0, 1e3, 1e5] {
            let v = h_phi_inv(&phi, z).unwrap();
            let back = h_phi(&phi, v).unwrap();
            assert!((back - z).abs() <= 1e-10 * (1.0 + z), "z={z} back={back}");
        }
    }

    #[test]
    fn key_inequality_families() {
        let c = PhiSpec::constant(1.0_f64).unwrap();
        let grid = crate::real::log_grid(1.0, 1e6, 40);
        let rep = key_inequality_check(&c, &grid, 20).unwrap();
        assert!(rep.holds_within(1e-9), "{rep:?}");

        let rep = key_inequality_check(&power(), &[1.0, 2.0, 4.0, 16.0, 1e4], 50).unwrap();
        assert!(rep.holds_within(1e-9), "{rep:?}");
        assert_eq!(rep.points_checked, 5 * 51);
    }

    #[test]
    fn key_inequality_detects_decreasing_phi() {
        // A decreasing φ gives a decreasing r_φ and the inequality fails.
        let bad = PhiSpec::custom("1+4/v", |v: f64| 1.0 + 4.0 / v, |v| -4.0 / (v * v));
        let rep = key_inequality_check(&bad, &[2.0, 4.0], 2).unwrap();
        assert!(rep.max_violation > 1e-3, "{rep:?}");
    }

    #[test]
    fn regime_classification() {
        let lin = PhiSpec::linear(0.5_f64).unwrap();
        assert_eq!(classify_regime(&lin).unwrap(), Regime::Geometric { limit: 0.5 });
        assert_eq!(classify_regime(&power()).unwrap(), Regime::Subgeometric);
        let c = PhiSpec::constant(1.0_f64).unwrap();
        assert_eq!(classify_regime(&c).unwrap(), Regime::Subgeometric);
        let se = PhiSpec::sub_exponential(1.0_f64, 1.0, None).unwrap();
        assert_eq!(classify_regime(&se).unwrap(), Regime::Subgeometric);
    }

    #[test]
    fn subgeometric_sequences() {
        let poly: Vec<f64> = (0..=10_000).map(|n| ((n + 1) as f64).powi(2)).collect();
        assert!(is_subgeometric_sequence(&poly).unwrap().is_subgeometric);
        let geo: Vec<f64> = (0..=1000).map(|n| 2f64.powi(n)).collect();
        assert!(!is_subgeometric_sequence(&geo).unwrap().is_subgeometric);
        let stretched: Vec<f64> = (0..=10_000).map(|n| (n as f64).sqrt().exp()).collect();
        assert!(is_subgeometric_sequence(&stretched).unwrap().is_subgeometric);
        assert!(is_subgeometric_sequence(&[0.0_f64; 30]).is_err());
    }
}
