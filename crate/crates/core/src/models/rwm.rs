//! Random-walk Metropolis on `(0, ∞)` with a Weibull target and a uniform
//! proposal on `[−a, a]`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drift::{verify_drift, DriftCertificate, DriftError, Provenance, PvOperator, PvValue, SetSpec};
use crate::models::{ContinuousFixture, ModelError, Sampler};
use crate::numerics::{integrate_with_breaks, QuadOptions};
use crate::rate::PhiSpec;
use crate::real::{log_grid, Real};

/// Target `π(x) = β γ x^{γ−1} exp(−β x^γ)`, proposal `U[−a, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwmSpec<T> {
    pub beta_w: T,
    pub gamma_w: T,
    pub a: T,
}

impl<T: Real> RwmSpec<T> {
    pub fn new(beta_w: T, gamma_w: T, a: T) -> Result<Self, ModelError> {
        let s = Self { beta_w, gamma_w, a };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.beta_w > T::zero() && self.gamma_w > T::zero() && self.gamma_w < T::one() && self.a > T::zero()) {
            return Err(ModelError::Spec(format!(
                "rwm needs beta_w > 0, gamma_w in (0, 1), a > 0; got ({}, {}, {})",
                self.beta_w, self.gamma_w, self.a
            )));
        }
        Ok(())
    }

    /// `log π(x)`, `−∞` off the positive half-line.
    pub fn log_target(&self, x: T) -> T {
        if x <= T::zero() {
            return T::neg_infinity();
        }
        (self.beta_w * self.gamma_w).ln() + (self.gamma_w - T::one()) * x.ln()
            - self.beta_w * x.powf(self.gamma_w)
    }

    /// `min{π(y)/π(x), 1}`.
    pub fn acceptance(&self, x: T, y: T) -> T {
        (self.log_target(y) - self.log_target(x)).min(T::zero()).exp()
    }

    /// Off-diagonal transition density `q(y − x) α(x, y)`.
    pub fn transition_density(&self, x: T, y: T) -> T {
        if (y - x).abs() > self.a {
            return T::zero();
        }
        self.acceptance(x, y) / (T::lit(2.0) * self.a)
    }

    /// `V = max(1, π^{−z})`.
    pub fn lyapunov(&self, z: T) -> impl Fn(&T) -> T + Sync + '_ {
        move |x: &T| (-z * self.log_target(*x)).max(T::zero()).exp()
    }

    /// `PV(x) = V(x) + ∫ α(x, x+y)(V(x+y) − V(x)) q(y) dy`.
    pub fn pv(&self, v: &(dyn Fn(&T) -> T + Sync), x: T) -> Result<PvValue<T>, ModelError> {
        if !(x > T::zero()) {
            return Err(ModelError::Spec(format!("rwm state must be positive, got {x}")));
        }
        let vx = v(&x);
        let lo = (-self.a).max(-x);
        let dens = (T::lit(2.0) * self.a).recip();
        let f = |y: T| {
            let w = self.acceptance(x, x + y);
            if w == T::zero() {
                T::zero()
            } else {
                w * (v(&(x + y)) - vx) * dens
            }
        };
        let mut breaks = vec![T::zero()];
        breaks.retain(|b| *b > lo && *b < self.a);
        let opts = QuadOptions {
            abs_tol: T::tol(1e-13, 64.0) * vx,
            ..QuadOptions::default()
        };
        let q = integrate_with_breaks(f, lo, self.a, &breaks, opts)?;
        Ok(PvValue {
            value: vx + q.value,
            err: q.abs_err,
        })
    }

    /// `∫ α(x, x+y) q(y) dy`, the acceptance probability at `x`.
    pub fn accept_prob(&self, x: T) -> Result<T, ModelError> {
        let lo = (-self.a).max(-x);
        let dens = (T::lit(2.0) * self.a).recip();
        let q = integrate_with_breaks(|y| self.acceptance(x, x + y) * dens, lo, self.a, &[T::zero()], QuadOptions::default())?;
        Ok(q.value)
    }
}

/// Quadrature `PV` for [`RwmSpec`].
#[derive(Debug, Clone, Copy)]
pub struct RwmPv<T> {
    pub spec: RwmSpec<T>,
}

impl<T: Real> PvOperator<T, T> for RwmPv<T> {
    fn provenance(&self) -> Provenance {
        Provenance::Quadrature
    }

    fn pv(&self, v: &(dyn Fn(&T) -> T + Sync), x: &T) -> Result<PvValue<T>, DriftError> {
        self.spec.pv(v, *x).map_err(|e| DriftError::Domain(e.to_string()))
    }
}

impl<T: Real> Sampler for RwmSpec<T> {
    type State = T;

    fn step(&self, x: &T, rng: &mut ChaCha8Rng) -> T {
        let u: f64 = rng.gen();
        let y = *x + self.a * T::lit(2.0 * u - 1.0);
        let acc = self.acceptance(*x, y).to_f64_lossy();
        if rng.gen::<f64>() < acc {
            y
        } else {
            *x
        }
    }
}

/// Grid for the continuous certificates on the positive half-line.
pub fn half_line_grid<T: Real>() -> Vec<T> {
    log_grid(T::lit(1e-2), T::lit(100.0), 400)
}

/// Certifies `V = max(1, π^{−z})`, `φ(v) = c v (1 + log v)^{−2(1−γ)/γ}`
/// with `C = (0, M]` on [`half_line_grid`].
pub fn rwm_certificate<T: Real>(
    spec: &RwmSpec<T>,
    fx: ContinuousFixture<T>,
) -> Result<DriftCertificate<T, T>, ModelError> {
    spec.validate()?;
    let g = spec.gamma_w;
    let phi = PhiSpec::log_damped(fx.c, T::lit(2.0) * (T::one() - g) / g)?;
    let v = spec.lyapunov(fx.z);
    let set = SetSpec::Interval { lo: T::zero(), hi: fx.m };
    Ok(verify_drift(&RwmPv { spec: *spec }, &v, &phi, &set, &half_line_grid(), None)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> RwmSpec<f64> {
        RwmSpec::new(1.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn constant_v_conserved() {
        let s = spec();
        for x in [0.01, 0.5, 3.0, 80.0] {
            let r = s.pv(&|_| 1.0, x).unwrap();
            assert!((r.value - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pv_within_local_range() {
        let s = spec();
        let v = |x: &f64| 1.0 + x * x;
        for x in [0.2, 2.0, 20.0] {
            let r = s.pv(&v, x).unwrap().value;
            assert!(r <= v(&(x + 1.0)) && r >= 1.0);
        }
    }

    #[test]
    fn detailed_balance() {
        let s = spec();
        let pi = |x: f64| s.log_target(x).exp();
        for (x, y) in [(0.3, 0.9), (5.0, 5.7), (40.0, 39.2)] {
            let l = pi(x) * s.transition_density(x, y);
            let r = pi(y) * s.transition_density(y, x);
            assert!((l - r).abs() <= 1e-14 * l, "{x} {y}");
        }
    }

    #[test]
    fn invalid_state() {
        assert!(spec().pv(&|_| 1.0, -1.0).is_err());
        assert!(RwmSpec::new(1.0, 1.5, 1.0).is_err());
    }
}
