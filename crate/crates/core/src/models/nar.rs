//! Nonlinear autoregression `Φ_{n+1} = g(Φ_n) + ε_{n+1}`.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drift::{verify_drift, DriftCertificate, DriftError, Provenance, PvOperator, PvValue, SetSpec};
use crate::models::{half_line_grid, ContinuousFixture, ModelError, Noise, Sampler};
use crate::rate::PhiSpec;
use crate::real::Real;

/// `g(x) = x (1 − r max(|x|, R₀)^{−ρ})`: contraction `r|x|^{1−ρ}` toward 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NarSpec<T> {
    pub r: T,
    pub rho: T,
    pub r0: T,
    pub noise: Noise<T>,
}

impl<T: Real> NarSpec<T> {
    pub fn new(r: T, rho: T, r0: T, noise: Noise<T>) -> Result<Self, ModelError> {
        let s = Self { r, rho, r0, noise };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.r > T::zero() && self.rho >= T::zero() && self.rho < T::lit(2.0) && self.r0 > T::zero()) {
            return Err(ModelError::Spec(format!(
                "nar needs r > 0, rho in [0, 2), R0 > 0; got ({}, {}, {})",
                self.r, self.rho, self.r0
            )));
        }
        if self.r * self.r0.powf(-self.rho) > T::one() {
            return Err(ModelError::Spec("r R0^-rho must not exceed 1".into()));
        }
        self.noise.validate()
    }

    pub fn g(&self, x: T) -> T {
        x * (T::one() - self.r * x.abs().max(self.r0).powf(-self.rho))
    }

    /// `γ₀ ∧ (2 − ρ)`, the exponent of the drift function.
    pub fn drift_exponent(&self) -> T {
        self.noise.gamma0().min(T::lit(2.0) - self.rho)
    }

    /// `V(x) = exp(z |x|^s)` with `s` from [`Self::drift_exponent`].
    pub fn lyapunov(&self, z: T) -> impl Fn(&T) -> T + Sync {
        let s = self.drift_exponent();
        move |x: &T| (z * x.abs().powf(s)).exp()
    }

    /// `PV(x) = E[V(g(x) + ε)]`.
    pub fn pv(&self, v: &(dyn Fn(&T) -> T + Sync), x: T) -> Result<PvValue<T>, ModelError> {
        self.noise.expect(|e| v(&e), self.g(x), &[T::zero()])
    }
}

/// Quadrature `PV` for [`NarSpec`].
#[derive(Debug, Clone, Copy)]
pub struct NarPv<T> {
    pub spec: NarSpec<T>,
}

impl<T: Real> PvOperator<T, T> for NarPv<T> {
    fn provenance(&self) -> Provenance {
        Provenance::Quadrature
    }

    fn pv(&self, v: &(dyn Fn(&T) -> T + Sync), x: &T) -> Result<PvValue<T>, DriftError> {
        self.spec.pv(v, *x).map_err(|e| DriftError::Domain(e.to_string()))
    }
}

impl<T: Real> Sampler for NarSpec<T> {
    type State = T;

    fn step(&self, x: &T, rng: &mut ChaCha8Rng) -> T {
        self.g(*x) + self.noise.sample(rng)
    }
}

/// [`half_line_grid`] mirrored to both signs.
pub fn symmetric_grid<T: Real>() -> Vec<T> {
    let pos = half_line_grid::<T>();
    pos.iter().rev().map(|x| -*x).chain(pos.iter().copied()).collect()
}

/// Certifies `V = exp(z|x|^s)`, `φ(v) = c v (1 + log v)^{1 − ρ/s}` with
/// `C = [−M, M]` on [`symmetric_grid`].
pub fn nar_certificate<T: Real>(
    spec: &NarSpec<T>,
    fx: ContinuousFixture<T>,
) -> Result<DriftCertificate<T, T>, ModelError> {
    spec.validate()?;
    let s = spec.drift_exponent();
    let damp = spec.rho / s - T::one();
    if damp < T::zero() {
        return Err(ModelError::Inapplicable(format!(
            "rho = {} below the drift exponent {s}: phi would be superlinear",
            spec.rho
        )));
    }
    let phi = PhiSpec::log_damped(fx.c, damp)?;
    let v = spec.lyapunov(fx.z);
    let set = SetSpec::Interval { lo: -fx.m, hi: fx.m };
    Ok(verify_drift(&NarPv { spec: *spec }, &v, &phi, &set, &symmetric_grid(), None)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> NarSpec<f64> {
        NarSpec::new(0.5, 1.5, 1.0, Noise::Laplace { scale: 1.0 }).unwrap()
    }

    #[test]
    fn envelope_holds_on_grid() {
        let s = spec();
        for x in symmetric_grid::<f64>().into_iter().filter(|x| x.abs() >= s.r0) {
            let bound = x.abs() * (1.0 - s.r * x.abs().powf(-s.rho));
            assert!(s.g(x).abs() <= bound * (1.0 + 1e-15));
        }
    }

    #[test]
    fn constant_v_conserved() {
        let s = spec();
        for x in [-50.0, 0.0, 3.0] {
            assert!((s.pv(&|_| 1.0, x).unwrap().value - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_map_decouples() {
        let s = NarSpec::new(1.0, 0.0, 1.0, Noise::Laplace { scale: 1.0 }).unwrap();
        let v = |x: &f64| 1.0 + x * x;
        let a = s.pv(&v, 0.3).unwrap().value;
        let b = s.pv(&v, 7.0).unwrap().value;
        assert!((a - 3.0).abs() < 1e-12 && (b - 3.0).abs() < 1e-12);
    }

    #[test]
    fn drift_exponent_value() {
        assert_eq!(spec().drift_exponent(), 0.5);
    }
}
