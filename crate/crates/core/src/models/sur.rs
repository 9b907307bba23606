//! Stochastic unit root `Φ_{n+1} = 1{U ≤ g(Φ_n)} Φ_n + ε_{n+1}`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drift::{verify_drift, DriftCertificate, DriftError, Provenance, PvOperator, PvValue, SetSpec};
use crate::models::{half_line_grid, ContinuousFixture, ModelError, Noise, Sampler};
use crate::rate::PhiSpec;
use crate::real::Real;

/// Sign of `E[ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanCase {
    Positive,
    Zero,
    Negative,
}

/// `g(x) = 1 − c₊ max(x, R₀)^{−κ}`; innovations `ε = mean + η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurSpec<T> {
    pub kappa: T,
    pub c_plus: T,
    pub c_minus: T,
    pub r0: T,
    pub noise: Noise<T>,
    #[serde(default)]
    pub mean: T,
}

impl<T: Real> SurSpec<T> {
    pub fn new(kappa: T, c_plus: T, c_minus: T, r0: T, noise: Noise<T>, mean: T) -> Result<Self, ModelError> {
        let s = Self {
            kappa,
            c_plus,
            c_minus,
            r0,
            noise,
            mean,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.kappa > T::zero() && self.kappa < T::one() && self.c_plus > T::zero() && self.c_minus < T::one() && self.r0 > T::zero()) {
            return Err(ModelError::Spec(format!(
                "sur needs kappa in (0, 1), c+ > 0, c- < 1, R0 > 0; got ({}, {}, {}, {})",
                self.kappa, self.c_plus, self.c_minus, self.r0
            )));
        }
        let floor = self.g(self.r0);
        if !(floor >= T::zero() && floor <= self.c_minus) {
            return Err(ModelError::Spec(format!(
                "g(R0) = 1 - c+ R0^-kappa = {floor} must lie in [0, c-]"
            )));
        }
        if !self.mean.is_finite() {
            return Err(ModelError::Spec("mean must be finite".into()));
        }
        self.noise.validate()
    }

    pub fn mean_case(&self) -> MeanCase {
        if self.mean > T::zero() {
            MeanCase::Positive
        } else if self.mean < T::zero() {
            MeanCase::Negative
        } else {
            MeanCase::Zero
        }
    }

    pub fn g(&self, x: T) -> T {
        T::one() - self.c_plus * x.max(self.r0).powf(-self.kappa)
    }

    /// `γ₀ ∧ (1 − κ/2)`.
    pub fn drift_exponent(&self) -> T {
        self.noise.gamma0().min(T::one() - self.kappa / T::lit(2.0))
    }

    /// `V(x) = exp(z x₊^β)` with `β` from [`Self::drift_exponent`].
    pub fn lyapunov(&self, z: T) -> impl Fn(&T) -> T + Sync {
        let b = self.drift_exponent();
        move |x: &T| (z * x.max(T::zero()).powf(b)).exp()
    }

    /// `PV(x) = g(x) E[V(x + ε)] + (1 − g(x)) E[V(ε)]`.
    pub fn pv(&self, v: &(dyn Fn(&T) -> T + Sync), x: T) -> Result<PvValue<T>, ModelError> {
        let g = self.g(x);
        let stay = self.noise.expect(|e| v(&e), x + self.mean, &[T::zero()])?;
        let reset = self.noise.expect(|e| v(&e), self.mean, &[T::zero()])?;
        Ok(PvValue {
            value: g * stay.value + (T::one() - g) * reset.value,
            err: g * stay.err + (T::one() - g) * reset.err,
        })
    }
}

/// `η(M) = inf_{x ≤ M} (1 − g(x))` on a grid of `(−∞, M]`: the weight of
/// the regeneration `P(x, ·) ≥ η(M) P(ε ∈ ·)`.
pub fn minorization_floor<T: Real>(spec: &SurSpec<T>, m: T) -> T {
    let lo = m.min(T::zero()) - spec.r0;
    let n = 1000;
    (0..=n)
        .map(|i| lo + (m - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n))
        .map(|x| T::one() - spec.g(x))
        .fold(T::infinity(), T::min)
}

/// Quadrature `PV` for [`SurSpec`].
#[derive(Debug, Clone, Copy)]
pub struct SurPv<T> {
    pub spec: SurSpec<T>,
}

impl<T: Real> PvOperator<T, T> for SurPv<T> {
    fn provenance(&self) -> Provenance {
        Provenance::Quadrature
    }

    fn pv(&self, v: &(dyn Fn(&T) -> T + Sync), x: &T) -> Result<PvValue<T>, DriftError> {
        self.spec.pv(v, *x).map_err(|e| DriftError::Domain(e.to_string()))
    }
}

impl<T: Real> Sampler for SurSpec<T> {
    type State = T;

    fn step(&self, x: &T, rng: &mut ChaCha8Rng) -> T {
        let keep = rng.gen::<f64>() <= self.g(*x).to_f64_lossy();
        let e = self.mean + self.noise.sample(rng);
        if keep {
            *x + e
        } else {
            e
        }
    }
}

/// Certifies `V = exp(z x₊^β)` and `φ(v) = δ z^{κ/β} v (log v)^{−κ/β}`
/// (linear below `e^{κ/β + 1}`) with `C = (−∞, M]` on [`half_line_grid`].
/// The fixture's `c` is `δ`.
pub fn sur_certificate<T: Real>(
    spec: &SurSpec<T>,
    fx: ContinuousFixture<T>,
) -> Result<DriftCertificate<T, T>, ModelError> {
    spec.validate()?;
    let beta = spec.drift_exponent();
    let a = spec.kappa / beta;
    let phi = PhiSpec::sub_exponential(fx.c * fx.z.powf(a), a, None)?;
    let v = spec.lyapunov(fx.z);
    let set = SetSpec::Interval {
        lo: T::neg_infinity(),
        hi: fx.m,
    };
    Ok(verify_drift(&SurPv { spec: *spec }, &v, &phi, &set, &half_line_grid(), None)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SurSpec<f64> {
        SurSpec::new(0.5, 0.5, 0.5, 1.0, Noise::Laplace { scale: 1.0 }, 0.0).unwrap()
    }

    #[test]
    fn envelope() {
        let s = spec();
        for x in half_line_grid::<f64>() {
            let g = s.g(x);
            assert!((0.0..1.0).contains(&g));
            if x >= s.r0 {
                assert!(1.0 - g >= s.c_plus * x.powf(-s.kappa) * (1.0 - 1e-15));
            } else {
                assert!(g <= s.c_minus);
            }
        }
    }

    #[test]
    fn floors() {
        let s = spec();
        assert!(minorization_floor(&s, 100.0) >= 0.05 - 1e-15);
        assert!(minorization_floor(&s, 0.5) >= 1.0 - s.c_minus);
        // c₊ = 1, R₀ = 1 makes g ≡ 0 on x ≤ 1.
        let z = SurSpec::new(0.5, 1.0, 0.5, 1.0, Noise::Laplace { scale: 1.0 }, 0.0).unwrap();
        assert_eq!(minorization_floor(&z, 1.0), 1.0);
    }

    #[test]
    fn pv_reductions() {
        let s = spec();
        assert!((s.pv(&|_| 1.0, 4.0).unwrap().value - 1.0).abs() < 1e-13);
        let z = SurSpec::new(0.5, 1.0, 0.5, 1.0, Noise::Laplace { scale: 1.0 }, 0.0).unwrap();
        let v = |x: &f64| 1.0 + x * x;
        // g(0.5) = 0: PV = E[V(ε)] = 3.
        assert!((z.pv(&v, 0.5).unwrap().value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_envelope() {
        assert!(SurSpec::new(0.5, 0.1, 0.5, 1.0, Noise::Laplace { scale: 1.0 }, 0.0).is_err());
        assert_eq!(spec().mean_case(), MeanCase::Zero);
        assert_eq!(spec().drift_exponent(), 0.75);
    }
}
