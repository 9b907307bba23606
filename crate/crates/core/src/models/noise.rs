//! Symmetric innovation densities and expectations against them.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drift::PvValue;
use crate::models::ModelError;
use crate::numerics::{integrate_with_breaks, QuadOptions};
use crate::real::Real;

/// Zero-mean symmetric noise. Both families are symmetrized Weibull laws:
/// `P(|ε| > t) = exp(−(t/λ)^γ)`, Laplace being `γ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Noise<T> {
    Laplace { scale: T },
    SymWeibull { shape: T, scale: T },
}

impl<T: Real> Noise<T> {
    /// Laplace(1) for `γ₀ = 1`, symmetrized Weibull(γ₀, 1) below.
    pub fn default_for(gamma0: T) -> Result<Self, ModelError> {
        if !(gamma0 > T::zero() && gamma0 <= T::one()) {
            return Err(ModelError::Spec(format!("gamma0 must lie in (0, 1], got {gamma0}")));
        }
        Ok(if gamma0 == T::one() {
            Noise::Laplace { scale: T::one() }
        } else {
            Noise::SymWeibull {
                shape: gamma0,
                scale: T::one(),
            }
        })
    }

    /// `(γ, λ)`.
    pub fn shape_scale(&self) -> (T, T) {
        match *self {
            Noise::Laplace { scale } => (T::one(), scale),
            Noise::SymWeibull { shape, scale } => (shape, scale),
        }
    }

    /// The moment exponent: `E[exp(z|ε|^γ₀)] < ∞` for `z < λ^{−γ₀}`.
    pub fn gamma0(&self) -> T {
        self.shape_scale().0
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let (g, l) = self.shape_scale();
        if !(g > T::zero() && g <= T::one() && l > T::zero() && l.is_finite()) {
            return Err(ModelError::Spec(format!("noise needs shape in (0, 1] and positive scale, got ({g}, {l})")));
        }
        Ok(())
    }

    pub fn pdf(&self, e: T) -> T {
        let (g, l) = self.shape_scale();
        let u = e.abs() / l;
        T::lit(0.5) * g / l * u.powf(g - T::one()) * (-u.powf(g)).exp()
    }

    /// `P(|ε| > t)`.
    pub fn tail(&self, t: T) -> T {
        let (g, l) = self.shape_scale();
        (-(t.max(T::zero()) / l).powf(g)).exp()
    }

    pub fn variance(&self) -> T {
        let (g, l) = self.shape_scale();
        // E|ε|² = λ² Γ(1 + 2/γ).
        l * l * T::lit(libm::tgamma((T::one() + T::lit(2.0) / g).to_f64_lossy()))
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> T {
        let (g, l) = self.shape_scale();
        let u: f64 = rng.gen();
        let mag = l * T::lit(-(1.0 - u).ln()).powf(g.recip());
        if rng.gen::<bool>() {
            mag
        } else {
            -mag
        }
    }

    /// `E[h(shift + ε)]` with an error estimate. `kinks` are points where
    /// `h` is not smooth.
    ///
    /// Integrates in `u = (|e|/λ)^γ` against `e^{−u}` on each half-line and
    /// truncates where the integrand falls below the requested tolerance.
    pub fn expect<H: Fn(T) -> T>(&self, h: H, shift: T, kinks: &[T]) -> Result<PvValue<T>, ModelError> {
        let (g, l) = self.shape_scale();
        let half = T::lit(0.5);
        let e_of = |u: T| l * u.powf(g.recip());
        let integrand = |u: T| half * (h(shift + e_of(u)) + h(shift - e_of(u))) * (-u).exp();
        let mut breaks: Vec<T> = kinks
            .iter()
            .map(|&k| ((k - shift).abs() / l).powf(g))
            .filter(|u| *u > T::zero() && u.is_finite())
            .collect();
        let opts = QuadOptions::<T>::default();
        let mut upper = T::lit(40.0);
        loop {
            let end = integrand(upper);
            if !end.is_finite() {
                return Err(ModelError::Overflow(format!(
                    "integrand overflows at |e| = {}; use a smaller z",
                    e_of(upper)
                )));
            }
            breaks.retain(|b| *b < upper);
            breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
            let q = integrate_with_breaks(&integrand, T::zero(), upper, &breaks, opts)?;
            // Remainder beyond `upper`, assuming at least e^{−u/2} decay.
            let rem = end.abs() * T::lit(2.0);
            if rem <= opts.rel_tol * q.value.abs() || upper > T::lit(1e4) {
                if !q.value.is_finite() {
                    return Err(ModelError::Overflow("expectation is not finite; use a smaller z".into()));
                }
                return Ok(PvValue {
                    value: q.value,
                    err: q.abs_err + rem,
                });
            }
            upper = upper * T::lit(2.0);
        }
    }
}
