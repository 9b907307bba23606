//! Shipped continuous-model instances and their certified constants.
//!
//! `c` is half the smallest tail ratio `(V − PV)/φ₁(V)` seen on the grid for
//! `|x| ≥ 30`; `M` rounds up the largest grid state that violates the drift
//! with that `c`.

use crate::models::{ContinuousFixture, NarSpec, Noise, RwmSpec, SurSpec};

/// Weibull target `β_w = 1`, `γ_w = 1/2`, proposal half-width 1.
pub fn rwm_fixture_spec() -> RwmSpec<f64> {
    RwmSpec {
        beta_w: 1.0,
        gamma_w: 0.5,
        a: 1.0,
    }
}

pub const RWM_FIXTURE: ContinuousFixture<f64> = ContinuousFixture { z: 0.5, c: 0.004, m: 1.0 };

/// `r = 1/2`, `ρ = 3/2`, `R₀ = 1`, unit Laplace noise (`γ₀ = 1`).
pub fn nar_fixture_spec() -> NarSpec<f64> {
    NarSpec {
        r: 0.5,
        rho: 1.5,
        r0: 1.0,
        noise: Noise::Laplace { scale: 1.0 },
    }
}

pub const NAR_FIXTURE: ContinuousFixture<f64> = ContinuousFixture { z: 0.6, c: 0.018, m: 1.5 };

/// `κ = 1/2`, `c₊ = c₋ = 1/2`, `R₀ = 1`, zero-mean unit Laplace noise.
pub fn sur_fixture_spec() -> SurSpec<f64> {
    SurSpec {
        kappa: 0.5,
        c_plus: 0.5,
        c_minus: 0.5,
        r0: 1.0,
        noise: Noise::Laplace { scale: 1.0 },
        mean: 0.0,
    }
}

/// `c` holds `δ`.
pub const SUR_FIXTURE: ContinuousFixture<f64> = ContinuousFixture { z: 0.5, c: 0.18, m: 3.0 };

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::nar_certificate;

    #[test]
    fn specs_validate() {
        rwm_fixture_spec().validate().unwrap();
        nar_fixture_spec().validate().unwrap();
        sur_fixture_spec().validate().unwrap();
    }

    #[test]
    fn nar_fixture_certifies() {
        let s = nar_fixture_spec();
        let ok = nar_certificate(&s, NAR_FIXTURE).unwrap();
        assert!(ok.is_valid(), "{:?}", ok.report.worst_off_c);
        let smaller = nar_certificate(&s, ContinuousFixture { m: 0.5, ..NAR_FIXTURE }).unwrap();
        assert!(!smaller.is_valid());
    }
}
