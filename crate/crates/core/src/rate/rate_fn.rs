//! Tabulated rate functions and the drift-function sequence `V_k = H_k ∘ V`.

use std::io::Write;
use std::sync::Arc;

use crate::numerics::{solve_autonomous, OdeOptions};
use crate::rate::{h_k, h_phi_inv, PhiSpec, RateError};
use crate::real::Real;

/// `z ↦ r_φ(z)` with values cached on the integer grid `0..=n_max`.
///
/// The table comes from integrating `u′ = φ(eᵘ) e^{−u}`, `u(0) = 0`, whose
/// solution is `log H_φ⁻¹`; pointwise inversion is kept as an independent
/// route in [`RateFunction::eval_by_inversion`].
#[derive(Debug, Clone)]
pub struct RateFunction<T: Real> {
    phi: PhiSpec<T>,
    /// `log H_φ⁻¹(n)` for `n = 0..=n_max`.
    log_inv: Vec<T>,
}

impl<T: Real> RateFunction<T> {
    pub fn tabulate(phi: PhiSpec<T>, n_max: usize) -> Result<Self, RateError> {
        let outputs: Vec<T> = (0..=n_max).map(T::from_usize_lossy).collect();
        let log_inv = solve_autonomous(
            |u: T| {
                let y = u.exp();
                phi.eval(y) / y
            },
            T::zero(),
            T::zero(),
            &outputs,
            OdeOptions::default(),
        )?;
        if let Some(&last) = log_inv.last() {
            if !last.exp().is_finite() {
                return Err(crate::numerics::NumericError::Overflow {
                    largest: T::max_value().to_f64_lossy(),
                }
                .into());
            }
        }
        Ok(Self { phi, log_inv })
    }

    pub fn phi(&self) -> &PhiSpec<T> {
        &self.phi
    }

    pub fn n_max(&self) -> usize {
        self.log_inv.len() - 1
    }

    /// `r_φ(n)` for `n = 0..=n_max`.
    pub fn table(&self) -> Vec<T> {
        self.log_inv.iter().map(|u| self.phi.eval(u.exp())).collect()
    }

    /// `H_φ⁻¹(n)` for `n = 0..=n_max`.
    pub fn inverse_table(&self) -> Vec<T> {
        self.log_inv.iter().map(|u| u.exp()).collect()
    }

    /// `r_φ(z)`, continuing the ODE from the nearest tabulated point below.
    pub fn eval(&self, z: T) -> Result<T, RateError> {
        if !(z >= T::zero()) {
            return Err(RateError::Domain(format!("z must be >= 0, got {z}")));
        }
        let n = z.floor().to_usize().unwrap_or(usize::MAX).min(self.n_max());
        let z0 = T::from_usize_lossy(n);
        let u0 = self.log_inv[n];
        if z == z0 {
            return Ok(self.phi.eval(u0.exp()));
        }
        let phi = &self.phi;
        let u = solve_autonomous(
            |u: T| {
                let y = u.exp();
                phi.eval(y) / y
            },
            z0,
            u0,
            &[z],
            OdeOptions::default(),
        )?[0];
        Ok(self.phi.eval(u.exp()))
    }

    /// `r_φ(z)` via quadrature and root finding.
    pub fn eval_by_inversion(&self, z: T) -> Result<T, RateError> {
        Ok(self.phi.eval(h_phi_inv(&self.phi, z)?))
    }

    /// Largest violation of monotonicity and of midpoint log-concavity over
    /// consecutive table triples. Both should be within rounding of zero.
    pub fn shape_defects(&self) -> (T, T) {
        let t = self.table();
        let mut mono = T::zero();
        let mut conc = T::zero();
        for w in t.windows(2) {
            mono = mono.max((w[0] - w[1]) / w[0]);
        }
        for w in t.windows(3) {
            let d = (w[0].ln() + w[2].ln()) * T::lit(0.5) - w[1].ln();
            conc = conc.max(d);
        }
        (mono, conc)
    }

    /// Writes `n,r_phi` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,r_phi")?;
        for (n, r) in self.table().iter().enumerate() {
            writeln!(out, "{n},{:.16e}", r.to_f64_lossy())?;
        }
        Ok(())
    }
}

type BaseV<S, T> = Arc<dyn Fn(&S) -> T + Send + Sync>;

/// `V_k = H_k ∘ V` for a base drift function `V ≥ 1` (possibly `+∞`).
#[derive(Clone)]
pub struct DriftFunctionSeq<S, T: Real> {
    phi: PhiSpec<T>,
    base_v: BaseV<S, T>,
}

impl<S, T: Real> DriftFunctionSeq<S, T> {
    pub fn new<F>(phi: PhiSpec<T>, base_v: F) -> Self
    where
        F: Fn(&S) -> T + Send + Sync + 'static,
    {
        Self {
            phi,
            base_v: Arc::new(base_v),
        }
    }

    pub fn phi(&self) -> &PhiSpec<T> {
        &self.phi
    }

    pub fn base(&self, x: &S) -> T {
        (self.base_v)(x)
    }

    /// `V_k(x)`; `+∞` maps to `+∞`.
    pub fn eval(&self, k: u64, x: &S) -> Result<T, RateError> {
        h_k(&self.phi, k, (self.base_v)(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::r_phi;

    #[test]
    fn ode_route_matches_closed_form() {
        let phi = PhiSpec::power(1.0_f64, 0.5).unwrap();
        let rf = RateFunction::tabulate(phi.clone(), 1000).unwrap();
        for (n, r) in rf.table().iter().enumerate() {
            let exact = 1.0 + n as f64 / 2.0;
            assert!((r - exact).abs() <= 1e-10 * exact, "n={n} r={r}");
        }
        assert_eq!(rf.table()[0], 1.0);
    }

    #[test]
    fn ode_route_matches_inversion_for_logarithmic() {
        let phi = PhiSpec::logarithmic(1.0_f64, 1.5).unwrap();
        let rf = RateFunction::tabulate(phi.clone(), 2000).unwrap();
        let t = rf.table();
        for n in [1usize, 10, 100, 1999] {
            let oracle = r_phi(&phi, n as f64).unwrap();
            assert!((t[n] - oracle).abs() <= 1e-9 * oracle, "n={n}");
        }
        let off = rf.eval(12.5).unwrap();
        assert!((off - rf.eval_by_inversion(12.5).unwrap()).abs() <= 1e-9 * off);
    }

    #[test]
    fn linear_phi_gives_exponential() {
        let phi = PhiSpec::linear(1.0_f64).unwrap();
        let rf = RateFunction::tabulate(phi, 5).unwrap();
        assert!((rf.eval(1.0).unwrap() - 1f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn shape_diagnostics_clean() {
        let phi = PhiSpec::sub_exponential(1.0_f64, 1.0, None).unwrap();
        let rf = RateFunction::tabulate(phi, 500).unwrap();
        let (mono, conc) = rf.shape_defects();
        assert!(mono <= 0.0 && conc <= 1e-12, "{mono} {conc}");
    }

    #[test]
    fn csv_header_and_rows() {
        let phi = PhiSpec::constant(2.0_f64).unwrap();
        let rf = RateFunction::tabulate(phi, 2).unwrap();
        let mut buf = Vec::new();
        rf.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next(), Some("n,r_phi"));
        assert_eq!(s.lines().count(), 4);
        assert!(s.contains("1,2.0000000000000000e0"));
    }

    #[test]
    fn drift_sequence() {
        let phi = PhiSpec::power(1.0_f64, 0.5).unwrap();
        let seq = DriftFunctionSeq::new(phi, |x: &f64| 1.0 + x * x);
        assert_eq!(seq.eval(0, &2.0).unwrap(), 4.0);
        let mut prev = 0.0;
        for k in 0..20 {
            let v = seq.eval(k, &2.0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let inf = DriftFunctionSeq::new(PhiSpec::constant(1.0_f64).unwrap(), |_: &u8| f64::INFINITY);
        assert_eq!(inf.eval(3, &0).unwrap(), f64::INFINITY);
    }
}
