//! Backward recurrence time chain: `P(n, n+1) = p_n`, `P(n, 0) = 1 − p_n`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::drift::{verify_drift, DriftCertificate, FinitePv, SetSpec};
use crate::finite_chain::FiniteKernel;
use crate::models::{ModelError, Sampler};
use crate::rate::PhiSpec;
use crate::real::Real;

/// Tail behaviour of `p_n` for large `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BrtRegime<T> {
    /// `p_n = 1 − (1+θ)/n`.
    Polynomial { theta: T },
    /// `p_n = 1 − 1/n − (1+θ)/(n log n)`.
    Logarithmic { theta: T },
    /// `p_n = 1 − θβ n^{β−1}`.
    SubExp { theta: T, beta: T },
    /// `p_n = p`.
    Constant { p: T },
}

/// Regime plus explicit small-`n` overrides and the truncation level `N`.
///
/// Below the first index where the regime formula lies in `(0.01, 0.99)`,
/// unspecified `p_n` default to 1/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrtSpec<T> {
    pub regime: BrtRegime<T>,
    #[serde(default)]
    pub overrides: Vec<(usize, T)>,
    pub truncation: usize,
}

const N_MIN_SEARCH: usize = 10_000_000;

impl<T: Real> BrtSpec<T> {
    pub fn new(regime: BrtRegime<T>, truncation: usize) -> Result<Self, ModelError> {
        let s = Self {
            regime,
            overrides: Vec::new(),
            truncation,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_overrides(mut self, overrides: Vec<(usize, T)>) -> Result<Self, ModelError> {
        self.overrides = overrides;
        self.validate()?;
        Ok(self)
    }

    /// The regime formula at `n`, without defaults or overrides.
    pub fn formula(&self, n: usize) -> T {
        let x = T::from_usize_lossy(n);
        match self.regime {
            BrtRegime::Polynomial { theta } => T::one() - (T::one() + theta) / x,
            BrtRegime::Logarithmic { theta } => {
                T::one() - x.recip() - (T::one() + theta) / (x * x.ln())
            }
            BrtRegime::SubExp { theta, beta } => T::one() - theta * beta * x.powf(beta - T::one()),
            BrtRegime::Constant { p } => p,
        }
    }

    /// First `n ≥ 1` at which the formula lies in `(0.01, 0.99)`.
    pub fn formula_start(&self) -> Result<usize, ModelError> {
        let (lo, hi) = (T::lit(0.01), T::lit(0.99));
        (1..N_MIN_SEARCH)
            .find(|&n| {
                let f = self.formula(n);
                f > lo && f < hi
            })
            .ok_or_else(|| ModelError::Spec("regime formula never enters (0.01, 0.99)".into()))
    }

    pub(crate) fn p_with_start(&self, n: usize, start: usize) -> T {
        if n == 0 {
            return T::one();
        }
        if let Some(&(_, p)) = self.overrides.iter().rev().find(|(i, _)| *i == n) {
            return p;
        }
        if n < start {
            T::lit(0.5)
        } else {
            self.formula(n)
        }
    }

    /// `p_n` of the untruncated chain.
    pub fn p(&self, n: usize) -> Result<T, ModelError> {
        Ok(self.p_with_start(n, self.formula_start()?))
    }

    /// `p_0, …, p_N` with the truncation `p_N = 0`.
    pub fn probabilities(&self) -> Result<Vec<T>, ModelError> {
        let start = self.formula_start()?;
        let n = self.truncation;
        let mut ps: Vec<T> = (0..n).map(|j| self.p_with_start(j, start)).collect();
        ps.push(T::zero());
        Ok(ps)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let pos = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::Spec(format!("{name} must be positive, got {v}")))
            }
        };
        match self.regime {
            BrtRegime::Polynomial { theta } | BrtRegime::Logarithmic { theta } => pos("theta", theta)?,
            BrtRegime::SubExp { theta, beta } => {
                pos("theta", theta)?;
                if !(beta > T::zero() && beta < T::one()) {
                    return Err(ModelError::Spec(format!("beta must lie in (0, 1), got {beta}")));
                }
            }
            BrtRegime::Constant { p } => {
                if !(p > T::zero() && p < T::one()) {
                    return Err(ModelError::Spec(format!("p must lie in (0, 1), got {p}")));
                }
            }
        }
        if self.truncation < 2 {
            return Err(ModelError::Spec("truncation must be at least 2".into()));
        }
        for &(i, p) in &self.overrides {
            if i == 0 || !(p > T::zero() && p < T::one()) {
                return Err(ModelError::Spec(format!("override p_{i} = {p} must be in (0, 1) with index >= 1")));
            }
        }
        let start = self.formula_start()?;
        for n in start.max(1)..self.truncation {
            if self.overrides.iter().any(|(i, _)| *i == n) {
                continue;
            }
            let f = self.formula(n);
            if !(f > T::zero() && f < T::one()) {
                return Err(ModelError::Spec(format!("regime formula gives p_{n} = {f}, outside (0, 1)")));
            }
        }
        let tail = brt_exact_tail(self, self.truncation)?;
        if !(tail < T::lit(0.01)) {
            return Err(ModelError::Spec(format!(
                "prod p_j over the truncation range is {tail}; increase the truncation"
            )));
        }
        Ok(())
    }
}

/// The `(N+1)`-state truncated kernel; state `N` returns to 0.
pub fn brt_kernel<T: Real>(spec: &BrtSpec<T>) -> Result<FiniteKernel<T>, ModelError> {
    let ps = spec.probabilities()?;
    let rows = ps
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut r = Vec::with_capacity(2);
            if p < T::one() {
                r.push((0, T::one() - p));
            }
            if p > T::zero() {
                r.push((i + 1, p));
            }
            r
        })
        .collect();
    Ok(FiniteKernel::from_rows(rows)?)
}

/// `P_0(τ_0 > n) = ∏_{j<n} p_j`, accumulated in log space.
pub fn brt_exact_tail<T: Real>(spec: &BrtSpec<T>, n: usize) -> Result<T, ModelError> {
    if n > spec.truncation {
        return Err(ModelError::Spec(format!("n = {n} exceeds the truncation {}", spec.truncation)));
    }
    let start = spec.formula_start()?;
    Ok((0..n).map(|j| spec.p_with_start(j, start).ln()).sum::<T>().exp())
}

/// Drift ingredients for the truncated chain.
#[derive(Debug, Clone)]
pub struct BrtCertificate<T: Real> {
    pub phi: PhiSpec<T>,
    pub v: Vec<T>,
    /// Members of the sublevel set `C = {V ≤ level}`.
    pub c: Vec<usize>,
    pub level: T,
    pub b: T,
    pub certificate: DriftCertificate<usize, T>,
}

/// Fraction of the tail drift ratio used as the scale of `φ`.
pub const BRT_SCALE_FRACTION: f64 = 0.5;

/// Builds `(φ, V, C, b)` for the regime and grid-certifies it on every state.
///
/// `V(x) = ∏_{j<x} p_j^{−γ}` for the polynomial and subexponential regimes
/// with `φ` Power(α = 1 − 1/(γ(1+θ))) and SubExponential(1/β − 1)
/// respectively. The logarithmic regime takes `γ` as the exponent loss `ε`:
/// `V(x) = max(1, ∏_{j<x} p_j^{−1} / (1 ∨ log x)^ε)`, `φ` Logarithmic(θ − ε).
///
/// The scale of `φ` is half the smallest ratio `(V − PV)/φ₁(V)` over states
/// in `[N/10, N)`; `C` is the smallest sublevel set outside which the drift
/// holds and `b` the smallest constant that covers `C`.
pub fn brt_certificate<T: Real>(spec: &BrtSpec<T>, gamma: T) -> Result<BrtCertificate<T>, ModelError> {
    if !(gamma > T::zero() && gamma < T::one()) {
        return Err(ModelError::Spec(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let ps = spec.probabilities()?;
    let n = spec.truncation;
    let log_prod: Vec<T> = std::iter::once(T::zero())
        .chain(ps[..n].iter().scan(T::zero(), |acc, &p| {
            *acc = *acc + p.ln();
            Some(*acc)
        }))
        .collect();
    let (unit, v): (PhiSpec<T>, Vec<T>) = match spec.regime {
        BrtRegime::Polynomial { theta } => {
            let g = gamma * (T::one() + theta);
            if g <= T::one() {
                return Err(ModelError::Spec(format!(
                    "gamma (1 + theta) = {g} must exceed 1 for a positive exponent"
                )));
            }
            let phi = PhiSpec::power(T::one(), T::one() - g.recip())?;
            (phi, log_prod.iter().map(|&l| (-gamma * l).exp()).collect())
        }
        BrtRegime::SubExp { beta, .. } => {
            let phi = PhiSpec::sub_exponential(T::one(), beta.recip() - T::one(), None)?;
            (phi, log_prod.iter().map(|&l| (-gamma * l).exp()).collect())
        }
        BrtRegime::Logarithmic { theta } => {
            if gamma >= theta {
                return Err(ModelError::Spec(format!("epsilon = {gamma} must be below theta = {theta}")));
            }
            let phi = PhiSpec::logarithmic(T::one(), theta - gamma)?;
            let v = log_prod
                .iter()
                .enumerate()
                .map(|(x, &l)| {
                    let lx = T::from_usize_lossy(x).ln().max(T::one());
                    ((-l).exp() / lx.powf(gamma)).max(T::one())
                })
                .collect();
            (phi, v)
        }
        BrtRegime::Constant { .. } => {
            return Err(ModelError::Inapplicable(
                "constant p_n gives geometric drift; no subgeometric certificate".into(),
            ))
        }
    };
    let kernel = brt_kernel(spec)?;
    let pv = kernel.right_mul(&v);
    let lo = (n / 10).max(1);
    let ratio = (lo..n)
        .map(|x| (v[x] - pv[x]) / unit.eval(v[x]))
        .fold(T::infinity(), T::min);
    if !(ratio > T::zero()) {
        return Err(ModelError::Numerical(format!(
            "V does not drift on the tail states (min ratio {ratio})"
        )));
    }
    let phi = unit.scaled(ratio * T::lit(BRT_SCALE_FRACTION))?;
    let worst = (0..=n)
        .filter(|&x| pv[x] + phi.eval(v[x]) - v[x] > T::zero())
        .map(|x| v[x])
        .fold(T::one(), T::max);
    let level = worst;
    let set = SetSpec::Sublevel { level };
    let grid: Vec<usize> = (0..=n).collect();
    let vf = |x: &usize| v[*x];
    let certificate = verify_drift(&FinitePv { kernel: &kernel }, &vf, &phi, &set, &grid, None)?;
    let c = (0..=n).filter(|&x| v[x] <= level).collect();
    Ok(BrtCertificate {
        b: certificate.b,
        phi,
        v,
        c,
        level,
        certificate,
    })
}

/// The untruncated chain, for simulation.
#[derive(Debug, Clone)]
pub struct BrtSampler<T> {
    spec: BrtSpec<T>,
    start: usize,
}

impl<T: Real> BrtSampler<T> {
    pub fn new(spec: BrtSpec<T>) -> Result<Self, ModelError> {
        let start = spec.formula_start()?;
        Ok(Self { spec, start })
    }
}

impl<T: Real> Sampler for BrtSampler<T> {
    type State = usize;

    fn step(&self, x: &usize, rng: &mut ChaCha8Rng) -> usize {
        let p = self.spec.p_with_start(*x, self.start).to_f64_lossy();
        if rng.gen::<f64>() < p {
            x + 1
        } else {
            0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_chain::{stationary, taboo_tail};

    fn poly2() -> BrtSpec<f64> {
        BrtSpec::new(BrtRegime::Polynomial { theta: 2.0 }, 2000).unwrap()
    }

    #[test]
    fn half_rows() {
        let s = BrtSpec::new(BrtRegime::Constant { p: 0.5_f64 }, 40).unwrap();
        let k = brt_kernel(&s).unwrap();
        let row: Vec<_> = k.row(5).collect();
        assert_eq!(row, vec![(0, 0.5), (6, 0.5)]);
        assert_eq!(k.row(0).collect::<Vec<_>>(), vec![(1, 1.0)]);
        assert_eq!(k.row(40).collect::<Vec<_>>(), vec![(0, 1.0)]);
        assert!((brt_exact_tail(&s, 4).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(brt_exact_tail(&s, 1).unwrap(), 1.0);
    }

    #[test]
    fn polynomial_defaults() {
        let s = poly2();
        assert_eq!(s.formula_start().unwrap(), 4);
        assert_eq!(s.p(3).unwrap(), 0.5);
        assert!((s.p(4).unwrap() - 0.25).abs() < 1e-15);
        let o = s.clone().with_overrides(vec![(2, 0.3)]).unwrap();
        assert_eq!(o.p(2).unwrap(), 0.3);
    }

    #[test]
    fn polynomial_tail_exponent() {
        let s = poly2();
        let (xs, ys): (Vec<f64>, Vec<f64>) = crate::real::log_grid(100.0_f64, 1000.0, 40)
            .into_iter()
            .map(|x| {
                let n = x.round() as usize;
                ((n as f64).ln(), brt_exact_tail(&s, n).unwrap().ln())
            })
            .unzip();
        let slope = crate::real::ols_slope(&xs, &ys).unwrap();
        assert!((slope + 3.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn tail_matches_taboo_tail() {
        let s = BrtSpec::new(BrtRegime::Polynomial { theta: 2.0_f64 }, 400).unwrap();
        let k = brt_kernel(&s).unwrap();
        for n in [1, 5, 50, 200] {
            let a = brt_exact_tail(&s, n).unwrap();
            let b = taboo_tail(&k, &[0], 0, n).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "n={n}");
        }
    }

    #[test]
    fn stationary_is_occupation_measure() {
        let s = poly2();
        let k = brt_kernel(&s).unwrap();
        let pi = stationary(&k).unwrap();
        let tails: Vec<f64> = (0..=2000).map(|j| brt_exact_tail(&s, j).unwrap()).collect();
        let z: f64 = tails.iter().sum();
        for j in [0, 1, 4, 100, 1999] {
            assert!((pi[j] - tails[j] / z).abs() <= 1e-6 * pi[j], "j={j}");
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(BrtSpec::new(BrtRegime::SubExp { theta: 1.0, beta: 1.5 }, 100).is_err());
        assert!(BrtSpec::new(BrtRegime::Polynomial { theta: 2.0 }, 5).is_err());
        assert!(poly2().with_overrides(vec![(3, 1.0)]).is_err());
    }

    #[test]
    fn polynomial_certificate() {
        let cert = brt_certificate(&poly2(), 0.5).unwrap();
        assert!(cert.certificate.is_valid());
        assert!((cert.phi.alpha().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(cert.c.contains(&0) && cert.c.len() < 2000);
        assert!(cert.b > 0.0 && cert.b.is_finite());
        assert!(brt_certificate(&poly2(), 0.3).is_err());
    }

    #[test]
    fn subexp_certificate() {
        let s = BrtSpec::new(BrtRegime::SubExp { theta: 1.0, beta: 0.5 }, 2000).unwrap();
        let cert = brt_certificate(&s, 0.5).unwrap();
        assert!(cert.certificate.is_valid());
        assert_eq!(cert.phi.alpha(), Some(1.0));
    }

    #[test]
    fn constant_certificate_inapplicable() {
        let s = BrtSpec::new(BrtRegime::Constant { p: 0.5 }, 60).unwrap();
        assert!(matches!(brt_certificate(&s, 0.5), Err(ModelError::Inapplicable(_))));
    }
}
