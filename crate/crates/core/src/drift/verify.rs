//! Grid verification of `PV + φ∘V ≤ V + b 1_C`.

use std::fmt::{Debug, Display};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::DriftError;
use crate::finite_chain::FiniteKernel;
use crate::numerics::{bracket_increasing, brent, RootOptions};
use crate::rate::{PhiFamily, PhiSpec};
use crate::real::Real;

/// How a `PV` value was obtained; fixes the slack allowed in comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    ExactFinite,
    Quadrature,
    MonteCarlo { seed: u64, n: usize },
}

/// Absolute slack for exact finite evaluations.
pub const EXACT_TOL: f64 = 1e-9;

impl Provenance {
    /// Comparison slack given the evaluation's error estimate
    /// (quadrature error or Monte-Carlo standard error).
    pub fn tolerance<T: Real>(&self, err: T) -> T {
        match self {
            Provenance::ExactFinite => T::lit(EXACT_TOL),
            Provenance::Quadrature | Provenance::MonteCarlo { .. } => T::lit(3.0) * err,
        }
    }
}

/// `PV(x)` with an error estimate (zero for exact evaluations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvValue<T> {
    pub value: T,
    pub err: T,
}

/// Evaluates `(PV)(x)` for a test function `V`.
pub trait PvOperator<S, T: Real>: Sync {
    fn provenance(&self) -> Provenance;
    fn pv(&self, v: &(dyn Fn(&S) -> T + Sync), x: &S) -> Result<PvValue<T>, DriftError>;
}

/// Exact `PV` on a finite kernel.
#[derive(Debug, Clone, Copy)]
pub struct FinitePv<'a, T> {
    pub kernel: &'a FiniteKernel<T>,
}

impl<T: Real> PvOperator<usize, T> for FinitePv<'_, T> {
    fn provenance(&self) -> Provenance {
        Provenance::ExactFinite
    }

    fn pv(&self, v: &(dyn Fn(&usize) -> T + Sync), x: &usize) -> Result<PvValue<T>, DriftError> {
        if *x >= self.kernel.n() {
            return Err(DriftError::Domain(format!("state {x} out of range")));
        }
        let value = self.kernel.row(*x).map(|(j, p)| p * v(&j)).sum();
        Ok(PvValue {
            value,
            err: T::zero(),
        })
    }
}

/// `|P(aV₁ + bV₂)(x) − a PV₁(x) − b PV₂(x)|`, a sampled linearity check.
pub fn linearity_defect<S, T, P>(
    pv: &P,
    v1: &(dyn Fn(&S) -> T + Sync),
    v2: &(dyn Fn(&S) -> T + Sync),
    a: T,
    b: T,
    x: &S,
) -> Result<T, DriftError>
where
    T: Real,
    P: PvOperator<S, T> + ?Sized,
{
    let mix = |y: &S| a * v1(y) + b * v2(y);
    let whole = pv.pv(&mix, x)?.value;
    Ok((whole - a * pv.pv(v1, x)?.value - b * pv.pv(v2, x)?.value).abs())
}

/// The small set `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSpec<S, T> {
    /// `{x : V(x) ≤ level}`.
    Sublevel { level: T },
    Explicit { members: Vec<S> },
    /// `{x : lo ≤ x ≤ hi}`.
    Interval { lo: S, hi: S },
}

impl<S: PartialOrd, T: Real> SetSpec<S, T> {
    pub fn contains(&self, x: &S, v_at_x: T) -> bool {
        match self {
            SetSpec::Sublevel { level } => v_at_x <= *level,
            SetSpec::Explicit { members } => members.iter().any(|m| m == x),
            SetSpec::Interval { lo, hi } => lo <= x && x <= hi,
        }
    }
}

/// Drift slack at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSlack<S, T> {
    pub x: S,
    pub v: T,
    pub pv: T,
    pub phi_v: T,
    /// `PV + φ(V) − V`.
    pub delta: T,
    pub tol: T,
    pub in_c: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateStatus {
    Valid,
    Invalid,
}

/// Outcome of [`verify_drift`].
#[derive(Debug, Clone)]
pub struct DriftReport<S, T> {
    /// Largest `Δ(x) − tol(x)` off `C`; positive means violated.
    pub max_violation_off_c: T,
    pub worst_off_c: Option<S>,
    /// `max Δ(x)₊` over grid points in `C`.
    pub minimal_b_on_c: T,
    pub worst_on_c: Option<S>,
    pub sup_v_on_c: T,
    pub grid_points: usize,
    /// Grid points with `V(x) = +∞`, skipped.
    pub skipped_infinite: usize,
    pub provenance: Provenance,
    pub points: Vec<PointSlack<S, T>>,
}

/// `(φ, V, C, b)` with its grid verification report. Grid-certified only:
/// nothing is asserted between grid points.
#[derive(Debug, Clone)]
pub struct DriftCertificate<S, T: Real> {
    pub phi: PhiSpec<T>,
    pub c: SetSpec<S, T>,
    pub b: T,
    pub status: CertificateStatus,
    pub report: DriftReport<S, T>,
}

impl<S: Clone + Debug + Display, T: Real> DriftCertificate<S, T> {
    pub fn is_valid(&self) -> bool {
        self.status == CertificateStatus::Valid
    }

    pub fn into_result(self) -> Result<Self, DriftError> {
        if self.is_valid() {
            return Ok(self);
        }
        let r = &self.report;
        if r.max_violation_off_c > T::zero() {
            Err(DriftError::Violation {
                at: format!("{}", r.worst_off_c.clone().expect("worst point recorded")),
                amount: r.max_violation_off_c.to_f64_lossy(),
                on_c: false,
            })
        } else {
            Err(DriftError::Violation {
                at: r.worst_on_c.as_ref().map(|s| s.to_string()).unwrap_or_default(),
                amount: (r.minimal_b_on_c - self.b).to_f64_lossy(),
                on_c: true,
            })
        }
    }

    /// `x,v,pv,phi_v,delta,tol,in_c,slack` rows, slack being the allowance left
    /// (`V − PV − φ(V)` off C, `V + b − PV − φ(V)` on C).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,v,pv,phi_v,delta,tol,in_c,slack")?;
        let f = |t: T| format!("{:.16e}", t.to_f64_lossy());
        for p in &self.report.points {
            let slack = if p.in_c { self.b - p.delta } else { -p.delta };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.x,
                f(p.v),
                f(p.pv),
                f(p.phi_v),
                f(p.delta),
                f(p.tol),
                u8::from(p.in_c),
                f(slack)
            )?;
        }
        Ok(())
    }
}

/// Evaluates `Δ(x) = PV(x) + φ(V(x)) − V(x)` over `grid`. Off `C` each
/// `Δ(x)` must be within the provenance slack of 0; on `C` the largest
/// `Δ₊` is the minimal admissible `b`. With `b` given, the certificate is
/// valid iff `b` covers it.
pub fn verify_drift<S, T, P>(
    pv: &P,
    v: &(dyn Fn(&S) -> T + Sync),
    phi: &PhiSpec<T>,
    c: &SetSpec<S, T>,
    grid: &[S],
    b: Option<T>,
) -> Result<DriftCertificate<S, T>, DriftError>
where
    S: Clone + PartialOrd + Debug + Display + Send + Sync,
    T: Real,
    P: PvOperator<S, T> + ?Sized,
{
    if let Some(b) = b {
        if !(b >= T::zero()) {
            return Err(DriftError::Domain(format!("b must be >= 0, got {b}")));
        }
    }
    let prov = pv.provenance();
    let evals: Vec<Option<PointSlack<S, T>>> = grid
        .par_iter()
        .map(|x| -> Result<Option<PointSlack<S, T>>, DriftError> {
            let vx = v(x);
            if vx.is_nan() || vx < T::one() {
                return Err(DriftError::Domain(format!("V({x}) = {vx} is below 1")));
            }
            if vx.is_infinite() {
                return Ok(None);
            }
            let r = pv.pv(v, x)?;
            let phi_v = phi.eval(vx);
            Ok(Some(PointSlack {
                x: x.clone(),
                v: vx,
                pv: r.value,
                phi_v,
                delta: r.value + phi_v - vx,
                tol: prov.tolerance(r.err),
                in_c: c.contains(x, vx),
            }))
        })
        .collect::<Result<_, _>>()?;
    let skipped_infinite = evals.iter().filter(|e| e.is_none()).count();
    let points: Vec<PointSlack<S, T>> = evals.into_iter().flatten().collect();

    let mut max_off = T::neg_infinity();
    let mut worst_off = None;
    let mut min_b = T::zero();
    let mut min_b_tol = T::zero();
    let mut worst_on = None;
    let mut sup_v = T::zero();
    for p in &points {
        if p.in_c {
            sup_v = sup_v.max(p.v);
            if p.delta > min_b || (worst_on.is_none() && p.delta >= min_b) {
                if p.delta > min_b {
                    min_b = p.delta;
                    min_b_tol = p.tol;
                }
                worst_on = Some(p.x.clone());
            }
        } else {
            let viol = p.delta - p.tol;
            if viol > max_off {
                max_off = viol;
                worst_off = Some(p.x.clone());
            }
        }
    }
    let b = b.unwrap_or(min_b);
    let valid = max_off <= T::zero() && b + min_b_tol >= min_b;
    Ok(DriftCertificate {
        phi: phi.clone(),
        c: c.clone(),
        b,
        status: if valid {
            CertificateStatus::Valid
        } else {
            CertificateStatus::Invalid
        },
        report: DriftReport {
            max_violation_off_c: if worst_off.is_some() { max_off } else { T::neg_infinity() },
            worst_off_c: worst_off,
            minimal_b_on_c: min_b,
            worst_on_c: worst_on,
            sup_v_on_c: sup_v,
            grid_points: grid.len(),
            skipped_infinite,
            provenance: prov,
            points,
        },
    })
}

/// `inf{v ≥ 1 : φ(v) ≥ b / (1 − β)}`: the sublevel threshold for `βφ`.
pub fn shrink_threshold<T: Real>(phi: &PhiSpec<T>, b: T, beta: T) -> Result<T, DriftError> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(DriftError::Domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    let target = b / (T::one() - beta);
    if phi.family() == PhiFamily::Constant || !phi.is_unbounded_beyond(target) {
        return Err(DriftError::Inapplicable(format!(
            "phi = {phi} does not exceed {target}; sublevel shrinkage needs an unbounded phi"
        )));
    }
    if phi.eval(T::one()) >= target {
        return Ok(T::one());
    }
    let mut g = |v: T| phi.eval(v);
    let (lo, hi) = bracket_increasing(&mut g, T::one(), T::lit(2.0), target)?;
    Ok(brent(|v| phi.eval(v) - target, lo, hi, RootOptions::default())?)
}

/// Replaces `(φ, C)` by `(βφ, {V ≤ M_β})` and re-verifies on the same grid.
pub fn shrink_to_sublevel<S, T, P>(
    cert: &DriftCertificate<S, T>,
    beta: T,
    pv: &P,
    v: &(dyn Fn(&S) -> T + Sync),
    grid: &[S],
) -> Result<DriftCertificate<S, T>, DriftError>
where
    S: Clone + PartialOrd + Debug + Display + Send + Sync,
    T: Real,
    P: PvOperator<S, T> + ?Sized,
{
    if !cert.is_valid() {
        return Err(DriftError::Domain("certificate to shrink is not valid".into()));
    }
    let m = shrink_threshold(&cert.phi, cert.b, beta)?;
    let phi_b = cert.phi.scaled(beta)?;
    verify_drift(pv, v, &phi_b, &SetSpec::Sublevel { level: m }, grid, Some(cert.b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> FiniteKernel<f64> {
        FiniteKernel::from_dense(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn two_state_minimal_b() {
        let p = two_state();
        let pv = FinitePv { kernel: &p };
        let v = |x: &usize| [1.0, 2.0][*x];
        let phi = PhiSpec::power(0.5, 0.5).unwrap();
        let c = SetSpec::Explicit { members: vec![0, 1] };
        let cert = verify_drift(&pv, &v, &phi, &c, &[0, 1], None).unwrap();
        assert!(cert.is_valid());
        assert!((cert.report.minimal_b_on_c - 1.0).abs() < 1e-15);
        assert_eq!(cert.report.worst_on_c, Some(0));
    }

    #[test]
    fn constant_v_needs_everything_in_c() {
        let p = two_state();
        let pv = FinitePv { kernel: &p };
        let v = |_: &usize| 1.0;
        let phi = PhiSpec::constant(1e-3).unwrap();
        let none: SetSpec<usize, f64> = SetSpec::Explicit { members: vec![] };
        let cert = verify_drift(&pv, &v, &phi, &none, &[0, 1], None).unwrap();
        assert!(!cert.is_valid());
        assert!(matches!(cert.clone().into_result(), Err(DriftError::Violation { on_c: false, .. })));
        let all = SetSpec::Interval { lo: 0, hi: 1 };
        let cert = verify_drift(&pv, &v, &phi, &all, &[0, 1], None).unwrap();
        assert!(cert.is_valid());
        assert!((cert.b - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn b_below_minimum_is_invalid() {
        let p = two_state();
        let pv = FinitePv { kernel: &p };
        let v = |x: &usize| [1.0, 2.0][*x];
        let phi = PhiSpec::power(0.5, 0.5).unwrap();
        let c = SetSpec::Explicit { members: vec![0, 1] };
        let cert = verify_drift(&pv, &v, &phi, &c, &[0, 1], Some(0.5)).unwrap();
        assert!(matches!(cert.into_result(), Err(DriftError::Violation { on_c: true, .. })));
    }

    #[test]
    fn infinite_v_skipped() {
        let p = two_state();
        let pv = FinitePv { kernel: &p };
        let v = |x: &usize| if *x == 1 { f64::INFINITY } else { 1.0 };
        let phi = PhiSpec::constant(0.5).unwrap();
        let c = SetSpec::Explicit { members: vec![0] };
        let cert = verify_drift(&pv, &v, &phi, &c, &[0, 1], None).unwrap();
        assert_eq!(cert.report.skipped_infinite, 1);
    }

    #[test]
    fn finite_pv_is_linear() {
        let p = FiniteKernel::from_dense(&[vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.0], vec![0.0, 0.6, 0.4]]).unwrap();
        let pv = FinitePv { kernel: &p };
        let v1 = |x: &usize| (*x as f64 + 1.0).powi(2);
        let v2 = |x: &usize| 1.0 + (*x as f64).sqrt();
        for x in 0..3 {
            assert!(linearity_defect(&pv, &v1, &v2, 0.7, -2.5, &x).unwrap() < 1e-14);
        }
    }

    #[test]
    fn threshold_values() {
        let phi = PhiSpec::power(1.0_f64, 0.5).unwrap();
        let m = shrink_threshold(&phi, 4.0, 0.5).unwrap();
        assert!((m - 64.0).abs() < 1e-9);
        let m_small = shrink_threshold(&phi, 4.0, 0.01).unwrap();
        assert!(m_small < m && m_small > 16.0);
        let c = PhiSpec::constant(1.0_f64).unwrap();
        assert!(matches!(shrink_threshold(&c, 4.0, 0.5), Err(DriftError::Inapplicable(_))));
    }
}
