//! Checks on finite kernels: the drift sequence `V_k`, return-time moment
//! bounds and condition (i) of the `(f, r)`-regularity criterion.

use crate::drift::{DriftError, EXACT_TOL};
use crate::finite_chain::{modulated_moments, taboo_solve, FiniteKernel, MomentOptions};
use crate::interpolation::YoungPair;
use crate::rate::{h_phi, h_phi_inv, PhiSpec, RateFunction};
use crate::real::Real;

/// Outcome of [`verify_drift_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport<T> {
    /// `max [P V_{k+1}(x) − V_k(x) + r(k) − b r(k+1)/r(0) 1_C(x)]` over the
    /// checked range (unclamped, so negative when every point has slack).
    pub max_violation: T,
    /// `(k, x)` attaining the maximum, lowest `k` then lowest `x` on ties.
    pub worst: (u64, usize),
    /// Largest `k` for which `V_{k+1}` was representable and checked.
    pub k_checked: u64,
    /// The requested `K` was cut short by overflow.
    pub overflowed: bool,
}

impl<T: Real> SequenceReport<T> {
    pub fn holds(&self) -> bool {
        self.max_violation <= T::lit(EXACT_TOL)
    }
}

fn mask(n: usize, c: &[usize]) -> Result<Vec<bool>, DriftError> {
    let mut m = vec![false; n];
    for &x in c {
        if x >= n {
            return Err(DriftError::Domain(format!("C member {x} out of range")));
        }
        m[x] = true;
    }
    Ok(m)
}

fn check_v<T: Real>(p: &FiniteKernel<T>, v: &[T]) -> Result<(), DriftError> {
    if v.len() != p.n() {
        return Err(DriftError::Domain(format!(
            "V has {} entries for {} states",
            v.len(),
            p.n()
        )));
    }
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !(**x >= T::one()) || x.is_infinite()) {
        return Err(DriftError::Domain(format!("V({i}) = {x} must be finite and >= 1")));
    }
    Ok(())
}

/// Checks `P V_{k+1} ≤ V_k − r_φ(k) + b r_φ(k+1)/r_φ(0) 1_C` for
/// `k = 0..=k_max` at states `x < guard` (all states when `guard` is `None`).
///
/// Stops early at the largest `k` with `H_φ⁻¹(H_φ(max V) + k + 1)` finite.
pub fn verify_drift_sequence<T: Real>(
    p: &FiniteKernel<T>,
    v: &[T],
    phi: &PhiSpec<T>,
    c: &[usize],
    b: T,
    k_max: u64,
    guard: Option<usize>,
) -> Result<SequenceReport<T>, DriftError> {
    check_v(p, v)?;
    let in_c = mask(p.n(), c)?;
    let hv = v.iter().map(|&x| h_phi(phi, x)).collect::<Result<Vec<_>, _>>()?;
    let h_max = hv.iter().copied().fold(T::zero(), T::max);
    let r = |k: u64| phi.eval(h_phi_inv(phi, T::from_usize_lossy(k as usize)).unwrap_or(T::infinity()));
    let v_k = |k: u64| -> Option<Vec<T>> {
        let kk = T::from_usize_lossy(k as usize);
        let shift = h_phi_inv(phi, kk).ok()?;
        hv.iter()
            .map(|&h| {
                let w = h_phi_inv(phi, h + kk).ok()?;
                w.is_finite().then_some(w - shift)
            })
            .collect()
    };
    let safe = |k: u64| {
        h_phi_inv(phi, h_max + T::from_usize_lossy(k as usize + 1)).map_or(false, |w| w.is_finite())
    };
    let r0 = r(0);
    let states = guard.unwrap_or(p.n()).min(p.n());
    let mut report = SequenceReport {
        max_violation: T::neg_infinity(),
        worst: (0, 0),
        k_checked: 0,
        overflowed: false,
    };
    let mut cur = v_k(0).ok_or_else(|| DriftError::Overflow { k_safe: None })?;
    for k in 0..=k_max {
        let next = if safe(k) { v_k(k + 1) } else { None };
        let Some(next) = next else {
            if k == 0 {
                return Err(DriftError::Overflow { k_safe: None });
            }
            report.overflowed = true;
            break;
        };
        let pv = p.right_mul(&next);
        let (rk, rk1) = (r(k), r(k + 1));
        for x in 0..states {
            let bonus = if in_c[x] { b * rk1 / r0 } else { T::zero() };
            let viol = pv[x] - cur[x] + rk - bonus;
            if viol > report.max_violation {
                report.max_violation = viol;
                report.worst = (k, x);
            }
        }
        report.k_checked = k;
        cur = next;
    }
    Ok(report)
}

/// Per-state slack of one moment bound: `bound − lhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck<T> {
    pub lhs: Vec<T>,
    pub bound: Vec<T>,
    pub min_slack: T,
    pub worst_state: usize,
}

impl<T: Real> BoundCheck<T> {
    fn new(lhs: Vec<T>, bound: Vec<T>) -> Self {
        let mut min_slack = T::infinity();
        let mut worst_state = 0;
        for (i, (l, b)) in lhs.iter().zip(&bound).enumerate() {
            let s = *b - *l;
            if s < min_slack || s.is_nan() {
                min_slack = s;
                worst_state = i;
            }
        }
        Self {
            lhs,
            bound,
            min_slack,
            worst_state,
        }
    }

    /// Holds up to a relative `tol` of the bound at the worst state.
    pub fn holds(&self, tol: T) -> bool {
        let scale = self.bound[self.worst_state].abs().max(T::one());
        self.min_slack >= -tol * scale
    }
}

/// Outcome of [`verify_moment_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentBoundsReport<T> {
    /// `E_x[Σ_{k<τ_C} φ(V(Φ_k))] ≤ V(x) + b 1_C(x)`.
    pub phi_moment: BoundCheck<T>,
    /// `E_x[Σ_{k<τ_C} r_φ(k)] ≤ V(x) + b r_φ(1)/r_φ(0) 1_C(x)`.
    pub rate_moment: BoundCheck<T>,
    /// `E_x[Σ Ψ₁(r_φ(k)) Ψ₂(φ(V(Φ_k)))] ≤ K (2V(x) + b(1 + r_φ(1)/r_φ(0)) 1_C(x))`.
    pub pair_moment: Option<BoundCheck<T>>,
}

/// Relative tolerance used by [`MomentBoundsReport::holds`].
pub const MOMENT_REL_TOL: f64 = 1e-9;

impl<T: Real> MomentBoundsReport<T> {
    pub fn holds(&self) -> bool {
        let tol = T::lit(MOMENT_REL_TOL);
        self.phi_moment.holds(tol)
            && self.rate_moment.holds(tol)
            && self.pair_moment.as_ref().map_or(true, |c| c.holds(tol))
    }
}

fn finite_values<T: Real>(
    m: Vec<crate::finite_chain::ModulatedMoment<T>>,
) -> Vec<T> {
    m.into_iter().map(|x| x.value).collect()
}

/// Evaluates the three return-time moment bounds at every state. The first
/// by an exact linear solve, the others by the truncated taboo series.
pub fn verify_moment_bounds<T: Real>(
    p: &FiniteKernel<T>,
    v: &[T],
    phi: &PhiSpec<T>,
    c: &[usize],
    b: T,
    pair: Option<&YoungPair<T>>,
    opts: MomentOptions<T>,
) -> Result<MomentBoundsReport<T>, DriftError> {
    check_v(p, v)?;
    let in_c = mask(p.n(), c)?;
    let ind = |x: usize| if in_c[x] { T::one() } else { T::zero() };
    let rates = RateFunction::tabulate(phi.clone(), opts.horizon + 1)?.table();
    let r = |k: usize| rates.get(k).copied().unwrap_or(T::infinity());
    let ratio = rates[1] / rates[0];
    let phi_v: Vec<T> = v.iter().map(|&x| phi.eval(x)).collect();

    let a_lhs = taboo_solve(p, c, &phi_v)?;
    let a_bound = (0..p.n()).map(|x| v[x] + b * ind(x)).collect();

    let ones = vec![T::one(); p.n()];
    let b_lhs = finite_values(modulated_moments(p, c, &r, &ones, opts)?);
    let b_bound = (0..p.n()).map(|x| v[x] + b * ratio * ind(x)).collect();

    let pair_moment = match pair {
        None => None,
        Some(pair) => {
            let psi1 = |k: usize| pair.psi1(r(k));
            let f: Vec<T> = phi_v.iter().map(|&y| pair.psi2(y)).collect();
            let lhs = finite_values(modulated_moments(p, c, &psi1, &f, opts)?);
            let two = T::lit(2.0);
            let bound = (0..p.n())
                .map(|x| pair.k() * (two * v[x] + b * (T::one() + ratio) * ind(x)))
                .collect();
            Some(BoundCheck::new(lhs, bound))
        }
    };
    Ok(MomentBoundsReport {
        phi_moment: BoundCheck::new(a_lhs, a_bound),
        rate_moment: BoundCheck::new(b_lhs, b_bound),
        pair_moment,
    })
}

/// Outcome of [`tt_condition_i`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    /// `sup_{x∈C} E_x[Σ_{k<τ_C} r(k) f(Φ_k)]`, `+∞` when divergent.
    pub sup: T,
    pub arg_sup: usize,
    pub finite: bool,
    /// The modulated moment at each member of `C`, in the order given.
    pub per_state: Vec<(usize, T)>,
}

/// `sup_{x∈C} E_x[Σ_{k=0}^{τ_C−1} r(k) f(Φ_k)]` with the series divergence
/// diagnostics of the taboo expansion.
pub fn tt_condition_i<T: Real>(
    p: &FiniteKernel<T>,
    c: &[usize],
    f: &[T],
    r: &dyn Fn(usize) -> T,
    opts: MomentOptions<T>,
) -> Result<ConditionReport<T>, DriftError> {
    if c.is_empty() {
        return Err(DriftError::Domain("C must be nonempty".into()));
    }
    mask(p.n(), c)?;
    let all = modulated_moments(p, c, r, f, opts)?;
    let per_state: Vec<(usize, T)> = c.iter().map(|&x| (x, all[x].value)).collect();
    let (mut arg_sup, mut sup) = per_state[0];
    for &(x, val) in &per_state[1..] {
        if val > sup || (val == sup && x < arg_sup) {
            sup = val;
            arg_sup = x;
        }
    }
    Ok(ConditionReport {
        sup,
        arg_sup,
        finite: sup.is_finite(),
        per_state,
    })
}
