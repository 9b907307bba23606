//! Taboo kernels and return-time quantities.

use std::collections::{BTreeMap, BTreeSet};

use crate::finite_chain::{ChainError, FiniteKernel};
use crate::real::Real;

/// `P` with every transition into `C` removed (substochastic).
#[derive(Debug, Clone)]
pub struct TabooKernel<'a, T> {
    base: &'a FiniteKernel<T>,
    in_c: Vec<bool>,
}

impl<'a, T: Real> TabooKernel<'a, T> {
    pub fn new(base: &'a FiniteKernel<T>, c: &[usize]) -> Result<Self, ChainError> {
        if c.is_empty() {
            return Err(ChainError::Domain("taboo set C is empty".into()));
        }
        let mut in_c = vec![false; base.n()];
        for &x in c {
            if x >= base.n() {
                return Err(ChainError::Domain(format!("state {x} out of range")));
            }
            in_c[x] = true;
        }
        Ok(Self { base, in_c })
    }

    pub fn from_mask(base: &'a FiniteKernel<T>, in_c: Vec<bool>) -> Result<Self, ChainError> {
        if in_c.len() != base.n() || !in_c.iter().any(|&b| b) {
            return Err(ChainError::Domain("taboo mask must be nonempty and match the kernel".into()));
        }
        Ok(Self { base, in_c })
    }

    pub fn base(&self) -> &FiniteKernel<T> {
        self.base
    }

    pub fn in_c(&self, x: usize) -> bool {
        self.in_c[x]
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// `(T̃g)(x) = Σ_{y ∉ C} P(x, y) g(y)`.
    pub fn apply(&self, g: &[T]) -> Vec<T> {
        (0..self.n())
            .map(|i| {
                self.base
                    .row(i)
                    .filter(|&(j, _)| !self.in_c[j])
                    .map(|(j, p)| p * g[j])
                    .sum()
            })
            .collect()
    }
}

/// `P_x(τ_C > n)` for every `x`.
pub fn taboo_tail_all<T: Real>(p: &FiniteKernel<T>, c: &[usize], n: usize) -> Result<Vec<T>, ChainError> {
    let t = TabooKernel::new(p, c)?;
    let mut g = vec![T::one(); p.n()];
    for _ in 0..n {
        g = t.apply(&g);
    }
    Ok(g)
}

/// `P_x(τ_C > n) = (T̃ⁿ 1)(x)`.
pub fn taboo_tail<T: Real>(p: &FiniteKernel<T>, c: &[usize], x: usize, n: usize) -> Result<T, ChainError> {
    if x >= p.n() {
        return Err(ChainError::Domain(format!("state {x} out of range")));
    }
    Ok(taboo_tail_all(p, c, n)?[x])
}

/// `u(x) = E_x[Σ_{k<τ_C} g(Φ_k)]` for every `x`, from
/// `u = g + T̃u` solved by sparse elimination on the complement of `C`.
///
/// Elimination is in GTH form: each pivot `1 − T̃′(k, k)` of the censored
/// kernel is accumulated as the mass leaving `k` (to `C` or to states not
/// yet eliminated), so no step subtracts and tiny escape probabilities
/// survive intact.
pub fn taboo_solve<T: Real>(p: &FiniteKernel<T>, c: &[usize], g: &[T]) -> Result<Vec<T>, ChainError> {
    let t = TabooKernel::new(p, c)?;
    let n = p.n();
    if g.len() != n {
        return Err(ChainError::Domain("g has the wrong length".into()));
    }
    let free: Vec<usize> = (0..n).filter(|&x| !t.in_c(x)).collect();
    let mut idx = vec![usize::MAX; n];
    for (k, &x) in free.iter().enumerate() {
        idx[x] = k;
    }
    let m = free.len();
    // Off-diagonal censored taboo transitions, killing mass into C, and
    // right-hand sides. Self-loops are implied by the row mass.
    let mut rows: Vec<BTreeMap<usize, T>> = Vec::with_capacity(m);
    let mut kill: Vec<T> = Vec::with_capacity(m);
    let mut rhs: Vec<T> = Vec::with_capacity(m);
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
    for (k, &x) in free.iter().enumerate() {
        let mut row = BTreeMap::new();
        let mut to_c = T::zero();
        for (y, pr) in p.row(x) {
            if t.in_c(y) {
                to_c = to_c + pr;
            } else if idx[y] != k {
                let e = row.entry(idx[y]).or_insert(T::zero());
                *e = *e + pr;
            }
        }
        for &j in row.keys() {
            preds[j].insert(k);
        }
        rows.push(row);
        kill.push(to_c);
        rhs.push(g[x]);
    }
    let mut piv = vec![T::zero(); m];
    for k in (0..m).rev() {
        let out: T = rows[k].values().copied().sum::<T>() + kill[k];
        if !(out > T::zero()) {
            return Err(ChainError::Numerical(format!("C is not reachable from state {}", free[k])));
        }
        piv[k] = out;
        let row_k: Vec<(usize, T)> = rows[k].iter().map(|(&j, &v)| (j, v)).collect();
        let users: Vec<usize> = preds[k].iter().copied().filter(|&i| i < k).collect();
        for i in users {
            let Some(tik) = rows[i].remove(&k) else { continue };
            if tik == T::zero() {
                continue;
            }
            let f = tik / out;
            for &(j, tkj) in &row_k {
                if j != i {
                    let e = rows[i].entry(j).or_insert(T::zero());
                    *e = *e + f * tkj;
                    preds[j].insert(i);
                }
            }
            kill[i] = kill[i] + f * kill[k];
            rhs[i] = rhs[i] + f * rhs[k];
        }
    }
    let mut w = vec![T::zero(); m];
    for k in 0..m {
        let mut s = rhs[k];
        for (&j, &a) in &rows[k] {
            s = s + a * w[j];
        }
        w[k] = s / piv[k];
    }
    let mut u = vec![T::zero(); n];
    for x in 0..n {
        if t.in_c(x) {
            let tail: T = p
                .row(x)
                .filter(|&(y, _)| !t.in_c(y))
                .map(|(y, pr)| pr * w[idx[y]])
                .sum();
            u[x] = g[x] + tail;
        } else {
            u[x] = w[idx[x]];
        }
    }
    Ok(u)
}

/// `E_x[τ_C]` for every `x`.
pub fn first_passage_solve<T: Real>(p: &FiniteKernel<T>, c: &[usize]) -> Result<Vec<T>, ChainError> {
    taboo_solve(p, c, &vec![T::one(); p.n()])
}

/// Horizon and accuracy for [`modulated_moments`].
#[derive(Debug, Clone, Copy)]
pub struct MomentOptions<T> {
    pub horizon: usize,
    /// Accept when the tail bound is below `rel_tol · partial sum`.
    pub rel_tol: T,
}

impl<T: Real> Default for MomentOptions<T> {
    fn default() -> Self {
        Self {
            horizon: 20_000,
            rel_tol: T::tol(1e-10, 64.0),
        }
    }
}

/// Result of a modulated-moment series at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatedMoment<T> {
    /// Series value; `+∞` when flagged divergent.
    pub value: T,
    pub partial_sum: T,
    /// Bound on the omitted tail `Σ_{k>N}`.
    pub tail_bound: T,
    pub divergent: bool,
    /// Log-log slope of the terms over their last decade.
    pub term_slope: Option<T>,
}

/// Terms decaying slower than `k^{-1+DIVERGENCE_MARGIN}` are read as a
/// divergent series.
pub const DIVERGENCE_MARGIN: f64 = 0.02;

const SAMPLES: usize = 240;

/// `E_x[Σ_{k<τ_C} r(k) f(Φ_k)]` for every `x`, by the taboo series
/// `Σ_k r(k) (T̃ᵏ f)(x)` truncated at the horizon `N`.
///
/// The omitted tail is bounded by sub-multiplicativity in blocks of `N`
/// steps, using `q = ‖T̃^N‖_∞` and log-concavity of `r` beyond `N`. Terms whose last-decade log-log slope is at least
/// `−1 + 0.02` flag divergence; the value is then `+∞` with the partial sum
/// kept. Otherwise a tail bound above tolerance is a precision error.
pub fn modulated_moments<T: Real>(
    p: &FiniteKernel<T>,
    c: &[usize],
    r: &dyn Fn(usize) -> T,
    f: &[T],
    opts: MomentOptions<T>,
) -> Result<Vec<ModulatedMoment<T>>, ChainError> {
    let t = TabooKernel::new(p, c)?;
    let n = p.n();
    if f.len() != n {
        return Err(ChainError::Domain("f has the wrong length".into()));
    }
    let horizon = opts.horizon.max(1);
    // Log-spaced sample indices for the divergence slope.
    let mut sample_at: Vec<usize> = (0..SAMPLES)
        .map(|i| {
            let e = (horizon as f64).ln() * i as f64 / (SAMPLES - 1) as f64;
            e.exp().round() as usize
        })
        .collect();
    sample_at.dedup();
    let mut samples: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut last_positive = vec![0usize; n];

    let mut h = f.to_vec();
    let mut sum: Vec<T> = h.iter().map(|&v| r(0) * v).collect();
    let mut si = 1;
    let mut k_done = horizon;
    for k in 1..=horizon {
        h = t.apply(&h);
        // Subnormals stall under repeated scaling instead of reaching zero.
        for v in h.iter_mut() {
            if *v < T::min_positive_value() {
                *v = T::zero();
            }
        }
        let rk = r(k);
        let mut any = false;
        for x in 0..n {
            let term = rk * h[x];
            if term > T::zero() {
                sum[x] = sum[x] + term;
                last_positive[x] = k;
                any = true;
            }
        }
        if si < sample_at.len() && sample_at[si] == k {
            for x in 0..n {
                samples[x].push((k, rk * h[x]));
            }
            si += 1;
        }
        if !any {
            k_done = k;
            break;
        }
    }
    let exhausted = k_done < horizon || h.iter().all(|&v| v == T::zero());
    let tail_bound = if exhausted {
        T::zero()
    } else {
        let m_n = h.iter().copied().fold(T::zero(), T::max);
        let mut ones = vec![T::one(); n];
        for _ in 0..horizon {
            ones = t.apply(&ones);
        }
        let q = ones.iter().copied().fold(T::zero(), T::max);
        if q == T::zero() {
            T::zero()
        } else {
            // ‖T̃^{mN+j}‖ ≤ q^{m−1} for 1 ≤ j ≤ N, and r(N+i) ≤ r(N) gⁱ.
            let g = (r(horizon + 1) / r(horizon)).max(T::one());
            let nn = T::from_usize_lossy(horizon);
            let g_n = g.powf(nn);
            let block = if g == T::one() {
                nn
            } else {
                g * (g_n - T::one()) / (g - T::one())
            };
            let contraction = q * g_n;
            if contraction >= T::one() {
                T::infinity()
            } else {
                r(horizon) * m_n * block / (T::one() - contraction)
            }
        }
    };

    let mut out = Vec::with_capacity(n);
    for x in 0..n {
        let end = last_positive[x];
        let fit = |lo: usize, hi: usize| {
            let pts: Vec<(T, T)> = samples[x]
                .iter()
                .filter(|&&(k, v)| k >= lo.max(1) && k <= hi && v > T::zero())
                .map(|&(k, v)| (T::from_usize_lossy(k).ln(), v.ln()))
                .collect();
            if pts.len() < 8 {
                return None;
            }
            let (xs, ys): (Vec<T>, Vec<T>) = pts.into_iter().unzip();
            crate::real::ols_slope(&xs, &ys)
        };
        let slope = if end >= 20 { fit(end / 10, end) } else { None };
        // The occupation factor itself falls by two decades over the window.
        let decayed = |lo: usize, hi: usize| {
            let occ: Vec<T> = samples[x]
                .iter()
                .filter(|&&(k, v)| k >= lo.max(1) && k <= hi && v > T::zero())
                .map(|&(k, v)| v / r(k))
                .collect();
            match (occ.first(), occ.last()) {
                (Some(&a), Some(&b)) => b <= T::lit(1e-2) * a,
                _ => false,
            }
        };
        let cut = T::lit(-1.0 + DIVERGENCE_MARGIN);
        // Terms that reached zero stay zero: the partial sum is exact. A
        // truncated power-law tail is still flagged when the same slope
        // holds over the two decades before the support ends and the
        // occupation has genuinely decayed there.
        let finished = exhausted || h[x] == T::zero();
        let divergent = match slope {
            Some(s) if s >= cut => {
                if finished {
                    end >= 200
                        && decayed(end / 100, end)
                        && fit(end / 100, end / 10)
                            .map_or(false, |s0| s0 >= cut && (s0 - s).abs() <= T::lit(0.25))
                } else {
                    true
                }
            }
            _ => false,
        };
        let partial = sum[x];
        let value = if divergent { T::infinity() } else { partial };
        let tail_x = if finished { T::zero() } else { tail_bound };
        if !divergent && !(tail_x <= opts.rel_tol * partial.abs().max(T::min_positive_value())) {
            return Err(ChainError::Precision {
                state: x,
                achieved: tail_x.to_f64_lossy(),
                requested: (opts.rel_tol * partial).to_f64_lossy(),
            });
        }
        out.push(ModulatedMoment {
            value,
            partial_sum: partial,
            tail_bound: tail_x,
            divergent,
            term_slope: slope,
        });
    }
    Ok(out)
}

/// [`modulated_moments`] at a single state.
pub fn modulated_moment<T: Real>(
    p: &FiniteKernel<T>,
    c: &[usize],
    x: usize,
    r: &dyn Fn(usize) -> T,
    f: &[T],
    opts: MomentOptions<T>,
) -> Result<ModulatedMoment<T>, ChainError> {
    if x >= p.n() {
        return Err(ChainError::Domain(format!("state {x} out of range")));
    }
    Ok(modulated_moments(p, c, r, f, opts)?[x])
}
