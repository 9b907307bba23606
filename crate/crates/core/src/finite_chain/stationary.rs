//! Stationary distributions, f-norms and total-variation curves.

use std::collections::BTreeMap;

use crate::finite_chain::{check_irreducible_aperiodic, ChainError, FiniteKernel};
use crate::real::Real;

fn require_irreducible<T: Real>(p: &FiniteKernel<T>) -> Result<crate::finite_chain::Structure, ChainError> {
    let s = check_irreducible_aperiodic(p);
    if !s.irreducible {
        return Err(ChainError::Reducible {
            closed_classes: s.closed_classes,
        });
    }
    Ok(s)
}

/// Stationary distribution by Grassmann–Taksar–Heyman elimination on the
/// sparse kernel, eliminating states from the last index down.
///
/// Subtraction-free, so the result is accurate to a few ulps per entry.
pub fn stationary<T: Real>(p: &FiniteKernel<T>) -> Result<Vec<T>, ChainError> {
    require_irreducible(p)?;
    let n = p.n();
    if n == 1 {
        return Ok(vec![T::one()]);
    }
    let mut rows: Vec<BTreeMap<usize, T>> = (0..n)
        .map(|i| p.row(i).filter(|&(j, _)| j != i).collect())
        .collect();
    let mut preds: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for (i, row) in rows.iter().enumerate() {
        for &j in row.keys() {
            preds[j].insert(i);
        }
    }
    // For each eliminated k: the reduced column {i < k: p̃(i,k)} and s_k.
    let mut cols_at: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut s_at = vec![T::zero(); n];
    for k in (1..n).rev() {
        let row_k: Vec<(usize, T)> = rows[k].iter().filter(|e| *e.0 < k).map(|(&j, &v)| (j, v)).collect();
        let s: T = row_k.iter().map(|e| e.1).sum();
        if s <= T::zero() {
            return Err(ChainError::Numerical(format!(
                "GTH pivot vanished at state {k}"
            )));
        }
        let col_k: Vec<(usize, T)> = preds[k]
            .iter()
            .filter(|&&i| i < k)
            .map(|&i| (i, rows[i][&k]))
            .collect();
        for &(i, pik) in &col_k {
            rows[i].remove(&k);
            let f = pik / s;
            for &(j, pkj) in &row_k {
                if j == i {
                    continue;
                }
                let e = rows[i].entry(j).or_insert(T::zero());
                *e = *e + f * pkj;
                preds[j].insert(i);
            }
        }
        for &(j, _) in &row_k {
            preds[j].remove(&k);
        }
        cols_at[k] = col_k;
        s_at[k] = s;
    }
    let mut pi = vec![T::zero(); n];
    pi[0] = T::one();
    for k in 1..n {
        let num: T = cols_at[k].iter().map(|&(i, v)| pi[i] * v).sum();
        pi[k] = num / s_at[k];
    }
    let total: T = pi.iter().copied().sum();
    for v in &mut pi {
        *v = *v / total;
    }
    Ok(pi)
}

/// `‖πP − π‖₁`.
pub fn stationary_residual<T: Real>(p: &FiniteKernel<T>, pi: &[T]) -> T {
    p.left_mul(pi)
        .iter()
        .zip(pi)
        .map(|(a, b)| (*a - *b).abs())
        .sum()
}

/// `‖μ‖_f = Σ f(x) |μ(x)|`, the supremum of `|μ(g)|` over `|g| ≤ f`.
pub fn f_norm<T: Real>(mu: &[T], f: &[T]) -> Result<T, ChainError> {
    if mu.len() != f.len() {
        return Err(ChainError::Domain(format!(
            "measure has {} entries, f has {}",
            mu.len(),
            f.len()
        )));
    }
    if let Some((i, v)) = f.iter().enumerate().find(|(_, v)| !(**v >= T::one())) {
        return Err(ChainError::Domain(format!("f({i}) = {v} < 1")));
    }
    Ok(mu.iter().zip(f).map(|(m, w)| m.abs() * *w).sum())
}

/// `d(n) = ‖Pⁿ(x0, ·) − π‖_f` for `n = 0..=n_max`.
pub fn tv_curve<T: Real>(
    p: &FiniteKernel<T>,
    x0: usize,
    f: &[T],
    n_max: usize,
) -> Result<Vec<T>, ChainError> {
    let s = require_irreducible(p)?;
    if s.period != 1 {
        return Err(ChainError::Periodic { period: s.period });
    }
    if x0 >= p.n() {
        return Err(ChainError::Domain(format!("x0 = {x0} out of range")));
    }
    let pi = stationary(p)?;
    tv_curve_against(p, x0, f, n_max, &pi)
}

/// [`tv_curve`] with a precomputed stationary vector.
pub fn tv_curve_against<T: Real>(
    p: &FiniteKernel<T>,
    x0: usize,
    f: &[T],
    n_max: usize,
    pi: &[T],
) -> Result<Vec<T>, ChainError> {
    let mut mu = vec![T::zero(); p.n()];
    mu[x0] = T::one();
    let mut out = Vec::with_capacity(n_max + 1);
    let mut diff = vec![T::zero(); p.n()];
    for n in 0..=n_max {
        if n > 0 {
            mu = p.left_mul(&mu);
        }
        for (d, (a, b)) in diff.iter_mut().zip(mu.iter().zip(pi)) {
            *d = *a - *b;
        }
        out.push(f_norm(&diff, f)?);
    }
    Ok(out)
}
