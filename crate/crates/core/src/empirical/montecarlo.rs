use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::empirical::EmpiricalError;
use crate::models::Sampler;
use crate::real::Real;

/// Replicas whose cycle exceeds this many steps are censored.
pub const CYCLE_CAP: usize = 1_000_000;

/// Censoring above this fraction makes the estimate unreliable.
pub const CENSOR_WARN_FRACTION: f64 = 0.01;

const MIN_REPLICAS: usize = 100;
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub replicas: usize,
    pub seed: u64,
    pub cycle_cap: usize,
}

impl McOptions {
    pub fn new(replicas: usize, seed: u64) -> Self {
        Self {
            replicas,
            seed,
            cycle_cap: CYCLE_CAP,
        }
    }
}

/// Monte-Carlo estimate of `E_x[Σ_{k<τ_C} r(k) f(Φ_k)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct McMoment<T> {
    /// Mean over uncensored replicas.
    pub estimate: T,
    pub std_err: T,
    pub ci_low: T,
    pub ci_high: T,
    pub replicas: usize,
    pub censored: usize,
    /// Mean `τ_C` over uncensored replicas.
    pub mean_return_time: T,
    /// Hill estimate of the tail index of the per-replica sums.
    pub hill_index: Option<T>,
    /// Censoring above [`CENSOR_WARN_FRACTION`], a non-finite sum, or a
    /// tail index at most 1 (infinite mean).
    pub blow_up: bool,
    pub warning: Option<String>,
}

impl<T: Real> McMoment<T> {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.replicas as f64
    }
}

/// Hill estimator `k / Σ_{i<k} log(X_(i) / X_(k))` on the `k` largest
/// positive values, `k = max(10, ⌊√n⌋)`.
pub fn hill_index<T: Real>(xs: &[T]) -> Option<T> {
    let mut v: Vec<T> = xs.iter().copied().filter(|x| *x > T::zero()).collect();
    let k = ((v.len() as f64).sqrt() as usize).max(10);
    if v.len() <= k {
        return None;
    }
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    if !v[0].is_finite() {
        return Some(T::zero());
    }
    let base = v[k].ln();
    let s: T = v[..k].iter().map(|x| x.ln() - base).sum();
    if s > T::zero() {
        Some(T::from_usize_lossy(k) / s)
    } else {
        None
    }
}

struct Replica<T> {
    sum: T,
    tau: usize,
    censored: bool,
}

/// Simulates `replicas` independent excursions from `x0` until the first
/// return to `C` at a time `n ≥ 1`. Replica `i` draws from stream `i` of a
/// ChaCha8 generator keyed by `seed`, and the reduction runs in replica
/// order, so results do not depend on the thread count.
pub fn mc_return_moment<M, T>(
    model: &M,
    x0: M::State,
    in_c: &(dyn Fn(&M::State) -> bool + Sync),
    r: &(dyn Fn(usize) -> T + Sync),
    f: &(dyn Fn(&M::State) -> T + Sync),
    opts: McOptions,
) -> Result<McMoment<T>, EmpiricalError>
where
    M: Sampler,
    M::State: Sync,
    T: Real,
{
    if opts.replicas < MIN_REPLICAS {
        return Err(EmpiricalError::Domain(format!(
            "need at least {MIN_REPLICAS} replicas, got {}",
            opts.replicas
        )));
    }
    if opts.cycle_cap == 0 {
        return Err(EmpiricalError::Domain("cycle cap must be positive".into()));
    }
    let runs: Vec<Replica<T>> = (0..opts.replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64);
            let mut x = x0.clone();
            let mut sum = T::zero();
            for k in 0..opts.cycle_cap {
                sum = sum + r(k) * f(&x);
                x = model.step(&x, &mut rng);
                if in_c(&x) {
                    return Replica {
                        sum,
                        tau: k + 1,
                        censored: false,
                    };
                }
            }
            Replica {
                sum,
                tau: opts.cycle_cap,
                censored: true,
            }
        })
        .collect();

    let done: Vec<&Replica<T>> = runs.iter().filter(|r| !r.censored).collect();
    let censored = runs.len() - done.len();
    let m = done.len();
    let nan = T::nan();
    let (estimate, std_err, mean_tau) = if m == 0 {
        (nan, nan, nan)
    } else {
        let mf = T::from_usize_lossy(m);
        let mean = done.iter().map(|r| r.sum).sum::<T>() / mf;
        let var = if m > 1 {
            done.iter().map(|r| (r.sum - mean) * (r.sum - mean)).sum::<T>() / T::from_usize_lossy(m - 1)
        } else {
            T::zero()
        };
        let tau = done.iter().map(|r| T::from_usize_lossy(r.tau)).sum::<T>() / mf;
        (mean, (var / mf).sqrt(), tau)
    };
    let sums: Vec<T> = done.iter().map(|r| r.sum).collect();
    let hill = hill_index(&sums);
    let frac = censored as f64 / runs.len() as f64;
    let mut reasons = Vec::new();
    if frac > CENSOR_WARN_FRACTION {
        reasons.push(format!("{censored} of {} replicas censored at {} steps", runs.len(), opts.cycle_cap));
    }
    if !estimate.is_finite() || !std_err.is_finite() {
        reasons.push("non-finite replica sums".to_string());
    }
    if let Some(h) = hill {
        if h <= T::one() {
            reasons.push(format!("tail index {h:.3} <= 1: the moment is likely infinite"));
        }
    }
    let z = T::lit(Z95);
    Ok(McMoment {
        estimate,
        std_err,
        ci_low: estimate - z * std_err,
        ci_high: estimate + z * std_err,
        replicas: runs.len(),
        censored,
        mean_return_time: mean_tau,
        hill_index: hill,
        blow_up: !reasons.is_empty(),
        warning: if reasons.is_empty() { None } else { Some(reasons.join("; ")) },
    })
}

/// `estimate,ci_low,ci_high,replicas,censored` header and one row.
pub fn write_moment_csv<T: Real, W: Write>(m: &McMoment<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "estimate,ci_low,ci_high,replicas,censored")?;
    writeln!(
        out,
        "{:.16e},{:.16e},{:.16e},{},{}",
        m.estimate.to_f64_lossy(),
        m.ci_low.to_f64_lossy(),
        m.ci_high.to_f64_lossy(),
        m.replicas,
        m.censored
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_chain::{first_passage_solve, FiniteKernel};
    use crate::models::{BrtRegime, BrtSampler, BrtSpec, KernelSampler};

    fn half() -> BrtSampler<f64> {
        BrtSampler::new(BrtSpec::new(BrtRegime::Constant { p: 0.5 }, 60).unwrap()).unwrap()
    }

    #[test]
    fn half_chain_mean_three() {
        let m = mc_return_moment(&half(), 0, &|x| *x == 0, &|_| 1.0_f64, &|_| 1.0, McOptions::new(100_000, 1)).unwrap();
        assert!((m.estimate - 3.0).abs() < 3.0 * m.std_err, "{m:?}");
        assert_eq!(m.censored, 0);
        assert!(!m.blow_up);
    }

    #[test]
    fn order_independent() {
        let o = McOptions::new(2000, 77);
        let a = mc_return_moment(&half(), 0, &|x| *x == 0, &|k| k as f64, &|_| 1.0, o).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_return_moment(&half(), 0, &|x| *x == 0, &|k| k as f64, &|_| 1.0, o).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn matches_first_passage() {
        let k = FiniteKernel::from_dense(&[
            vec![0.2, 0.5, 0.3],
            vec![0.4, 0.4, 0.2],
            vec![0.1, 0.3, 0.6],
        ])
        .unwrap();
        let exact = first_passage_solve(&k, &[0]).unwrap();
        let s = KernelSampler { kernel: &k };
        for x0 in 0..3 {
            let m = mc_return_moment(&s, x0, &|x| *x == 0, &|_| 1.0_f64, &|_| 1.0, McOptions::new(20_000, 5)).unwrap();
            assert!((m.estimate - exact[x0]).abs() < 3.0 * m.std_err, "{x0}: {m:?} vs {}", exact[x0]);
        }
    }

    #[test]
    fn censoring_shrinks_with_cap() {
        let mut last = f64::INFINITY;
        for cap in [1, 2, 4, 8, 16] {
            let o = McOptions {
                cycle_cap: cap,
                ..McOptions::new(5000, 3)
            };
            let m = mc_return_moment(&half(), 0, &|x| *x == 0, &|_| 1.0, &|_| 1.0, o).unwrap();
            assert!(m.censored_fraction() <= last);
            last = m.censored_fraction();
        }
        assert!(last < 0.01);
    }

    #[test]
    fn hill_on_pareto() {
        // Exact Pareto(2) quantiles.
        let n = 40_000;
        let xs: Vec<f64> = (1..=n).map(|i| (1.0 - i as f64 / (n + 1) as f64).powf(-0.5)).collect();
        let h = hill_index(&xs).unwrap();
        assert!((h - 2.0).abs() < 0.2, "{h}");
    }

    #[test]
    fn too_few_replicas() {
        assert!(mc_return_moment(&half(), 0, &|x| *x == 0, &|_| 1.0, &|_| 1.0, McOptions::new(10, 1)).is_err());
    }
}
