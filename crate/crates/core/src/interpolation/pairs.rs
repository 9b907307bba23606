//! Young pairs `(Ψ₁, Ψ₂)` with `Ψ₁(x) Ψ₂(y) ≤ K (x + y)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::interpolation::InterpolationError;
use crate::numerics::{bracket_increasing, brent, integrate, QuadOptions, RootOptions};
use crate::real::{log_grid, Real};

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Parameters identifying a pair. Density-built pairs carry only a label.
#[derive(Debug, Clone, PartialEq)]
pub enum PairKind<T> {
    Power { p: T },
    ConjugatePower { p: T },
    Log { b: T },
    Mixed { p: T, b: T },
    Density { label: String },
}

/// Serializable pair description `{kind, p, b}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

/// A pair of nonnegative functions on `[1, ∞)` with the bounded-ratio
/// property `Ψ₁(x) Ψ₂(y) ≤ K (x + y)`.
#[derive(Clone)]
pub struct YoungPair<T: Real> {
    kind: PairKind<T>,
    psi1: ScalarFn<T>,
    psi2: ScalarFn<T>,
    k: T,
    nondecreasing_from: T,
}

impl<T: Real> fmt::Debug for YoungPair<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("YoungPair")
            .field("kind", &self.kind)
            .field("k", &self.k)
            .field("nondecreasing_from", &self.nondecreasing_from)
            .finish()
    }
}

fn domain(msg: impl Into<String>) -> InterpolationError {
    InterpolationError::Domain(msg.into())
}

/// `1 ∨ log x`.
fn log1<T: Real>(x: T) -> T {
    x.ln().max(T::one())
}

/// `a^e` with `0⁰ = 1`.
fn pow0<T: Real>(a: T, e: T) -> T {
    if e == T::zero() {
        T::one()
    } else {
        a.powf(e)
    }
}

/// Grid size per axis for the bounded-ratio constant.
pub const K_GRID_POINTS: usize = 200;
/// Upper end of the `[1, x_max]²` grid for the bounded-ratio constant.
pub const K_GRID_MAX: f64 = 1e8;

impl<T: Real> YoungPair<T> {
    fn exact(kind: PairKind<T>, psi1: ScalarFn<T>, psi2: ScalarFn<T>) -> Self {
        Self {
            kind,
            psi1,
            psi2,
            k: T::one(),
            nondecreasing_from: T::one(),
        }
    }

    fn bounded(kind: PairKind<T>, psi1: ScalarFn<T>, psi2: ScalarFn<T>, from: T) -> Self {
        let mut pair = Self {
            kind,
            psi1,
            psi2,
            k: T::one(),
            nondecreasing_from: from,
        };
        let g = log_grid(T::one(), T::lit(K_GRID_MAX), K_GRID_POINTS);
        pair.k = grid_sup(&pair, &g, &g).0;
        pair
    }

    pub fn kind(&self) -> &PairKind<T> {
        &self.kind
    }

    /// Bounded-ratio constant; 1 for exact pairs, a grid estimate otherwise.
    pub fn k(&self) -> T {
        self.k
    }

    /// Both functions are nondecreasing on `[x*, ∞)`.
    pub fn nondecreasing_from(&self) -> T {
        self.nondecreasing_from
    }

    pub fn psi1(&self, x: T) -> T {
        (self.psi1)(x)
    }

    pub fn psi2(&self, y: T) -> T {
        (self.psi2)(y)
    }

    pub fn to_config(&self) -> Option<PairConfig> {
        let f = |x: T| Some(x.to_f64_lossy());
        let (kind, p, b) = match &self.kind {
            PairKind::Power { p } => ("power", f(*p), None),
            PairKind::ConjugatePower { p } => ("conjugate", f(*p), None),
            PairKind::Log { b } => ("log", None, f(*b)),
            PairKind::Mixed { p, b } => ("mixed", f(*p), f(*b)),
            PairKind::Density { .. } => return None,
        };
        Some(PairConfig {
            kind: kind.into(),
            p,
            b,
        })
    }

    pub fn from_config(cfg: &PairConfig) -> Result<Self, InterpolationError> {
        let need = |v: Option<f64>, name: &str| {
            v.map(T::lit)
                .ok_or_else(|| domain(format!("pair kind '{}' needs {name}", cfg.kind)))
        };
        match cfg.kind.as_str() {
            "power" => power_pair(need(cfg.p, "p")?),
            "conjugate" => conjugate_power_pair(need(cfg.p, "p")?),
            "log" => log_pair(need(cfg.b, "b")?),
            "mixed" => mixed_pair(need(cfg.p, "p")?, need(cfg.b, "b")?),
            other => Err(domain(format!("unknown pair kind '{other}'"))),
        }
    }

    /// Exponents `(a₁, l₁, a₂, l₂)` with `Ψᵢ(x) ≍ x^{aᵢ} log^{lᵢ} x` at infinity.
    pub(crate) fn shape(&self) -> Option<(T, T, T, T)> {
        let one = T::one();
        let z = T::zero();
        match &self.kind {
            PairKind::Power { p } => Some((one - *p, z, *p, z)),
            PairKind::ConjugatePower { p } => {
                let q = *p / (*p - one);
                Some((one / *p, z, one / q, z))
            }
            PairKind::Log { b } => Some((z, *b, one, -*b)),
            PairKind::Mixed { p, b } => Some((one - *p, -*b, *p, *b)),
            PairKind::Density { .. } => None,
        }
    }
}

/// `Ψ₁(x) = ((1−p)x)^{1−p}`, `Ψ₂(y) = (p y)^p`, with `0⁰ = 1`.
pub fn power_pair<T: Real>(p: T) -> Result<YoungPair<T>, InterpolationError> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(domain(format!("power pair needs p in [0, 1], got {p}")));
    }
    let q = T::one() - p;
    Ok(YoungPair::exact(
        PairKind::Power { p },
        Arc::new(move |x| pow0(q * x, q)),
        Arc::new(move |y| pow0(p * y, p)),
    ))
}

/// `Ψ₁(x) = (p x)^{1/p}`, `Ψ₂(y) = (q y)^{1/q}`, `1/p + 1/q = 1`.
pub fn conjugate_power_pair<T: Real>(p: T) -> Result<YoungPair<T>, InterpolationError> {
    if !(p > T::one() && p.is_finite()) {
        return Err(domain(format!("conjugate pair needs p > 1, got {p}")));
    }
    let q = p / (p - T::one());
    Ok(YoungPair::exact(
        PairKind::ConjugatePower { p },
        Arc::new(move |x| (p * x).powf(T::one() / p)),
        Arc::new(move |y| (q * y).powf(T::one() / q)),
    ))
}

/// `Ψ₁(x) = (1 ∨ log x)^b`, `Ψ₂(y) = y (1 ∨ log y)^{−b}`.
pub fn log_pair<T: Real>(b: T) -> Result<YoungPair<T>, InterpolationError> {
    if !(b > T::zero() && b.is_finite()) {
        return Err(domain(format!("log pair needs b > 0, got {b}")));
    }
    let from = if b > T::one() { b.exp() } else { T::one() };
    Ok(YoungPair::bounded(
        PairKind::Log { b },
        Arc::new(move |x| log1(x).powf(b)),
        Arc::new(move |y| y * log1(y).powf(-b)),
        from,
    ))
}

/// `Ψ₁(x) = x^{1−p} (1 ∨ log x)^{−b}`, `Ψ₂(y) = y^p (1 ∨ log y)^b`.
///
/// Admissible: `p ∈ (0, 1)` with any `b`; `p = 0` with `b > 0`; `p = 1`
/// with `b < 0`. At `p = 1` the modulus in use must also satisfy `b < −α`,
/// which is flagged by the trade-off table rather than checked here.
pub fn mixed_pair<T: Real>(p: T, b: T) -> Result<YoungPair<T>, InterpolationError> {
    let ok = (p > T::zero() && p < T::one() && b.is_finite())
        || (p == T::zero() && b > T::zero() && b.is_finite())
        || (p == T::one() && b < T::zero() && b.is_finite());
    if !ok {
        return Err(domain(format!(
            "mixed pair (p={p}, b={b}) outside p in (0,1), (p=0, b>0) or (p=1, b<0)"
        )));
    }
    let q = T::one() - p;
    // Ψ₁ increases once log x ≥ b/(1−p); Ψ₂ once log y ≥ −b/p.
    let mut from_log = T::one();
    if b > T::zero() && q > T::zero() {
        from_log = from_log.max(b / q);
    }
    if b < T::zero() && p > T::zero() {
        from_log = from_log.max(-b / p);
    }
    let from = if from_log > T::one() { from_log.exp() } else { T::one() };
    Ok(YoungPair::bounded(
        PairKind::Mixed { p, b },
        Arc::new(move |x| pow0(x, q) * log1(x).powf(-b)),
        Arc::new(move |y| pow0(y, p) * log1(y).powf(b)),
        from,
    ))
}

/// Running `∫₀ˣ ρ` by adaptive quadrature.
fn primitive<T: Real>(rho: &(dyn Fn(T) -> T + Send + Sync), x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    integrate(rho, T::zero(), x, QuadOptions::with_rel(T::tol(1e-15, 64.0)))
        .map(|q| q.value)
        .unwrap_or_else(|_| T::nan())
}

/// Solves `g(s) = y` for nondecreasing `g` with `g(0) = 0`.
fn invert_from_zero<T: Real, G: FnMut(T) -> T>(mut g: G, y: T) -> T {
    if y <= T::zero() {
        return T::zero();
    }
    let Ok((lo, hi)) = bracket_increasing(&mut g, T::zero(), T::one(), y) else {
        return T::infinity();
    };
    brent(|s| g(s) - y, lo, hi, RootOptions::default()).unwrap_or_else(|_| T::nan())
}

/// Builds `(G₁⁻¹, G₂⁻¹)` from an increasing density `ρ₁` with `ρ₁(0) = 0`,
/// where `G₁ = ∫ρ₁` and `G₂ = ∫ρ₁⁻¹`.
///
/// `G₂` is never integrated directly: along `t = ρ₁(s)` it equals
/// `s ρ₁(s) − G₁(s)`.
pub fn young_pair_from_density<T, F>(
    label: impl Into<String>,
    rho1: F,
) -> Result<YoungPair<T>, InterpolationError>
where
    T: Real,
    F: Fn(T) -> T + Send + Sync + 'static,
{
    if rho1(T::zero()) != T::zero() {
        return Err(domain("density must vanish at 0"));
    }
    let mut prev = T::zero();
    let mut probes = vec![T::zero()];
    probes.extend(log_grid(T::lit(1e-6), T::lit(1e2), 161));
    for &t in &probes[1..] {
        let r = rho1(t);
        if !(r > prev) || !r.is_finite() {
            return Err(domain(format!(
                "density is not increasing near t = {t} (rho1 = {r}, previous {prev})"
            )));
        }
        prev = r;
    }
    let rho: Arc<dyn Fn(T) -> T + Send + Sync> = Arc::new(rho1);
    let r1 = rho.clone();
    let psi1 = Arc::new(move |x: T| invert_from_zero(|s| primitive(&*r1, s), x));
    let r2 = rho;
    let psi2 = Arc::new(move |y: T| {
        if y <= T::zero() {
            return T::zero();
        }
        let legendre = |s: T| s * r2(s) - primitive(&*r2, s);
        let s = invert_from_zero(legendre, y);
        // Absorbs a jump of ρ₁ at s: G₂ is linear with slope s across it.
        r2(s) + (y - legendre(s)) / s
    });
    Ok(YoungPair::exact(
        PairKind::Density {
            label: label.into(),
        },
        psi1,
        psi2,
    ))
}

/// Grid supremum of `Ψ₁(x) Ψ₂(y) / (x + y)` and its argmax.
fn grid_sup<T: Real>(pair: &YoungPair<T>, xs: &[T], ys: &[T]) -> (T, (T, T)) {
    let p1: Vec<T> = xs.iter().map(|&x| pair.psi1(x)).collect();
    let p2: Vec<T> = ys.iter().map(|&y| pair.psi2(y)).collect();
    let mut best = (T::neg_infinity(), (T::one(), T::one()));
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let r = p1[i] * p2[j] / (x + y);
            if r > best.0 {
                best = (r, (x, y));
            }
        }
    }
    best
}

/// Outcome of [`validate_pair`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairValidation<T> {
    pub max_ratio: T,
    pub arg_max: (T, T),
    pub k: T,
    pub passes: bool,
}

/// Relative slack on the `K` comparison.
pub const PAIR_TOL: f64 = 1e-12;

/// Checks `Ψ₁(x) Ψ₂(y) ≤ K (x + y)` on explicit sample points.
pub fn validate_pair<T: Real>(pair: &YoungPair<T>, points: &[(T, T)]) -> PairValidation<T> {
    let mut best = (T::neg_infinity(), (T::one(), T::one()));
    for &(x, y) in points {
        let r = pair.psi1(x) * pair.psi2(y) / (x + y);
        if r > best.0 || r.is_nan() {
            best = (r, (x, y));
            if r.is_nan() {
                break;
            }
        }
    }
    PairValidation {
        max_ratio: best.0,
        arg_max: best.1,
        k: pair.k,
        passes: best.0 <= pair.k * (T::one() + T::lit(PAIR_TOL)),
    }
}

/// Checks the pair on the product grid `xs × ys`.
pub fn validate_pair_grid<T: Real>(pair: &YoungPair<T>, xs: &[T], ys: &[T]) -> PairValidation<T> {
    let (max_ratio, arg_max) = grid_sup(pair, xs, ys);
    PairValidation {
        max_ratio,
        arg_max,
        k: pair.k,
        passes: max_ratio <= pair.k * (T::one() + T::lit(PAIR_TOL)),
    }
}
