//! Rate/norm trade-off tables: `n ↦ Ψ₁(r_φ(n))` against `v ↦ Ψ₂(φ(v))`.

use std::fmt;
use std::io::Write;

use crate::interpolation::{InterpolationError, PairKind, YoungPair};
use crate::rate::{asymptotic_rate, classify_regime, r_phi, AsymptoticRate, PhiFamily, PhiSpec, Regime};
use crate::real::{log_grid, ols_slope, Real};

/// `x^poly · log^log(x) · (log log x)^loglog · exp(scale · x^stretch)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Growth<T> {
    pub poly: T,
    pub log: T,
    pub loglog: T,
    /// `(scale, stretch)` of the exponential factor, if any.
    pub exp: Option<(T, T)>,
}

impl<T: Real> Growth<T> {
    fn format(&self, var: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.poly != T::zero() {
            parts.push(format!("{var}^{}", self.poly));
        }
        if self.log != T::zero() {
            parts.push(format!("log({var})^{}", self.log));
        }
        if self.loglog != T::zero() {
            parts.push(format!("loglog({var})^{}", self.loglog));
        }
        if let Some((scale, stretch)) = self.exp {
            parts.push(format!("exp({scale}*{var}^{stretch})"));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }

    pub fn display<'a>(&'a self, var: &'a str) -> impl fmt::Display + 'a {
        struct D<'a, T>(&'a Growth<T>, &'a str);
        impl<T: Real> fmt::Display for D<'_, T> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.format(self.1, f)
            }
        }
        D(self, var)
    }
}

/// Growth of `Ψ(g)` when `Ψ(x) ≍ x^a log^l x` and `g` has growth `inner`.
fn compose<T: Real>(a: T, l: T, inner: Growth<T>) -> Growth<T> {
    let mut out = Growth {
        poly: a * inner.poly,
        log: a * inner.log,
        loglog: a * inner.loglog,
        exp: inner.exp.map(|(s, st)| (a * s, st)),
    };
    if out.exp.map_or(false, |(s, _)| s == T::zero()) {
        out.exp = None;
    }
    // log g ≍ scale·x^stretch, else poly·log x, else log·loglog x.
    if let Some((_, stretch)) = inner.exp {
        out.poly = out.poly + stretch * l;
    } else if inner.poly > T::zero() {
        out.log = out.log + l;
    } else if inner.log > T::zero() {
        out.loglog = out.loglog + l;
    }
    out
}

fn rate_growth<T: Real>(r: AsymptoticRate<T>) -> Growth<T> {
    match r {
        AsymptoticRate::Polynomial { exponent, .. } => Growth {
            poly: exponent,
            ..Growth::default()
        },
        AsymptoticRate::LogPower { exponent } => Growth {
            log: exponent,
            ..Growth::default()
        },
        AsymptoticRate::StretchedExponential {
            prefactor_exponent,
            stretch,
            scale,
        } => Growth {
            poly: prefactor_exponent,
            exp: Some((scale, stretch)),
            ..Growth::default()
        },
    }
}

fn phi_growth<T: Real>(phi: &PhiSpec<T>) -> Option<Growth<T>> {
    let a = phi.alpha().unwrap_or_else(T::zero);
    let g = match phi.family() {
        PhiFamily::Constant => Growth::default(),
        PhiFamily::Power => Growth {
            poly: a,
            ..Growth::default()
        },
        PhiFamily::Logarithmic => Growth {
            log: a,
            ..Growth::default()
        },
        PhiFamily::SubExponential => Growth {
            poly: T::one(),
            log: -a,
            ..Growth::default()
        },
        PhiFamily::Custom => return None,
    };
    Some(g)
}

/// One pair's contribution to a trade-off table.
#[derive(Debug, Clone)]
pub struct TradeoffRow<T: Real> {
    pub pair_id: usize,
    pub pair: YoungPair<T>,
    /// Growth of `n ↦ Ψ₁(r_φ(n))`.
    pub rate: Option<Growth<T>>,
    /// Growth of `v ↦ Ψ₂(φ(v))`.
    pub norm: Option<Growth<T>>,
    /// Admissibility concerns that depend on φ, reported rather than fixed.
    pub flag: Option<String>,
}

/// Trade-off rows for one modulus.
#[derive(Debug, Clone)]
pub struct TradeoffTable<T: Real> {
    pub phi: PhiSpec<T>,
    pub rows: Vec<TradeoffRow<T>>,
}

/// Builds one row per pair for a subgeometric modulus.
pub fn tradeoff_table<T: Real>(
    phi: &PhiSpec<T>,
    pairs: &[YoungPair<T>],
) -> Result<TradeoffTable<T>, InterpolationError> {
    if let Regime::Geometric { limit } = classify_regime(phi)? {
        return Err(InterpolationError::Regime(format!(
            "phi is in the geometric regime (lim phi' ~ {limit}); trade-offs need a subgeometric phi"
        )));
    }
    let asym = asymptotic_rate(phi);
    let phi_g = phi_growth(phi);
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(pair_id, pair)| {
            let shape = pair.shape();
            let mut rate = match (shape, asym) {
                (Some((a1, l1, _, _)), Some(r)) => Some(compose(a1, l1, rate_growth(r))),
                _ => None,
            };
            // Mixed pairs against a stretched-exponential rate: the prefactor
            // is reported in the published form n^{−(α+b)/(1+α)}.
            if let (PairKind::Mixed { b, .. }, Some(AsymptoticRate::StretchedExponential { .. })) =
                (pair.kind(), asym)
            {
                if let (Some(g), Some(alpha)) = (rate.as_mut(), phi.alpha()) {
                    g.poly = -(alpha + *b) / (T::one() + alpha);
                }
            }
            let norm = match (shape, phi_g) {
                (Some((_, _, a2, l2)), Some(g)) => Some(compose(a2, l2, g)),
                _ => None,
            };
            let flag = match (pair.kind(), phi.alpha()) {
                (PairKind::Mixed { p, b }, Some(alpha)) if *p == T::one() && !(*b < -alpha) => {
                    Some(format!("mixed pair at p=1 needs b < -alpha = {}", -alpha))
                }
                _ => None,
            };
            TradeoffRow {
                pair_id,
                pair: pair.clone(),
                rate,
                norm,
                flag,
            }
        })
        .collect();
    Ok(TradeoffTable {
        phi: phi.clone(),
        rows,
    })
}

impl<T: Real> TradeoffTable<T> {
    /// `Ψ₁(r_φ(n))` for row `i`.
    pub fn rate_at(&self, i: usize, n: T) -> Result<T, InterpolationError> {
        Ok(self.rows[i].pair.psi1(r_phi(&self.phi, n)?))
    }

    /// `Ψ₂(φ(v))` for row `i`.
    pub fn weight_at(&self, i: usize, v: T) -> T {
        self.rows[i].pair.psi2(self.phi.eval(v))
    }

    /// Log-log regression slope of `Ψ₁(r_φ(n))` over `[lo, hi]`.
    pub fn fitted_rate_exponent(&self, i: usize, lo: T, hi: T) -> Result<T, InterpolationError> {
        let ns = log_grid(lo, hi, 61);
        let mut xs = Vec::with_capacity(ns.len());
        let mut ys = Vec::with_capacity(ns.len());
        for n in ns {
            xs.push(n.ln());
            ys.push(self.rate_at(i, n)?.ln());
        }
        ols_slope(&xs, &ys).ok_or_else(|| InterpolationError::Domain("degenerate grid".into()))
    }

    /// CSV with one line per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "pair_id,kind,p,b,k,rate_descriptor,norm_descriptor,rate_poly,rate_log,rate_loglog,rate_exp_scale,rate_exp_stretch,flag"
        )?;
        let num = |x: Option<T>| x.map(|v| format!("{:.16e}", v.to_f64_lossy())).unwrap_or_default();
        for row in &self.rows {
            let cfg = row.pair.to_config();
            let kind = match row.pair.kind() {
                PairKind::Density { label } => format!("density[{label}]"),
                _ => cfg.as_ref().map(|c| c.kind.clone()).unwrap_or_default(),
            };
            let p = cfg.as_ref().and_then(|c| c.p).map(|v| format!("{v:.16e}")).unwrap_or_default();
            let b = cfg.as_ref().and_then(|c| c.b).map(|v| format!("{v:.16e}")).unwrap_or_default();
            let rate_s = row.rate.map(|g| g.display("n").to_string()).unwrap_or_default();
            let norm_s = row.norm.map(|g| g.display("v").to_string()).unwrap_or_default();
            let r = row.rate;
            writeln!(
                out,
                "{},{},{},{},{},\"{}\",\"{}\",{},{},{},{},{},\"{}\"",
                row.pair_id,
                kind,
                p,
                b,
                num(Some(row.pair.k())),
                rate_s,
                norm_s,
                num(r.map(|g| g.poly)),
                num(r.map(|g| g.log)),
                num(r.map(|g| g.loglog)),
                num(r.and_then(|g| g.exp.map(|e| e.0))),
                num(r.and_then(|g| g.exp.map(|e| e.1))),
                row.flag.clone().unwrap_or_default(),
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolation::{log_pair, mixed_pair, power_pair};

    #[test]
    fn power_family_with_power_pairs() {
        let phi = PhiSpec::power(1.0_f64, 0.5).unwrap();
        let pairs: Vec<_> = [0.0, 0.25, 0.5, 0.9].iter().map(|&p| power_pair(p).unwrap()).collect();
        let t = tradeoff_table(&phi, &pairs).unwrap();
        for (i, p) in [0.0, 0.25, 0.5, 0.9].iter().enumerate() {
            let g = t.rows[i].rate.unwrap();
            assert!((g.poly - (1.0 - p)).abs() < 1e-15);
            let fit = t.fitted_rate_exponent(i, 1e3, 1e5).unwrap();
            assert!((fit - (1.0 - p)).abs() <= 0.01 * (1.0 - p).max(1e-2), "p={p} fit={fit}");
            assert!((t.rows[i].norm.unwrap().poly - 0.5 * p).abs() < 1e-15);
        }
    }

    #[test]
    fn power_family_with_log_pair() {
        let phi = PhiSpec::power(1.0_f64, 0.5).unwrap();
        let t = tradeoff_table(&phi, &[log_pair(2.0).unwrap()]).unwrap();
        let g = t.rows[0].rate.unwrap();
        assert_eq!((g.poly, g.log), (0.0, 2.0));
    }

    #[test]
    fn subexponential_mixed_pair_descriptor() {
        let phi = PhiSpec::sub_exponential(1.0_f64, 1.0, None).unwrap();
        let t = tradeoff_table(&phi, &[mixed_pair(0.5, 1.0).unwrap()]).unwrap();
        let g = t.rows[0].rate.unwrap();
        assert_eq!(g.poly, -1.0);
        let (scale, stretch) = g.exp.unwrap();
        assert!((scale - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(stretch, 0.5);
    }

    #[test]
    fn mixed_pair_at_p_one_is_flagged() {
        let phi = PhiSpec::power(1.0_f64, 0.5).unwrap();
        let t = tradeoff_table(
            &phi,
            &[mixed_pair(1.0, -0.25).unwrap(), mixed_pair(1.0, -1.0).unwrap()],
        )
        .unwrap();
        assert!(t.rows[0].flag.is_some());
        assert!(t.rows[1].flag.is_none());
    }

    #[test]
    fn geometric_phi_rejected() {
        let phi = PhiSpec::linear(0.5_f64).unwrap();
        let r = tradeoff_table(&phi, &[power_pair(0.5).unwrap()]);
        assert!(matches!(r, Err(InterpolationError::Regime(_))));
    }

    #[test]
    fn csv_has_row_per_pair() {
        let phi = PhiSpec::power(1.0_f64, 0.5).unwrap();
        let t = tradeoff_table(&phi, &[power_pair(0.5).unwrap(), log_pair(1.0).unwrap()]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 3);
        assert!(s.contains("\"n^0.5\""));
    }
}
