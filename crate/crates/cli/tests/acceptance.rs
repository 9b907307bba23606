//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if
//! any fails. Tolerances and runtime budgets are pinned below.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subgeo::drift::{verify_drift_sequence, verify_moment_bounds};
use subgeo::empirical::{
    brt_truncation_error, mc_return_moment, rate_diagnostic, DiagnosticOptions, McOptions, RateClass, RateSpec,
};
use subgeo::finite_chain::{first_passage_solve, stationary, tv_curve, FiniteKernel, MomentOptions};
use subgeo::interpolation::{conjugate_power_pair, power_pair, validate_pair, young_pair_from_density, YoungPair};
use subgeo::models::{
    brt_certificate, brt_kernel, nar_certificate, nar_fixture_spec, rwm_certificate, rwm_fixture_spec,
    sur_certificate, sur_fixture_spec, BrtCertificate, BrtRegime, BrtSampler, BrtSpec, KernelSampler, NAR_FIXTURE,
    RWM_FIXTURE, SUR_FIXTURE,
};
use subgeo::rate::{key_inequality_check, r_phi, PhiSpec};
use subgeo::real::{log_grid, ols_slope};

const POLY_SLOPE_REL: f64 = 0.01;
const SUBEXP_RATIO_REL: f64 = 0.02;
const KEY_INEQ_TOL: f64 = 1e-9;
const SEQUENCE_TOL: f64 = 1e-9;
const KAC_TOL: f64 = 1e-8;
const KAC_MEAN_TOL: f64 = 1e-10;
const PAIR_REL: f64 = 1e-12;
const SIGMAS: f64 = 3.0;
const MC_FLOAT_REL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn poly2() -> BrtSpec<f64> {
    BrtSpec::new(BrtRegime::Polynomial { theta: 2.0 }, 2000).expect("fixture spec")
}

fn poly2_certificate() -> (FiniteKernel<f64>, BrtCertificate<f64>) {
    let spec = poly2();
    (brt_kernel(&spec).expect("kernel"), brt_certificate(&spec, 0.5).expect("certificate"))
}

fn c1_polynomial() -> Verdict {
    let ns: Vec<f64> = log_grid(1e3, 1e5, 41);
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let phi = PhiSpec::power(1.0, alpha).unwrap();
        let ys: Vec<f64> = ns.iter().map(|&n| r_phi(&phi, n).unwrap().ln()).collect();
        let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
        let slope = ols_slope(&xs, &ys).unwrap();
        let target = alpha / (1.0 - alpha);
        let rel = (slope / target - 1.0).abs();
        worst = worst.max(rel);
        parts.push(format!("a={alpha}: {slope:.5} vs {target:.5}"));
    }
    verdict(worst <= POLY_SLOPE_REL, format!("{}; worst rel err {worst:.2e} <= {POLY_SLOPE_REL}", parts.join(", ")))
}

fn c2_subexponential() -> Verdict {
    let phi = PhiSpec::sub_exponential(1.0, 1.0, None).unwrap();
    let ratios: Vec<f64> = log_grid(1e3_f64, 1e5, 41)
        .into_iter()
        .map(|n| (r_phi(&phi, n).unwrap().ln() + 0.5 * n.ln() - (2.0 * n).sqrt()).exp())
        .collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let spread = hi / lo - 1.0;
    verdict(
        spread <= SUBEXP_RATIO_REL,
        format!("ratio in [{lo:.5}, {hi:.5}], spread {spread:.2e} <= {SUBEXP_RATIO_REL}"),
    )
}

fn c3_key_inequality() -> Verdict {
    let grid = log_grid(1.0, 1e6, 400);
    let families = [
        PhiSpec::power(1.0, 0.5).unwrap(),
        PhiSpec::logarithmic(1.0, 1.0).unwrap(),
        PhiSpec::sub_exponential(1.0, 1.0, None).unwrap(),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for phi in &families {
        match key_inequality_check(phi, &grid, 100) {
            Ok(r) => {
                ok &= r.holds_within(KEY_INEQ_TOL) && r.points_skipped == 0;
                parts.push(format!("{phi}: {:.1e} ({} skipped)", r.max_violation, r.points_skipped));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{phi}: error {e}"));
            }
        }
    }
    verdict(ok, format!("max violation <= {KEY_INEQ_TOL}: {}", parts.join("; ")))
}

fn c4_sequence() -> Verdict {
    let (k, cert) = poly2_certificate();
    let k_max = 50;
    let guard = poly2().truncation - k_max - 1;
    let r = verify_drift_sequence(&k, &cert.v, &cert.phi, &cert.c, cert.b, k_max as u64, Some(guard)).unwrap();
    verdict(
        cert.certificate.is_valid() && r.max_violation <= SEQUENCE_TOL && r.k_checked == k_max as u64,
        format!(
            "grid certificate valid: {}; max violation {:.3e} at (k, x) = {:?} over k <= {}, x < {guard}",
            cert.certificate.is_valid(),
            r.max_violation,
            r.worst,
            r.k_checked
        ),
    )
}

fn c5_moments() -> Verdict {
    let (k, cert) = poly2_certificate();
    let pair = power_pair(0.5).unwrap();
    let m = verify_moment_bounds(&k, &cert.v, &cert.phi, &cert.c, cert.b, Some(&pair), MomentOptions::default())
        .unwrap();
    let pair_slack = m.pair_moment.as_ref().unwrap().min_slack;
    let rates = subgeo::rate::RateFunction::tabulate(cert.phi.clone(), 5000).unwrap().table();
    let in_c: Vec<bool> = (0..k.n()).map(|x| cert.c.contains(&x)).collect();
    let mut mc_ok = true;
    let mut mc_parts = Vec::new();
    for (i, x0) in [0usize, 10, 100, 500].into_iter().enumerate() {
        let mc = mc_return_moment(
            &KernelSampler { kernel: &k },
            x0,
            &|x: &usize| in_c[*x],
            &|j: usize| rates[j],
            &|_: &usize| 1.0,
            McOptions::new(10_000, 100 + i as u64),
        )
        .unwrap();
        let exact = m.rate_moment.lhs[x0];
        // Float slack covers states whose return time is deterministic.
        let diff = ((mc.estimate - exact).abs() - MC_FLOAT_REL * exact.abs()).max(0.0);
        let z = if diff == 0.0 {
            0.0
        } else if mc.std_err > 0.0 {
            diff / mc.std_err
        } else {
            f64::INFINITY
        };
        mc_ok &= z <= SIGMAS;
        mc_parts.push(format!("x={x0}: {z:.2}sd"));
    }
    verdict(
        m.holds() && mc_ok,
        format!(
            "min slacks phi {:.4}, rate {:.4}, pair {:.4}; mc vs series {}",
            m.phi_moment.min_slack,
            m.rate_moment.min_slack,
            pair_slack,
            mc_parts.join(", ")
        ),
    )
}

fn c6_tv() -> Verdict {
    let spec = poly2();
    let k = brt_kernel(&spec).unwrap();
    let n_max = 4000;
    let d = tv_curve(&k, 0, &vec![1.0; k.n()], n_max).unwrap();
    let opts = DiagnosticOptions {
        truncation_error: Some(brt_truncation_error(&spec, 0, n_max).unwrap()),
        ..DiagnosticOptions::default()
    };
    let diag = |beta: f64| {
        let r = RateSpec::Power { beta }.table(n_max).unwrap();
        rate_diagnostic(&d, &r, &opts).unwrap()
    };
    let (a, b) = (diag(1.5), diag(2.5));
    verdict(
        a.class == RateClass::Vanishing && b.class == RateClass::Diverging,
        format!(
            "n^1.5: {} (slope {:.3}), n^2.5: {} (slope {:.3}), window {:?}, truncation cap {:?}",
            a.class, a.slope, b.class, b.slope, a.window, a.truncation_cap
        ),
    )
}

fn c7_return_moments() -> Verdict {
    let spec = BrtSpec::new(BrtRegime::SubExp { theta: 1.0, beta: 0.5 }, 2000).unwrap();
    let s = BrtSampler::new(spec.clone()).unwrap();
    let run = |a: f64, seed: u64| {
        mc_return_moment(&s, 0, &|x: &usize| *x == 0, &|k: usize| (a * (k as f64).sqrt()).exp(), &|_: &usize| 1.0, McOptions::new(10_000, seed))
            .unwrap()
    };
    // Σ_k r(k) P_0(τ_0 > k) with P_0(τ_0 > k) = ∏_{j<k} p_j.
    let mut exact = 0.0;
    let mut tail = 1.0;
    for k in 0..200_000usize {
        exact += (0.5 * (k as f64).sqrt()).exp() * tail;
        tail *= spec.p(k).unwrap();
    }
    let (m1, m2) = (run(0.5, 1), run(0.5, 2));
    let gap = (m1.estimate - m2.estimate).abs() / (m1.std_err.powi(2) + m2.std_err.powi(2)).sqrt();
    let z = (m1.estimate - exact).abs() / m1.std_err;
    let low_ok = !m1.blow_up && !m2.blow_up && m1.estimate.is_finite() && gap <= SIGMAS && z <= SIGMAS;
    let hi = run(1.5, 1);
    verdict(
        low_ok && hi.blow_up,
        format!(
            "a=0.5: {:.3} +- {:.3} and {:.3} +- {:.3} (seed gap {gap:.2}sd, exact {exact:.3} at {z:.2}sd, tail index {:.2}); a=1.5: blow-up {} ({})",
            m1.estimate,
            m1.std_err,
            m2.estimate,
            m2.std_err,
            m1.hill_index.unwrap_or(f64::NAN),
            hi.blow_up,
            hi.warning.clone().unwrap_or_default()
        ),
    )
}

fn kac_defect(k: &FiniteKernel<f64>) -> f64 {
    let pi = stationary(k).unwrap();
    (0..k.n())
        .map(|x| (pi[x] * first_passage_solve(k, &[x]).unwrap()[x] - 1.0).abs())
        .fold(0.0, f64::max)
}

fn c8_kac() -> Verdict {
    let half = brt_kernel(&BrtSpec::new(BrtRegime::Constant { p: 0.5 }, 60).unwrap()).unwrap();
    let poly = brt_kernel(&poly2()).unwrap();
    let (dh, dp) = (kac_defect(&half), kac_defect(&poly));
    let e0 = first_passage_solve(&half, &[0]).unwrap()[0];
    verdict(
        dh <= KAC_TOL && dp <= KAC_TOL && (e0 - 3.0).abs() <= KAC_MEAN_TOL,
        format!("max |pi(x) E_x tau_x - 1|: p=1/2 {dh:.1e}, theta=2 {dp:.1e}; E_0 tau_0 = {e0:.15}"),
    )
}

fn c9_pairs() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pts: Vec<(f64, f64)> = (0..10_000)
        .map(|i| {
            if i % 2 == 0 {
                (rng.gen_range(1.0..1e8), rng.gen_range(1.0..1e8))
            } else {
                (10f64.powf(rng.gen_range(0.0..8.0)), 10f64.powf(rng.gen_range(0.0..8.0)))
            }
        })
        .collect();
    let mut pairs: Vec<(String, YoungPair<f64>)> = Vec::new();
    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
        pairs.push((format!("power({p})"), power_pair(p).unwrap()));
    }
    for p in [1.5, 2.0, 3.0] {
        pairs.push((format!("conjugate({p})"), conjugate_power_pair(p).unwrap()));
    }
    pairs.push(("density(t^3)".into(), young_pair_from_density("t^3", |t: f64| t * t * t).unwrap()));
    let mut worst = f64::NEG_INFINITY;
    let mut worst_name = String::new();
    for (name, pair) in &pairs {
        let v = validate_pair(pair, &pts);
        if v.max_ratio > worst || v.max_ratio.is_nan() {
            worst = v.max_ratio;
            worst_name = name.clone();
        }
    }
    verdict(
        worst <= 1.0 + PAIR_REL,
        format!("{} pairs, max psi1(x) psi2(y)/(x+y) = {worst:.15} ({worst_name}) <= 1 + {PAIR_REL}", pairs.len()),
    )
}

fn c10_continuous() -> Verdict {
    let (rs, ns, ss) = (rwm_fixture_spec(), nar_fixture_spec(), sur_fixture_spec());
    let base = [
        rwm_certificate(&rs, RWM_FIXTURE).unwrap().is_valid(),
        nar_certificate(&ns, NAR_FIXTURE).unwrap().is_valid(),
        sur_certificate(&ss, SUR_FIXTURE).unwrap().is_valid(),
    ];
    let doubled = [
        rwm_certificate(&rs, RWM_FIXTURE.with_z(2.0 * RWM_FIXTURE.z)).unwrap().is_valid(),
        nar_certificate(&ns, NAR_FIXTURE.with_z(2.0 * NAR_FIXTURE.z)).unwrap().is_valid(),
        sur_certificate(&ss, SUR_FIXTURE.with_z(2.0 * SUR_FIXTURE.z)).unwrap().is_valid(),
    ];
    verdict(
        base.iter().all(|v| *v) && doubled.iter().any(|v| !v),
        format!("fixtures valid (rwm, nar, sur) = {base:?}; with doubled z = {doubled:?}"),
    )
}

fn run_verify(dir: &Path, name: &str, extra: &str) -> (i32, String) {
    let cfg = dir.join(format!("{name}.toml"));
    let text = format!(
        "[model]\nmodel = \"brt\"\nregime = {{ kind = \"polynomial\", theta = 2.0 }}\ntruncation = 2000\n\n[certificate]\ngamma = 0.5\n{extra}"
    );
    std::fs::write(&cfg, text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_subgeo"))
        .arg("verify")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(name))
        .output()
        .expect("run subgeo");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn c11_falsification() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let (base, _) = run_verify(dir.path(), "base", "");
    let (halved, h_out) = run_verify(dir.path(), "halved", "b_scale = 0.5\n");
    let (_, cert) = poly2_certificate();
    let state = 1000;
    let off_c = !cert.c.contains(&state);
    let (perturbed, p_out) = run_verify(dir.path(), "perturbed", &format!("perturb_v = {{ state = {state}, factor = 0.5 }}\n"));
    let reported = h_out.contains("VIOLATED") && p_out.contains("VIOLATED");
    verdict(
        base == 0 && halved == 1 && perturbed == 1 && off_c && reported,
        format!("exit codes: fixture {base}, b halved {halved}, V(1000) halved {perturbed} (state off C: {off_c})"),
    )
}

fn main() {
    type Check = fn() -> Verdict;
    let criteria: [(&str, Check, u64); 11] = [
        ("polynomial rate law", c1_polynomial, 1),
        ("subexponential rate law", c2_subexponential, 5),
        ("key inequality", c3_key_inequality, 10),
        ("drift sequence", c4_sequence, 30),
        ("moment bounds", c5_moments, 120),
        ("tv rate optimality", c6_tv, 120),
        ("return-time moments", c7_return_moments, 120),
        ("kac consistency", c8_kac, 10),
        ("young pairs", c9_pairs, 5),
        ("continuous certificates", c10_continuous, 300),
        ("falsification controls", c11_falsification, 30),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = check();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(*budget);
        let pass = v.pass && in_time;
        println!(
            "criterion {:>2} {} {name}: {} [{:.2}s, budget {budget}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            dt.as_secs_f64()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
