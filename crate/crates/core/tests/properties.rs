use proptest::prelude::*;

use subgeo::drift::{verify_drift, FinitePv, SetSpec};
use subgeo::empirical::{mc_return_moment, rate_diagnostic, DiagnosticOptions, McOptions, RateClass};
use subgeo::finite_chain::{
    f_norm, first_passage_solve, modulated_moment, stationary, stationary_residual, taboo_tail_all,
    FiniteKernel, MomentOptions,
};
use subgeo::interpolation::{power_pair, validate_pair};
use subgeo::models::{brt_certificate, brt_kernel, BrtRegime, BrtSpec, KernelSampler};
use subgeo::rate::{h_phi, h_phi_inv, r_phi, PhiSpec};

fn kernel_from(weights: &[Vec<f64>]) -> FiniteKernel<f64> {
    let rows: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| {
            let s: f64 = w.iter().sum();
            w.iter().map(|v| v / s).collect()
        })
        .collect();
    FiniteKernel::from_dense(&rows).unwrap()
}

fn dense_kernel() -> impl Strategy<Value = FiniteKernel<f64>> {
    (2usize..7).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(0.05f64..1.0, n), n).prop_map(|w| kernel_from(&w))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn f_norm_is_a_norm(
        a in prop::collection::vec(-5.0f64..5.0, 6),
        b in prop::collection::vec(-5.0f64..5.0, 6),
        f in prop::collection::vec(1.0f64..10.0, 6),
        s in -4.0f64..4.0,
    ) {
        let na = f_norm(&a, &f).unwrap();
        let nb = f_norm(&b, &f).unwrap();
        let sa: Vec<f64> = a.iter().map(|v| s * v).collect();
        prop_assert!((f_norm(&sa, &f).unwrap() - s.abs() * na).abs() <= 1e-12 * (1.0 + na));
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(f_norm(&ab, &f).unwrap() <= na + nb + 1e-12);
    }

    #[test]
    fn stationary_is_invariant(p in dense_kernel()) {
        let pi = stationary(&p).unwrap();
        prop_assert!(stationary_residual(&p, &pi) <= 1e-12);
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn taboo_tail_nonincreasing(p in dense_kernel(), n in 1usize..30) {
        let a = taboo_tail_all(&p, &[0], n).unwrap();
        let b = taboo_tail_all(&p, &[0], n + 1).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| *y <= *x + 1e-15));
    }

    #[test]
    fn unit_moment_is_first_passage(p in dense_kernel()) {
        let one = vec![1.0; p.n()];
        let want = first_passage_solve(&p, &[0]).unwrap();
        for x in 0..p.n() {
            let m = modulated_moment(&p, &[0], x, &|_| 1.0, &one, MomentOptions::default()).unwrap();
            prop_assert!((m.value - want[x]).abs() <= 1e-8 * want[x], "x={} {} vs {}", x, m.value, want[x]);
        }
    }

    #[test]
    fn h_phi_round_trip(alpha in 0.1f64..0.9, v in 1.5f64..1e6) {
        let phi = PhiSpec::power(1.0, alpha).unwrap();
        let z = h_phi(&phi, v).unwrap();
        prop_assert!((h_phi_inv(&phi, z).unwrap() - v).abs() <= 1e-8 * v);
        prop_assert!(r_phi(&phi, z + 1.0).unwrap() >= r_phi(&phi, z).unwrap());
    }

    #[test]
    fn power_pairs_satisfy_young(p in 0.0f64..1.0, pts in prop::collection::vec((0.01f64..1e4, 0.01f64..1e4), 20)) {
        let pair = power_pair(p).unwrap();
        let r = validate_pair(&pair, &pts);
        prop_assert!(r.passes && r.max_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn diagnostic_classes_follow_rate_exponent(theta in 0.5f64..2.0, gap in 0.3f64..1.0) {
        let d: Vec<f64> = (0..=2000).map(|n| (1.0 + n as f64).powf(-theta)).collect();
        let rate = |b: f64| -> Vec<f64> { (0..=2000).map(|n| (1.0 + n as f64).powf(b)).collect() };
        let opts = DiagnosticOptions::default();
        prop_assert_eq!(rate_diagnostic(&d, &rate(theta - gap), &opts).unwrap().class, RateClass::Vanishing);
        prop_assert_eq!(rate_diagnostic(&d, &rate(theta), &opts).unwrap().class, RateClass::Bounded);
        prop_assert_eq!(rate_diagnostic(&d, &rate(theta + gap), &opts).unwrap().class, RateClass::Diverging);
    }
}

fn poly_spec() -> BrtSpec<f64> {
    BrtSpec::new(BrtRegime::Polynomial { theta: 2.0 }, 400).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn enlarging_b_keeps_certificates(extra in 0.0f64..100.0) {
        let spec = poly_spec();
        let k = brt_kernel(&spec).unwrap();
        let cert = brt_certificate(&spec, 0.5).unwrap();
        prop_assert!(cert.certificate.is_valid());
        let v = cert.v.clone();
        let grid: Vec<usize> = (0..k.n()).collect();
        let set = SetSpec::Explicit { members: cert.c.clone() };
        let again = verify_drift(&FinitePv { kernel: &k }, &|x: &usize| v[*x], &cert.phi, &set, &grid, Some(cert.b + extra))
            .unwrap();
        prop_assert!(again.is_valid());
    }
}

#[test]
fn monte_carlo_return_time_matches_linear_solve() {
    let k = brt_kernel(&BrtSpec::new(BrtRegime::Constant { p: 0.5_f64 }, 60).unwrap()).unwrap();
    let exact = first_passage_solve(&k, &[0]).unwrap();
    for seed in [1, 2, 3] {
        let m = mc_return_moment(
            &KernelSampler { kernel: &k },
            4,
            &|x: &usize| *x == 0,
            &|_| 1.0,
            &|_: &usize| 1.0,
            McOptions::new(20_000, seed),
        )
        .unwrap();
        assert!(!m.blow_up);
        assert!((m.estimate - exact[4]).abs() <= 4.0 * m.std_err, "seed {seed}: {} vs {}", m.estimate, exact[4]);
    }
}

#[test]
fn polynomial_brt_heavy_rate_diverges() {
    let spec = BrtSpec::new(BrtRegime::Polynomial { theta: 2.0 }, 2000).unwrap();
    let k = brt_kernel(&spec).unwrap();
    let one = vec![1.0; k.n()];
    let opts = MomentOptions { horizon: 3000, ..MomentOptions::default() };
    let heavy = modulated_moment(&k, &[0], 0, &|n| (n as f64).powf(2.5), &one, opts).unwrap();
    assert!(heavy.divergent);
    let light = modulated_moment(&k, &[0], 0, &|n| (n as f64).powf(1.5), &one, opts).unwrap();
    assert!(!light.divergent && light.value.is_finite());
}
