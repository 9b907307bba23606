use std::fmt::Write as _;

use subgeo::drift::{
    verify_drift, verify_drift_sequence, verify_moment_bounds, DriftCertificate, FinitePv, SetSpec, VRecord,
};
use subgeo::empirical::{mc_return_moment, McOptions};
use subgeo::finite_chain::MomentOptions;
use subgeo::interpolation::YoungPair;
use subgeo::models::{
    brt_certificate, nar_certificate, rwm_certificate, sur_certificate, KernelSampler, ModelSpec, NAR_FIXTURE,
    RWM_FIXTURE, SUR_FIXTURE,
};
use subgeo::rate::{PhiSpec, RateFunction};

use crate::commands::{finite_source, FiniteSource};
use crate::config::{CertificateSection, VerifyConfig};
use crate::output::RunContext;
use crate::{CliError, Outcome, EXIT_CHECK_FAILED};

/// Relative slack for replicas with zero spread.
const MC_FLOAT_SLACK: f64 = 1e-9;

struct FiniteCert {
    phi: PhiSpec<f64>,
    v: Vec<f64>,
    members: Vec<usize>,
    b: f64,
}

fn explicit_cert(sec: &CertificateSection, n: usize) -> Result<FiniteCert, CliError> {
    let (Some(phi), Some(v), Some(c), Some(b)) = (&sec.phi, &sec.v, &sec.c, sec.b) else {
        return Err(CliError::config("certificate needs phi, v, c and b (or gamma for a brt model)"));
    };
    let phi = PhiSpec::from_config(phi).map_err(CliError::config)?;
    let v = match v {
        VRecord::Tabulated { values } => values.clone(),
        VRecord::Named { name, .. } => {
            return Err(CliError::config(format!("named V '{name}' is not available for finite kernels")))
        }
    };
    if v.len() != n {
        return Err(CliError::config(format!("v has {} values for {n} states", v.len())));
    }
    let members = (0..n).filter(|x| c.contains(x, v[*x])).collect();
    Ok(FiniteCert { phi, v, members, b })
}

fn finite_cert(cfg: &VerifyConfig, src: &FiniteSource) -> Result<FiniteCert, CliError> {
    let sec = &cfg.certificate;
    match (src, sec.gamma) {
        (FiniteSource::Brt(spec, _), Some(gamma)) => {
            if sec.phi.is_some() || sec.v.is_some() || sec.c.is_some() {
                return Err(CliError::config("give either gamma or an explicit phi/v/c, not both"));
            }
            let bc = brt_certificate(spec, gamma).map_err(CliError::config)?;
            Ok(FiniteCert {
                phi: bc.phi,
                v: bc.v,
                members: bc.c,
                b: sec.b.unwrap_or(bc.b),
            })
        }
        (FiniteSource::File(_), Some(_)) => Err(CliError::config("gamma applies to brt models only")),
        (_, None) => explicit_cert(sec, src.kernel().n()),
    }
}

fn slack_line(cert: &DriftCertificate<usize, f64>, out: &mut String) {
    let r = &cert.report;
    let _ = writeln!(out, "phi: {}", cert.phi);
    let _ = writeln!(out, "b: {:e} (minimal on C: {:e})", cert.b, r.minimal_b_on_c);
    let _ = writeln!(
        out,
        "max violation off C: {:e} at {:?}; {} states, {} skipped",
        r.max_violation_off_c, r.worst_off_c, r.grid_points, r.skipped_infinite
    );
}

pub fn cmd_verify(cfg: &VerifyConfig, seed: u64, ctx: &RunContext) -> Result<Outcome, CliError> {
    if let Some(m @ (ModelSpec::Rwm(_) | ModelSpec::Nar(_) | ModelSpec::Sur(_))) = &cfg.model {
        if cfg.kernel.is_some() {
            return Err(CliError::config("give either model or kernel, not both"));
        }
        return verify_continuous(m, &cfg.certificate, ctx);
    }
    let src = finite_source(cfg.model.as_ref(), cfg.kernel.as_deref(), ctx)?;
    let k = src.kernel();
    let mut fc = finite_cert(cfg, &src)?;
    let sec = &cfg.certificate;
    if let Some(s) = sec.b_scale {
        if !(s >= 0.0) {
            return Err(CliError::config(format!("b_scale must be >= 0, got {s}")));
        }
        fc.b *= s;
    }
    if let Some(p) = sec.perturb_v {
        if p.state >= fc.v.len() || !(p.factor > 0.0) {
            return Err(CliError::config(format!("bad perturbation {p:?}")));
        }
        fc.v[p.state] = (fc.v[p.state] * p.factor).max(1.0);
    }
    let grid: Vec<usize> = (0..k.n()).collect();
    let set = SetSpec::Explicit {
        members: fc.members.clone(),
    };
    let v = fc.v.clone();
    let cert = verify_drift(&FinitePv { kernel: k }, &move |x: &usize| v[*x], &fc.phi, &set, &grid, Some(fc.b))
        .map_err(CliError::config)?;
    let mut report = String::new();
    slack_line(&cert, &mut report);
    let _ = writeln!(report, "C: {} states", fc.members.len());
    let mut ok = cert.is_valid();
    let _ = writeln!(report, "drift: {}", if ok { "valid" } else { "VIOLATED" });

    let checks = &cfg.checks;
    if checks.sequence {
        let guard = checks.guard.or(match &src {
            FiniteSource::Brt(spec, _) => Some(spec.truncation.saturating_sub(checks.k_max as usize + 1)),
            FiniteSource::File(_) => None,
        });
        let s = verify_drift_sequence(k, &fc.v, &fc.phi, &fc.members, fc.b, checks.k_max, guard)
            .map_err(CliError::config)?;
        ok &= s.holds();
        let _ = writeln!(
            report,
            "sequence: {} max violation {:e} at (k, x) = {:?}, k checked {}{}",
            if s.holds() { "holds" } else { "VIOLATED" },
            s.max_violation,
            s.worst,
            s.k_checked,
            if s.overflowed { " (overflow cut)" } else { "" }
        );
    }
    if checks.moments {
        let pair = checks
            .pair
            .as_ref()
            .map(YoungPair::from_config)
            .transpose()
            .map_err(CliError::config)?;
        let m = verify_moment_bounds(k, &fc.v, &fc.phi, &fc.members, fc.b, pair.as_ref(), MomentOptions::default())
            .map_err(CliError::config)?;
        ok &= m.holds();
        let _ = writeln!(
            report,
            "moments: {} slacks phi {:e} rate {:e} pair {}",
            if m.holds() { "hold" } else { "VIOLATED" },
            m.phi_moment.min_slack,
            m.rate_moment.min_slack,
            m.pair_moment.as_ref().map_or_else(|| "-".into(), |p| format!("{:e}", p.min_slack))
        );
        if let Some(reps) = checks.mc_replicas {
            let x0 = checks.mc_state;
            if x0 >= k.n() {
                return Err(CliError::config(format!("mc_state {x0} out of range")));
            }
            let horizon = MomentOptions::<f64>::default().horizon;
            let rf = RateFunction::tabulate(fc.phi.clone(), horizon).map_err(CliError::config)?;
            let table = rf.table();
            let r = |j: usize| table.get(j).copied().unwrap_or_else(|| rf.eval(j as f64).unwrap_or(f64::INFINITY));
            let in_c: Vec<bool> = (0..k.n()).map(|x| fc.members.contains(&x)).collect();
            let mc = mc_return_moment(
                &KernelSampler { kernel: k },
                x0,
                &|x: &usize| in_c[*x],
                &r,
                &|_: &usize| 1.0,
                McOptions::new(reps, seed),
            )
            .map_err(CliError::config)?;
            let exact = m.rate_moment.lhs[x0];
            let agree = (mc.estimate - exact).abs() <= 3.0 * mc.std_err + MC_FLOAT_SLACK * exact.abs();
            ok &= agree;
            let _ = writeln!(
                report,
                "monte carlo at {x0}: {:e} +- {:e} vs series {:e}: {}",
                mc.estimate,
                mc.std_err,
                exact,
                if agree { "agree" } else { "DISAGREE" }
            );
        }
    }
    ctx.write_with("verify_slack.csv", |out| cert.write_csv(out))?;
    ctx.write("verify_report.txt", report.as_bytes())?;
    Ok(Outcome {
        code: if ok { 0 } else { EXIT_CHECK_FAILED },
        summary: report.trim_end().to_string(),
        files: vec!["verify_slack.csv".into(), "verify_report.txt".into()],
    })
}

fn verify_continuous(model: &ModelSpec<f64>, sec: &CertificateSection, ctx: &RunContext) -> Result<Outcome, CliError> {
    if sec.phi.is_some() || sec.v.is_some() || sec.c.is_some() || sec.gamma.is_some() || sec.perturb_v.is_some() {
        return Err(CliError::config("continuous models take only certificate.fixture"));
    }
    let cert = match model {
        ModelSpec::Rwm(s) => rwm_certificate(s, sec.fixture.unwrap_or(RWM_FIXTURE)),
        ModelSpec::Nar(s) => nar_certificate(s, sec.fixture.unwrap_or(NAR_FIXTURE)),
        ModelSpec::Sur(s) => sur_certificate(s, sec.fixture.unwrap_or(SUR_FIXTURE)),
        ModelSpec::Brt(_) => unreachable!("finite models take the other path"),
    }
    .map_err(CliError::config)?;
    let r = &cert.report;
    let mut report = String::new();
    let _ = writeln!(report, "phi: {}", cert.phi);
    let _ = writeln!(report, "minimal b on C: {:e}", r.minimal_b_on_c);
    let _ = writeln!(
        report,
        "max violation off C: {:e} at {:?}; {} grid points, {} skipped",
        r.max_violation_off_c, r.worst_off_c, r.grid_points, r.skipped_infinite
    );
    let _ = writeln!(report, "drift: {}", if cert.is_valid() { "valid" } else { "VIOLATED" });
    ctx.write_with("verify_slack.csv", |out| cert.write_csv(out))?;
    ctx.write("verify_report.txt", report.as_bytes())?;
    Ok(Outcome {
        code: if cert.is_valid() { 0 } else { EXIT_CHECK_FAILED },
        summary: report.trim_end().to_string(),
        files: vec!["verify_slack.csv".into(), "verify_report.txt".into()],
    })
}
