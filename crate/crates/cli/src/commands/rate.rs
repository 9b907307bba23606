use std::io::Write;

use subgeo::rate::{asymptotic_rate, classify_regime, PhiSpec, RateFunction, Regime};

use crate::config::RateConfig;
use crate::output::{num, RunContext};
use crate::{CliError, Outcome};

pub fn cmd_rate(cfg: &RateConfig, ctx: &RunContext) -> Result<Outcome, CliError> {
    let phi = PhiSpec::<f64>::from_config(&cfg.phi()).map_err(CliError::config)?;
    if let Regime::Geometric { limit } = classify_regime(&phi).map_err(CliError::config)? {
        return Err(CliError::config(format!(
            "phi is in the geometric regime (lim phi' = {limit}); r_phi is only defined for subgeometric phi"
        )));
    }
    let table = RateFunction::tabulate(phi.clone(), cfg.n_max).map_err(CliError::config)?.table();
    let descriptor = asymptotic_rate(&phi).map_or_else(|| "none".to_string(), |a| a.to_string());
    ctx.write_with("rate.csv", |out| {
        writeln!(out, "# phi: {phi}")?;
        writeln!(out, "# asymptotic: {descriptor}")?;
        writeln!(out, "n,r_phi,log_r_over_n")?;
        for (n, r) in table.iter().enumerate() {
            let ratio = if n == 0 { String::new() } else { num(r.ln() / n as f64) };
            writeln!(out, "{n},{},{ratio}", num(*r))?;
        }
        Ok(())
    })?;
    Ok(Outcome {
        code: 0,
        summary: format!("{} rows of r_phi for {phi}; asymptotic {descriptor}", table.len()),
        files: vec!["rate.csv".into()],
    })
}
