use subgeo::interpolation::{tradeoff_table, InterpolationError, YoungPair};
use subgeo::rate::PhiSpec;

use crate::config::TradeoffConfig;
use crate::output::RunContext;
use crate::{CliError, Outcome, EXIT_CHECK_FAILED};

pub fn cmd_tradeoff(cfg: &TradeoffConfig, ctx: &RunContext) -> Result<Outcome, CliError> {
    if cfg.pairs.is_empty() {
        return Err(CliError::config("pairs list is empty"));
    }
    let phi = PhiSpec::<f64>::from_config(&cfg.phi).map_err(CliError::config)?;
    let pairs = cfg
        .pairs
        .iter()
        .map(YoungPair::from_config)
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::config)?;
    let table = match tradeoff_table(&phi, &pairs) {
        Ok(t) => t,
        Err(InterpolationError::Regime(msg)) => {
            return Ok(Outcome {
                code: EXIT_CHECK_FAILED,
                summary: msg,
                files: Vec::new(),
            })
        }
        Err(e) => return Err(CliError::config(e)),
    };
    ctx.write_with("tradeoff.csv", |out| table.write_csv(out))?;
    let lines: Vec<String> = table
        .rows
        .iter()
        .map(|r| {
            let rate = r.rate.map(|g| g.display("n").to_string()).unwrap_or_else(|| "?".into());
            let norm = r.norm.map(|g| g.display("v").to_string()).unwrap_or_else(|| "?".into());
            format!("pair {}: rate {rate}, weight {norm}", r.pair_id)
        })
        .collect();
    Ok(Outcome {
        code: 0,
        summary: lines.join("\n"),
        files: vec!["tradeoff.csv".into()],
    })
}
