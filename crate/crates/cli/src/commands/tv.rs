use std::io::Write;

use subgeo::empirical::{brt_truncation_error, rate_diagnostic, DiagnosticOptions};
use subgeo::finite_chain::{tv_curve, ChainError};

use crate::commands::{finite_source, FiniteSource};
use crate::config::TvConfig;
use crate::output::{num, RunContext};
use crate::{CliError, Outcome, EXIT_CHECK_FAILED};

pub fn cmd_tv(cfg: &TvConfig, ctx: &RunContext) -> Result<Outcome, CliError> {
    let src = finite_source(cfg.model.as_ref(), cfg.kernel.as_deref(), ctx)?;
    let k = src.kernel();
    let f = match &cfg.f {
        Some(f) => f.clone(),
        None => vec![1.0; k.n()],
    };
    let d = match tv_curve(k, cfg.x0, &f, cfg.n_max) {
        Ok(d) => d,
        Err(e @ (ChainError::Periodic { .. } | ChainError::Reducible { .. })) => {
            return Ok(Outcome {
                code: EXIT_CHECK_FAILED,
                summary: format!("kernel is not ergodic: {e}"),
                files: Vec::new(),
            })
        }
        Err(e) => return Err(CliError::config(e)),
    };
    let diag = match &cfg.rate {
        None => None,
        Some(rs) => {
            let r = rs.table(cfg.n_max).map_err(CliError::config)?;
            let err = match &src {
                FiniteSource::Brt(spec, _) => {
                    Some(brt_truncation_error(spec, cfg.x0, cfg.n_max).map_err(CliError::config)?)
                }
                FiniteSource::File(_) => None,
            };
            let opts = DiagnosticOptions {
                truncation_error: err,
                ..DiagnosticOptions::default()
            };
            let g = rate_diagnostic(&d, &r, &opts).map_err(CliError::config)?;
            Some((r, g))
        }
    };
    ctx.write_with("tv.csv", |out| {
        match &diag {
            None => {
                writeln!(out, "n,d_n")?;
                for (n, v) in d.iter().enumerate() {
                    writeln!(out, "{n},{}", num(*v))?;
                }
            }
            Some((r, g)) => {
                writeln!(out, "n,d_n,r_n,product")?;
                for (n, v) in d.iter().enumerate() {
                    writeln!(out, "{n},{},{},{}", num(*v), num(r[n]), num(g.products[n]))?;
                }
                writeln!(
                    out,
                    "# diagnostic: {} slope={} window=[{},{}] truncation_cap={}",
                    g.class,
                    num(g.slope),
                    g.window.0,
                    g.window.1,
                    g.truncation_cap.map_or_else(|| "none".into(), |c| c.to_string())
                )?;
            }
        }
        Ok(())
    })?;
    let summary = match &diag {
        None => format!("tv curve to n = {}: d(n_max) = {:e}", cfg.n_max, d[cfg.n_max]),
        Some((_, g)) => format!(
            "diagnostic: {} (slope {:.4} over n in [{}, {}])",
            g.class, g.slope, g.window.0, g.window.1
        ),
    };
    Ok(Outcome {
        code: 0,
        summary,
        files: vec!["tv.csv".into()],
    })
}
