//! The four commands. Each writes CSV into the output directory and
//! returns an [`Outcome`](crate::Outcome).

mod rate;
mod tradeoff;
mod tv;
mod verify;

use subgeo::finite_chain::{parse_kernel, FiniteKernel};
use subgeo::models::{brt_kernel, BrtSpec, ModelSpec};

use crate::output::RunContext;
use crate::CliError;

pub use rate::cmd_rate;
pub use tradeoff::cmd_tradeoff;
pub use tv::cmd_tv;
pub use verify::cmd_verify;

/// A finite kernel from a BRT model or a kernel file.
pub(crate) enum FiniteSource {
    Brt(BrtSpec<f64>, FiniteKernel<f64>),
    File(FiniteKernel<f64>),
}

impl FiniteSource {
    pub fn kernel(&self) -> &FiniteKernel<f64> {
        match self {
            Self::Brt(_, k) | Self::File(k) => k,
        }
    }
}

pub(crate) fn finite_source(
    model: Option<&ModelSpec<f64>>,
    kernel: Option<&std::path::Path>,
    ctx: &RunContext,
) -> Result<FiniteSource, CliError> {
    match (model, kernel) {
        (Some(_), Some(_)) => Err(CliError::config("give either model or kernel, not both")),
        (None, None) => Err(CliError::config("config needs a model or a kernel file")),
        (Some(ModelSpec::Brt(spec)), None) => {
            spec.validate().map_err(CliError::config)?;
            let k = brt_kernel(spec).map_err(CliError::config)?;
            Ok(FiniteSource::Brt(spec.clone(), k))
        }
        (Some(_), None) => Err(CliError::config("only the brt model has a finite kernel")),
        (None, Some(path)) => {
            let path = ctx.resolve(path);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            Ok(FiniteSource::File(parse_kernel(&text).map_err(CliError::config)?))
        }
    }
}
