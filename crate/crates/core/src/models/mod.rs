//! Worked example chains: backward recurrence time, random-walk Metropolis,
//! nonlinear autoregression and stochastic unit root.

mod brt;
mod fixtures;
mod nar;
mod noise;
mod rwm;
mod sur;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drift::DriftError;
use crate::finite_chain::{ChainError, FiniteKernel};
use crate::numerics::NumericError;
use crate::rate::RateError;
use crate::real::Real;

pub use brt::{
    brt_certificate, brt_exact_tail, brt_kernel, BrtCertificate, BrtRegime, BrtSampler, BrtSpec,
    BRT_SCALE_FRACTION,
};
pub use fixtures::{
    nar_fixture_spec, rwm_fixture_spec, sur_fixture_spec, NAR_FIXTURE, RWM_FIXTURE, SUR_FIXTURE,
};
pub use nar::{nar_certificate, symmetric_grid, NarPv, NarSpec};
pub use noise::Noise;
pub use rwm::{half_line_grid, rwm_certificate, RwmPv, RwmSpec};
pub use sur::{minorization_floor, sur_certificate, MeanCase, SurPv, SurSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model spec: {0}")]
    Spec(String),
    #[error("not applicable: {0}")]
    Inapplicable(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// One transition of a Markov chain, driven by a caller-owned RNG.
pub trait Sampler: Sync {
    type State: Clone + Send;

    fn step(&self, x: &Self::State, rng: &mut ChaCha8Rng) -> Self::State;
}

/// Samples from the rows of a finite kernel.
#[derive(Debug, Clone, Copy)]
pub struct KernelSampler<'a, T> {
    pub kernel: &'a FiniteKernel<T>,
}

impl<T: Real> Sampler for KernelSampler<'_, T> {
    type State = usize;

    fn step(&self, x: &usize, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = *x;
        for (j, p) in self.kernel.row(*x) {
            acc += p.to_f64_lossy();
            last = j;
            if u < acc {
                return j;
            }
        }
        last
    }
}

/// `[x0, Φ_1, …, Φ_n]` from a ChaCha8 stream seeded with `seed`.
pub fn sample_path<M: Sampler>(model: &M, x0: M::State, n: usize, seed: u64) -> Vec<M::State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 1);
    out.push(x0);
    for i in 0..n {
        let next = model.step(&out[i], &mut rng);
        out.push(next);
    }
    out
}

/// Constants of a continuous-model certificate: drift-function exponent
/// scale `z`, modulus scale `c` and the small-set radius `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousFixture<T> {
    pub z: T,
    pub c: T,
    pub m: T,
}

impl<T: Real> ContinuousFixture<T> {
    pub fn with_z(self, z: T) -> Self {
        Self { z, ..self }
    }
}

/// Model config record, tagged by `model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"))]
pub enum ModelSpec<T> {
    Brt(BrtSpec<T>),
    Rwm(RwmSpec<T>),
    Nar(NarSpec<T>),
    Sur(SurSpec<T>),
}
