//! Metropolis-within-Gibbs sampler: one sweep updates age parameters,
//! common and population-specific time parameters with spike-and-slab
//! selection, and overdispersion parameters, renormalizing constraints
//! after every coordinate move.

mod chain;
mod config;
pub mod dist;
mod init;
mod output;
mod tuner;
pub mod updates;

pub use chain::run_chain;
pub(crate) use chain::one_sweep;
pub use config::{CorruptedUpdate, SamplerConfig, UpdateBlock};
pub use init::initialize_state;
pub use output::{AcceptanceReport, ChainOutput, FamilyRate};
pub use tuner::{MhFamily, MhTuner};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum McmcError {
    #[error("invalid sampler configuration: {0}")]
    Config(String),
    #[error("chain reached an invalid state: {0}")]
    InvalidState(String),
    #[error("covariance not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("truncated normal interval has no representable mass (mean {mean}, sd {sd})")]
    TruncatedMassUnderflow { mean: f64, sd: f64 },
    #[error("sampling failure: {0}")]
    Sampling(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("at iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<McmcError>,
    },
}

impl McmcError {
    pub(crate) fn at(self, iteration: usize) -> Self {
        McmcError::AtIteration { iteration, source: Box::new(self) }
    }
}
