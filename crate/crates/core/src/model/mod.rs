//! Model structure: drift design, AR(1) precision algebra, parameter state,
//! priors, and the Poisson likelihood.

mod design;
mod hyper;
mod layout;
mod likelihood;
mod state;

pub use design::{build_precision, ArPrecision, DriftDesign};
pub use hyper::Hyperparams;
pub use layout::{ParamEntry, ParamLayout};
pub use likelihood::{ar1_logdensity, ar1_logdensity_around, poisson_loglik, LoglikScope};
pub use state::ModelState;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid hyperparameter: {0}")]
    Hyper(String),
    #[error("invalid state: {0}")]
    State(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
