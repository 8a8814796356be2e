//! Bayesian multi-population Lee-Carter mortality modelling.
//!
//! The crate fits a Poisson log-normal Lee-Carter model to deaths/exposures
//! grids covering several populations at once. The log mortality rate of
//! population `i` at age `x` in year `t` decomposes as
//!
//! ```text
//! log mu = alpha[i][x] + beta[x] * kappa[t] + beta_pop[i][x] * kappa_pop[i][t] + nu[i][x][t]
//! ```
//!
//! with a common bilinear age/time term shared by all populations, a
//! population-specific bilinear term, and a log-normal overdispersion effect
//! `nu`. Both time indices follow AR(1) processes around a linear drift; the
//! population-specific drift coefficients carry a dirac spike-and-slab prior
//! so that the sampler selects, per population, whether an intercept and/or a
//! slope belongs in the drift at all.
//!
//! Estimation is Metropolis-within-Gibbs ([`mcmc`]), projection is posterior
//! predictive simulation of future time indices, rates and death counts
//! ([`forecast`]). [`synth`] forward-simulates datasets for recovery tests and
//! [`diagnostics`] carries chain health reports plus a joint-distribution
//! ("getting it right") validation harness.

pub mod data;
pub mod diagnostics;
pub mod forecast;
pub mod mcmc;
pub mod model;
pub mod rng;
pub mod synth;

pub use data::{CellKey, MortalityDataset};
pub use mcmc::{ChainOutput, SamplerConfig};
pub use model::{Hyperparams, ModelState};
