//! Sampler run configuration.

use serde::{Deserialize, Serialize};

use super::McmcError;

/// One block of a Gibbs sweep. `PopulationDrift` bundles, for each
/// population in index order, the spike-and-slab step, the period-path
/// updates, and that population's autocorrelation and innovation variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateBlock {
    Alpha,
    BetaCommon,
    BetaPop,
    KappaCommon,
    PhiCommon,
    RhoCommon,
    Sigma2KappaCommon,
    PopulationDrift,
    Overdispersion,
    Sigma2Beta,
}

impl UpdateBlock {
    /// The fixed reference sweep order.
    pub fn default_order() -> Vec<UpdateBlock> {
        vec![
            UpdateBlock::Alpha,
            UpdateBlock::BetaCommon,
            UpdateBlock::BetaPop,
            UpdateBlock::KappaCommon,
            UpdateBlock::PhiCommon,
            UpdateBlock::RhoCommon,
            UpdateBlock::Sigma2KappaCommon,
            UpdateBlock::PopulationDrift,
            UpdateBlock::Overdispersion,
            UpdateBlock::Sigma2Beta,
        ]
    }
}

/// Deliberate defects for mutation-testing the joint-distribution harness.
/// Never enabled on a real fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorruptedUpdate {
    /// Adds 1 to the shape of the conjugate intercept update.
    AlphaShapePlusOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Total sweeps, burn-in included.
    pub iterations: usize,
    /// Sweeps discarded before any state is stored.
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in state.
    pub thin: usize,
    pub seed: u64,
    /// Cell-level log-normal overdispersion on or off.
    pub overdispersion: bool,
    /// Drift selection on, or population drifts pinned to zero.
    pub spike: bool,
    /// Identifiability projections after coordinate moves. Always on for
    /// real fits; the joint-distribution harness turns it off to validate
    /// the coordinate conditionals on the unconstrained model.
    pub renormalize: bool,
    pub update_order: Vec<UpdateBlock>,
    /// Mutation-testing hook; `None` for all real runs.
    pub corruption: Option<CorruptedUpdate>,
}

impl SamplerConfig {
    /// Full model with the run lengths used for the reference fits:
    /// 20000 sweeps, half burn-in.
    pub fn reference(seed: u64) -> Self {
        Self {
            iterations: 20_000,
            burn_in: 10_000,
            thin: 10,
            seed,
            overdispersion: true,
            spike: true,
            renormalize: true,
            update_order: UpdateBlock::default_order(),
            corruption: None,
        }
    }

    /// The comparison variant: no overdispersion layer and no
    /// population-specific drift.
    pub fn model2(seed: u64) -> Self {
        Self { overdispersion: false, spike: false, ..Self::reference(seed) }
    }

    pub fn validate(&self) -> Result<(), McmcError> {
        if self.iterations == 0 {
            return Err(McmcError::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(McmcError::Config(format!(
                "burn-in {} must be below total iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(McmcError::Config("thinning stride must be at least 1".into()));
        }
        if self.update_order.is_empty() {
            return Err(McmcError::Config("update order is empty".into()));
        }
        Ok(())
    }

    /// Number of states `run_chain` will store.
    pub fn stored_draws(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}
