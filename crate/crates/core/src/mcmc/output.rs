//! Chain results: thinned states, indicator history, acceptance report.

use std::time::Duration;

use crate::model::ModelState;

use super::config::SamplerConfig;
use super::tuner::{MhFamily, MhTuner};

/// Acceptance counts for one Metropolis coordinate family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRate {
    pub family: &'static str,
    pub accepted: u64,
    pub attempted: u64,
}

impl FamilyRate {
    pub fn rate(&self) -> f64 {
        self.accepted as f64 / self.attempted as f64
    }
}

/// Post-burn-in acceptance rates per family. Families with no attempts
/// (for example `nu` in the no-overdispersion variant) are absent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AcceptanceReport {
    pub families: Vec<FamilyRate>,
}

impl AcceptanceReport {
    pub(crate) fn from_tuner(tuner: &MhTuner) -> Self {
        let families = MhFamily::ALL
            .iter()
            .filter_map(|&f| {
                let (accepted, attempted) = tuner.frozen_counts(f);
                (attempted > 0).then_some(FamilyRate { family: f.label(), accepted, attempted })
            })
            .collect();
        Self { families }
    }

    pub fn get(&self, family: &str) -> Option<&FamilyRate> {
        self.families.iter().find(|f| f.family == family)
    }
}

/// Everything a finished chain hands back.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    /// Thinned post-burn-in states, `config.stored_draws()` of them.
    pub states: Vec<ModelState>,
    /// Inclusion indicators for every post-burn-in sweep (not thinned),
    /// indexed `[sweep][population][component]`.
    pub w_history: Vec<Vec<[bool; 2]>>,
    pub acceptance: AcceptanceReport,
    pub seed: u64,
    pub elapsed: Duration,
    pub config: SamplerConfig,
}
