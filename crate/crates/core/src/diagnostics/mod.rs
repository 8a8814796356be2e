//! Chain health reporting: inclusion proportions, drift-structure
//! reduction, posterior parameter summaries, and a joint-distribution
//! validation harness for the sampler ([`gir`]).

pub mod gir;

pub use gir::{gir_hyperparams, run_gir, GirConfig, GirReport, GirStat};

use crate::forecast::{hpd_interval, median};
use crate::mcmc::{AcceptanceReport, ChainOutput, McmcError};
use crate::model::{ModelState, ParamLayout};

/// Which drift components survive thresholding the posterior inclusion
/// proportions of one population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftStructure {
    /// Intercept and slope both kept.
    Full,
    InterceptOnly,
    SlopeOnly,
    /// Pure AR(1) deviations, no deterministic drift.
    NoDrift,
}

impl DriftStructure {
    fn from_flags(intercept: bool, slope: bool) -> Self {
        match (intercept, slope) {
            (true, true) => DriftStructure::Full,
            (true, false) => DriftStructure::InterceptOnly,
            (false, true) => DriftStructure::SlopeOnly,
            (false, false) => DriftStructure::NoDrift,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DriftStructure::Full => "full",
            DriftStructure::InterceptOnly => "intercept_only",
            DriftStructure::SlopeOnly => "slope_only",
            DriftStructure::NoDrift => "no_drift",
        }
    }
}

/// Fraction of post-burn-in sweeps in which each drift component was
/// included, per population.
pub fn inclusion_proportions(w_history: &[Vec<[bool; 2]>]) -> Vec<[f64; 2]> {
    let Some(first) = w_history.first() else {
        return Vec::new();
    };
    let n = w_history.len() as f64;
    let mut out = vec![[0.0; 2]; first.len()];
    for sweep in w_history {
        for (acc, w) in out.iter_mut().zip(sweep) {
            acc[0] += f64::from(u8::from(w[0])) / n;
            acc[1] += f64::from(u8::from(w[1])) / n;
        }
    }
    out
}

/// Keeps each drift component whose inclusion proportion reaches the
/// threshold, giving the reduced structure per population.
pub fn reduce_model(proportions: &[[f64; 2]], threshold: f64) -> Vec<DriftStructure> {
    proportions
        .iter()
        .map(|p| DriftStructure::from_flags(p[0] >= threshold, p[1] >= threshold))
        .collect()
}

/// Posterior summary of one scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary {
    pub block: &'static str,
    pub population: Option<usize>,
    pub index: usize,
    pub median: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
}

/// Median and HPD interval for every scalar parameter in layout order.
pub fn summarize_draws(
    states: &[ModelState],
    layout: &ParamLayout,
    gamma: f64,
) -> Result<Vec<ParamSummary>, McmcError> {
    if states.is_empty() {
        return Err(McmcError::Config("no draws to summarize".into()));
    }
    let rows: Vec<Vec<f64>> = states.iter().map(|s| layout.extract(s)).collect();
    let mut out = Vec::with_capacity(layout.len());
    let mut column = vec![0.0; states.len()];
    for (j, entry) in layout.entries().iter().enumerate() {
        for (c, row) in column.iter_mut().zip(&rows) {
            *c = row[j];
        }
        let (lo, hi) = hpd_interval(&column, gamma)?;
        out.push(ParamSummary {
            block: entry.block,
            population: entry.population,
            index: entry.index,
            median: median(&column),
            hpd_lo: lo,
            hpd_hi: hi,
        });
    }
    Ok(out)
}

/// Health report for one finished chain.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    /// Post-burn-in sweeps the proportions are computed over.
    pub n_sweeps: usize,
    pub inclusion: Vec<[f64; 2]>,
    pub threshold: f64,
    pub reduced: Vec<DriftStructure>,
    pub acceptance: AcceptanceReport,
}

impl DiagnosticsReport {
    pub fn from_chain(chain: &ChainOutput, threshold: f64) -> Result<Self, McmcError> {
        if chain.w_history.is_empty() {
            return Err(McmcError::Config("chain kept no post-burn-in sweeps".into()));
        }
        if !(0.0..=1.0).contains(&threshold) {
            return Err(McmcError::Config(format!("threshold {threshold} outside [0, 1]")));
        }
        let inclusion = inclusion_proportions(&chain.w_history);
        let reduced = reduce_model(&inclusion, threshold);
        Ok(Self {
            n_sweeps: chain.w_history.len(),
            inclusion,
            threshold,
            reduced,
            acceptance: chain.acceptance.clone(),
        })
    }
}
