//! Posterior predictive projection of time indices, rates and deaths.
//!
//! Each stored posterior draw is extended independently: its period paths
//! are continued by their AR(1) recursions past the training window, log
//! rates follow from the draw's age profiles and intercepts, and death
//! counts are Poisson draws against exposures frozen at the end of the
//! training period. Draws run in parallel, each on its own RNG substream
//! keyed by `(seed, draw index)`, so results do not depend on thread count.

mod interval;

pub use interval::{hpd_interval, median};

use rand::Rng;
use rayon::prelude::*;

use crate::data::MortalityDataset;
use crate::mcmc::{dist, McmcError};
use crate::model::{DriftDesign, ModelState};
use crate::rng;

/// How the cell-level overdispersion term enters future cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuMode {
    /// Draw a fresh effect per future cell from that draw's variance. The
    /// default: future cells are as noisy as observed ones.
    Resample,
    /// Pin future effects to zero, projecting the smooth rate surface only.
    Zero,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForecastConfig {
    /// Number of years past the training window.
    pub horizon: usize,
    pub nu_mode: NuMode,
    pub seed: u64,
}

/// One posterior draw continued over the forecast horizon. Rates are flat
/// over `[pop][age][horizon step]` in `pop * (n_ages * horizon) + age *
/// horizon + step` order; paths are `[pop][step]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDraw {
    pub kappa: Vec<f64>,
    pub kappa_pop: Vec<f64>,
    pub log_rates: Vec<f64>,
    pub deaths: Vec<u64>,
}

/// All continued draws plus the fixed context they share.
#[derive(Debug, Clone)]
pub struct ForecastOutput {
    pub horizon: usize,
    /// Calendar years of the forecast columns.
    pub years: Vec<i32>,
    /// Population labels in dataset order.
    pub populations: Vec<String>,
    /// Age labels in dataset order.
    pub ages: Vec<u32>,
    /// Exposure per `[pop][age]`, frozen at the latest active training year.
    pub exposures: Vec<f64>,
    pub draws: Vec<ForecastDraw>,
    pub nu_mode: NuMode,
    pub seed: u64,
}

/// Summary of one forecast quantity at one grid position.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub population: String,
    pub age: u32,
    pub year: i32,
    pub median: f64,
    pub hpd_lo: f64,
    pub hpd_hi: f64,
}

/// Continues every stored draw `config.horizon` years past the data.
pub fn run_forecast(
    states: &[ModelState],
    data: &MortalityDataset,
    config: &ForecastConfig,
) -> Result<ForecastOutput, McmcError> {
    if states.is_empty() {
        return Err(McmcError::Config("no posterior draws to continue".into()));
    }
    if config.horizon == 0 {
        return Err(McmcError::Config("forecast horizon must be positive".into()));
    }
    let (p, m, n) = (data.n_pops(), data.n_ages(), data.n_years());
    for s in states {
        if s.n_pops != p || s.n_ages != m || s.n_years != n {
            return Err(McmcError::Config(format!(
                "draw dimensions {}x{}x{} do not match data {p}x{m}x{n}",
                s.n_pops, s.n_ages, s.n_years
            )));
        }
    }

    // Exposure per row, frozen at the most recent year whose cell is
    // active. A row with no active cell at all forecasts zero deaths.
    let mut exposures = vec![0.0; p * m];
    for i in 0..p {
        for x in 0..m {
            for t in (0..n).rev() {
                if data.is_active(i, x, t) {
                    exposures[i * m + x] = data.exposure(i, x, t);
                    break;
                }
            }
        }
    }

    let last_year = *data.years().last().expect("validated non-empty");
    let years: Vec<i32> = (1..=config.horizon as i32).map(|h| last_year + h).collect();

    let draws = states
        .par_iter()
        .enumerate()
        .map(|(j, state)| {
            let mut rng = rng::substream(config.seed, j as u64);
            forecast_one(state, &exposures, config, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ForecastOutput {
        horizon: config.horizon,
        years,
        populations: data.populations().to_vec(),
        ages: data.ages().to_vec(),
        exposures,
        draws,
        nu_mode: config.nu_mode,
        seed: config.seed,
    })
}

/// Continues one period path `horizon` steps past its training window: the
/// deviation from the drift follows the AR(1) recursion, starting from the
/// final training deviation.
pub fn continue_path<R: Rng>(
    path: &[f64],
    phi: [f64; 2],
    rho: f64,
    sigma2: f64,
    horizon: usize,
    rng: &mut R,
) -> Vec<f64> {
    let n = path.len();
    let sd = sigma2.sqrt();
    let mut r = path[n - 1] - DriftDesign::eta_at(phi, n as f64);
    let mut out = Vec::with_capacity(horizon);
    for h in 1..=horizon {
        r = rho * r + dist::normal_draw(0.0, sd, rng);
        out.push(DriftDesign::eta_at(phi, (n + h) as f64) + r);
    }
    out
}

fn forecast_one<R: Rng>(
    state: &ModelState,
    exposures: &[f64],
    config: &ForecastConfig,
    rng: &mut R,
) -> Result<ForecastDraw, McmcError> {
    let (p, m, n) = (state.n_pops, state.n_ages, state.n_years);
    let h = config.horizon;

    let kappa = continue_path(&state.kappa, state.phi, state.rho, state.sigma2_kappa, h, rng);
    let mut kappa_pop = Vec::with_capacity(p * h);
    for i in 0..p {
        kappa_pop.extend(continue_path(
            &state.kappa_pop[i * n..(i + 1) * n],
            state.phi_pop[i],
            state.rho_pop[i],
            state.sigma2_kappa_pop[i],
            h,
            rng,
        ));
    }

    let mut log_rates = Vec::with_capacity(p * m * h);
    for i in 0..p {
        let nu_sd = state.sigma2_nu[i].sqrt();
        for x in 0..m {
            let base = state.alpha[state.age_idx(i, x)];
            for step in 0..h {
                let nu = match config.nu_mode {
                    NuMode::Resample => dist::normal_draw(0.0, nu_sd, rng),
                    NuMode::Zero => 0.0,
                };
                log_rates.push(
                    base + state.beta[x] * kappa[step]
                        + state.beta_pop[state.age_idx(i, x)] * kappa_pop[i * h + step]
                        + nu,
                );
            }
        }
    }

    let mut deaths = Vec::with_capacity(p * m * h);
    for i in 0..p {
        for x in 0..m {
            let e = exposures[i * m + x];
            for step in 0..h {
                let mean = e * log_rates[(i * m + x) * h + step].exp();
                if !(mean < 1e12) {
                    return Err(McmcError::Sampling(format!(
                        "projected death mean {mean} for population {i}, age row {x}, \
                         step {step} is out of range"
                    )));
                }
                deaths.push(dist::poisson_draw(mean, rng)?);
            }
        }
    }

    Ok(ForecastDraw { kappa, kappa_pop, log_rates, deaths })
}

impl ForecastOutput {
    fn n_pops(&self) -> usize {
        self.populations.len()
    }

    fn n_ages(&self) -> usize {
        self.ages.len()
    }

    fn rate_idx(&self, pop: usize, age: usize, step: usize) -> usize {
        (pop * self.n_ages() + age) * self.horizon + step
    }

    /// Mortality rates (natural scale) of one cell across draws.
    pub fn rate_samples(&self, pop: usize, age: usize, step: usize) -> Vec<f64> {
        let idx = self.rate_idx(pop, age, step);
        self.draws.iter().map(|d| d.log_rates[idx].exp()).collect()
    }

    /// Death counts of one cell across draws.
    pub fn death_samples(&self, pop: usize, age: usize, step: usize) -> Vec<f64> {
        let idx = self.rate_idx(pop, age, step);
        self.draws.iter().map(|d| d.deaths[idx] as f64).collect()
    }

    /// Median and HPD interval of the mortality rate at every grid position.
    pub fn rate_summary(&self, gamma: f64) -> Result<Vec<SummaryRow>, McmcError> {
        self.summarize(gamma, Self::rate_samples)
    }

    /// Median and HPD interval of the death count at every grid position.
    pub fn death_summary(&self, gamma: f64) -> Result<Vec<SummaryRow>, McmcError> {
        self.summarize(gamma, Self::death_samples)
    }

    fn summarize(
        &self,
        gamma: f64,
        samples: impl Fn(&Self, usize, usize, usize) -> Vec<f64>,
    ) -> Result<Vec<SummaryRow>, McmcError> {
        let mut rows = Vec::with_capacity(self.n_pops() * self.n_ages() * self.horizon);
        for i in 0..self.n_pops() {
            for x in 0..self.n_ages() {
                for step in 0..self.horizon {
                    let xs = samples(self, i, x, step);
                    let (lo, hi) = hpd_interval(&xs, gamma)?;
                    rows.push(SummaryRow {
                        population: self.populations[i].clone(),
                        age: self.ages[x],
                        year: self.years[step],
                        median: median(&xs),
                        hpd_lo: lo,
                        hpd_hi: hi,
                    });
                }
            }
        }
        Ok(rows)
    }
}
