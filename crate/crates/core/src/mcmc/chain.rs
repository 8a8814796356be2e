//! The sweep loop: executes the configured update blocks in order and
//! collects thinned states.

use std::time::Instant;

use log::warn;
use rand::Rng;

use crate::data::MortalityDataset;
use crate::model::{Hyperparams, ModelState};
use crate::rng;

use super::config::{SamplerConfig, UpdateBlock};
use super::init::initialize_state;
use super::output::{AcceptanceReport, ChainOutput};
use super::tuner::MhTuner;
use super::updates::{self, PathTarget};
use super::McmcError;

/// Tolerance against which stored states are checked; renormalization after
/// every coordinate move keeps the constraints far inside it.
const INVARIANT_TOL: f64 = 1e-10;

/// Runs the sampler and returns the thinned posterior draws. `initial`
/// overrides the data-driven starting state; the variant flags in the
/// config zero out whichever blocks are disabled before the first sweep.
pub fn run_chain(
    data: &MortalityDataset,
    hyper: &Hyperparams,
    config: &SamplerConfig,
    initial: Option<ModelState>,
) -> Result<ChainOutput, McmcError> {
    config.validate()?;
    if !config.renormalize {
        return Err(McmcError::Config(
            "identifiability projections cannot be disabled on a full run".into(),
        ));
    }
    hyper.validate(data.n_pops()).map_err(|e| McmcError::Config(e.to_string()))?;
    if data.n_years() < 2 {
        return Err(McmcError::Config(format!(
            "the period model needs at least 2 years, got {}",
            data.n_years()
        )));
    }

    let mut state = match initial {
        Some(s) => {
            if s.n_pops != data.n_pops() || s.n_ages != data.n_ages() || s.n_years != data.n_years()
            {
                return Err(McmcError::Config(format!(
                    "initial state is {}x{}x{}, data is {}x{}x{}",
                    s.n_pops,
                    s.n_ages,
                    s.n_years,
                    data.n_pops(),
                    data.n_ages(),
                    data.n_years()
                )));
            }
            s
        }
        None => initialize_state(data, hyper)?,
    };
    if !config.spike {
        for i in 0..state.n_pops {
            state.w[i] = [false, false];
            state.phi_pop[i] = [0.0, 0.0];
        }
    }
    if !config.overdispersion {
        state.nu.iter_mut().for_each(|v| *v = 0.0);
    }
    state.check_invariants(1e-8).map_err(|e| McmcError::Config(e.to_string()))?;

    let started = Instant::now();
    let mut tuner = MhTuner::new(state.n_pops, state.n_ages, state.n_years);
    let mut rng = rng::root(config.seed);
    let mut states = Vec::with_capacity(config.stored_draws());
    let mut w_history = Vec::with_capacity(config.iterations - config.burn_in);
    let mut alpha_fallbacks = 0usize;

    for iter in 0..config.iterations {
        if iter == config.burn_in {
            tuner.freeze();
        }
        alpha_fallbacks += one_sweep(&mut state, data, hyper, config, &mut tuner, &mut rng)
            .map_err(|e| e.at(iter))?;
        if iter >= config.burn_in {
            w_history.push(state.w.clone());
            let k = iter - config.burn_in;
            if (k + 1) % config.thin == 0 {
                state.check_invariants(INVARIANT_TOL).map_err(|e| McmcError::from(e).at(iter))?;
                states.push(state.clone());
            }
        }
    }
    if alpha_fallbacks > 0 {
        warn!(
            "intercept update fell back to Metropolis {alpha_fallbacks} times \
             (zero-death rows with a weak prior)"
        );
    }

    Ok(ChainOutput {
        states,
        w_history,
        acceptance: AcceptanceReport::from_tuner(&tuner),
        seed: config.seed,
        elapsed: started.elapsed(),
        config: config.clone(),
    })
}

/// One full sweep through the configured update blocks. Returns how many
/// intercept rows needed the Metropolis fallback.
pub(crate) fn one_sweep<R: Rng>(
    state: &mut ModelState,
    data: &MortalityDataset,
    hyper: &Hyperparams,
    config: &SamplerConfig,
    tuner: &mut MhTuner,
    rng: &mut R,
) -> Result<usize, McmcError> {
    let mut fallbacks = 0;
    for block in &config.update_order {
        fallbacks += run_block(*block, state, data, hyper, config, tuner, rng)?;
    }
    Ok(fallbacks)
}

/// Executes one update block, returning how many intercept rows needed the
/// Metropolis fallback (zero for every other block).
fn run_block<R: Rng>(
    block: UpdateBlock,
    state: &mut ModelState,
    data: &MortalityDataset,
    hyper: &Hyperparams,
    config: &SamplerConfig,
    tuner: &mut MhTuner,
    rng: &mut R,
) -> Result<usize, McmcError> {
    match block {
        UpdateBlock::Alpha => {
            return updates::update_alpha(state, data, hyper, tuner, rng, config.corruption);
        }
        UpdateBlock::BetaCommon => {
            updates::update_beta_common(state, data, tuner, rng, config.renormalize)?;
        }
        UpdateBlock::BetaPop => {
            for i in 0..state.n_pops {
                updates::update_beta_pop(state, data, tuner, rng, i, config.renormalize)?;
            }
        }
        UpdateBlock::KappaCommon => {
            updates::update_kappa_common(state, data, tuner, rng, config.renormalize)?;
        }
        UpdateBlock::PhiCommon => updates::update_phi_common(state, hyper, rng)?,
        UpdateBlock::RhoCommon => updates::update_rho(state, hyper, rng, PathTarget::Common)?,
        UpdateBlock::Sigma2KappaCommon => {
            updates::update_sigma2_kappa(state, hyper, rng, PathTarget::Common)?;
        }
        UpdateBlock::PopulationDrift => {
            for i in 0..state.n_pops {
                if config.spike {
                    updates::update_spike(state, hyper, rng, i)?;
                }
                updates::update_kappa_pop(state, data, tuner, rng, i, config.renormalize)?;
                updates::update_rho(state, hyper, rng, PathTarget::Pop(i))?;
                updates::update_sigma2_kappa(state, hyper, rng, PathTarget::Pop(i))?;
            }
        }
        UpdateBlock::Overdispersion => {
            if config.overdispersion {
                updates::update_overdispersion(state, data, hyper, tuner, rng)?;
            }
        }
        UpdateBlock::Sigma2Beta => updates::update_sigma2_beta(state, hyper, rng)?,
    }
    Ok(0)
}
