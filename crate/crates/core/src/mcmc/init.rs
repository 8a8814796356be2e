//! Data-driven starting state for the sampler.

use crate::data::MortalityDataset;
use crate::model::{Hyperparams, ModelState};

use super::McmcError;

/// Builds a starting state from crude rates: intercepts from row means of
/// smoothed log rates, the common period path from centered year means of
/// the intercept residuals, drift coefficients from a least-squares line
/// through that path, and everything else at its neutral baseline value.
pub fn initialize_state(
    data: &MortalityDataset,
    hyper: &Hyperparams,
) -> Result<ModelState, McmcError> {
    hyper.validate(data.n_pops()).map_err(|e| McmcError::Config(e.to_string()))?;
    let (p, m, n) = (data.n_pops(), data.n_ages(), data.n_years());
    let mut state = ModelState::baseline(p, m, n);

    // Smoothed log rate per cell, defined only where the cell is active.
    let lograte = |i: usize, x: usize, t: usize| -> f64 {
        ((data.deaths(i, x, t) as f64 + 0.5) / data.exposure(i, x, t)).ln()
    };

    for i in 0..p {
        for x in 0..m {
            let mut sum = 0.0;
            let mut count = 0usize;
            for t in 0..n {
                if data.is_active(i, x, t) {
                    sum += lograte(i, x, t);
                    count += 1;
                }
            }
            // A fully masked row gets a conventional low-mortality level.
            let idx = state.age_idx(i, x);
            state.alpha[idx] = if count > 0 { sum / count as f64 } else { -5.0 };
        }
    }

    // Common period path: year means of residuals from the intercepts,
    // pooled over populations and ages, then centered.
    let mut kappa = vec![0.0; n];
    for (t, k) in kappa.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..p {
            for x in 0..m {
                if data.is_active(i, x, t) {
                    sum += lograte(i, x, t) - state.alpha[state.age_idx(i, x)];
                    count += 1;
                }
            }
        }
        *k = if count > 0 { sum / count as f64 } else { 0.0 };
    }
    let mean = kappa.iter().sum::<f64>() / n as f64;
    for k in &mut kappa {
        *k -= mean;
    }
    state.kappa = kappa;

    // Population paths: year means of what the common term leaves over.
    for i in 0..p {
        let mut path = vec![0.0; n];
        for (t, k) in path.iter_mut().enumerate() {
            let mut sum = 0.0;
            let mut count = 0usize;
            for x in 0..m {
                if data.is_active(i, x, t) {
                    let resid = lograte(i, x, t)
                        - state.alpha[state.age_idx(i, x)]
                        - state.beta[x] * state.kappa[t];
                    sum += resid;
                    count += 1;
                }
            }
            *k = if count > 0 { sum / count as f64 } else { 0.0 };
        }
        let mean = path.iter().sum::<f64>() / n as f64;
        for (t, k) in path.iter().enumerate() {
            state.kappa_pop[i * n + t] = k - mean;
        }
    }

    // Least-squares line through the centered common path. Centering makes
    // the intercept a function of the slope alone.
    let times = data.model_times();
    let t_bar = times.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, k) in times.iter().zip(&state.kappa) {
        num += (t - t_bar) * k;
        den += (t - t_bar) * (t - t_bar);
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    state.phi = [-slope * t_bar, slope];

    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rising_dataset() -> MortalityDataset {
        let (p, m, n) = (2, 3, 6);
        let mut deaths = Vec::new();
        let mut exposures = Vec::new();
        let mut missing = Vec::new();
        for i in 0..p {
            for x in 0..m {
                for t in 0..n {
                    let rate = 0.002 * (1.0 + 0.3 * x as f64) * (1.0 + 0.1 * t as f64 + i as f64 * 0.05);
                    deaths.push((rate * 50_000.0).round() as u64);
                    exposures.push(50_000.0);
                    missing.push(false);
                }
            }
        }
        MortalityDataset::new(
            vec!["A".into(), "B".into()],
            (60..60 + m as u32).collect(),
            (1990..1990 + n as i32).collect(),
            deaths,
            exposures,
            missing,
        )
        .unwrap()
    }

    #[test]
    fn starting_state_satisfies_invariants() {
        let data = rising_dataset();
        let state = initialize_state(&data, &Hyperparams::reference(2)).unwrap();
        state.check_invariants(1e-9).unwrap();
    }

    #[test]
    fn intercepts_track_observed_levels() {
        let data = rising_dataset();
        let state = initialize_state(&data, &Hyperparams::reference(2)).unwrap();
        for i in 0..2 {
            for x in 0..3 {
                let mut sum = 0.0;
                for t in 0..6 {
                    sum += ((data.deaths(i, x, t) as f64 + 0.5) / data.exposure(i, x, t)).ln();
                }
                assert_abs_diff_eq!(state.alpha[state.age_idx(i, x)], sum / 6.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn drift_line_matches_least_squares_through_path() {
        let data = rising_dataset();
        let state = initialize_state(&data, &Hyperparams::reference(2)).unwrap();
        // Centered kappa with times 1..=6: the fitted line must pass through
        // (mean time, 0), so eta at t_bar is zero.
        let t_bar = 3.5;
        assert_abs_diff_eq!(state.phi[0] + state.phi[1] * t_bar, 0.0, epsilon = 1e-12);
        // Rising mortality means a rising path.
        assert!(state.phi[1] > 0.0);
    }

    #[test]
    fn fully_masked_row_gets_fallback_level() {
        let mut deaths = vec![10u64; 2 * 2];
        let exposures = vec![1000.0; 4];
        let mut missing = vec![false; 4];
        missing[0] = true;
        missing[1] = true;
        deaths[0] = 0;
        deaths[1] = 0;
        let data = MortalityDataset::new(
            vec!["A".into()],
            vec![70, 71],
            vec![2000, 2001],
            deaths,
            exposures,
            missing,
        )
        .unwrap();
        let state = initialize_state(&data, &Hyperparams::reference(1)).unwrap();
        assert_abs_diff_eq!(state.alpha[0], -5.0, epsilon = 1e-12);
    }
}
