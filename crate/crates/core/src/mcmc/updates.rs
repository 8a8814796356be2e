//! Full-conditional and Metropolis updates for every parameter block.
//!
//! Closed-form conditionals are factored into `*_conditional` functions that
//! return distribution parameters, so tests can check them against numeric
//! posteriors independently of any random draws.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;

use crate::data::MortalityDataset;
use crate::model::{
    poisson_loglik, ArPrecision, DriftDesign, Hyperparams, LoglikScope, ModelState,
};

use super::config::CorruptedUpdate;
use super::dist;
use super::tuner::{MhFamily, MhTuner};
use super::McmcError;

/// Which period path a common-versus-population update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathTarget {
    Common,
    Pop(usize),
}

/// Symmetric-proposal Metropolis acceptance: accept iff
/// `u <= min(1, exp(proposal - current))`. A proposal with zero density
/// always rejects; a current state with zero density is a chain bug.
pub fn mh_accept(log_current: f64, log_proposal: f64, u: f64) -> Result<bool, McmcError> {
    if log_current == f64::NEG_INFINITY {
        return Err(McmcError::InvalidState(
            "current state has zero posterior density".into(),
        ));
    }
    if log_current.is_nan() || log_proposal.is_nan() {
        return Err(McmcError::InvalidState("NaN log target in MH step".into()));
    }
    if log_proposal == f64::NEG_INFINITY {
        return Ok(false);
    }
    Ok(u <= (log_proposal - log_current).min(0.0).exp())
}

fn normal_logkernel(x: f64, mean: f64, var: f64) -> f64 {
    -(x - mean) * (x - mean) / (2.0 * var)
}

/// Gamma shape/rate of the conjugate conditional for `e = exp(alpha)` at one
/// (population, age) row. The shape carries a `-1` from the Jacobian of the
/// log link; the prior is Gamma on `e` itself.
pub fn alpha_conditional(
    state: &ModelState,
    data: &MortalityDataset,
    hyper: &Hyperparams,
    pop: usize,
    age: usize,
) -> Result<(f64, f64), McmcError> {
    let mut sum_d = 0.0;
    let mut c = 0.0;
    for t in 0..data.n_years() {
        if !data.is_active(pop, age, t) {
            continue;
        }
        sum_d += data.deaths(pop, age, t) as f64;
        let without_alpha =
            state.linear_predictor(pop, age, t) - state.alpha[state.age_idx(pop, age)];
        c += data.exposure(pop, age, t) * without_alpha.exp();
    }
    if !c.is_finite() {
        return Err(McmcError::InvalidState(format!(
            "exposure-weighted rate sum overflowed at population {pop}, age index {age}"
        )));
    }
    Ok((hyper.a_e + sum_d - 1.0, hyper.b_e + c))
}

/// Conjugate draw of every age intercept through `e = exp(alpha)`. Rows
/// whose Gamma shape is non-positive (possible only with a weak prior and a
/// zero-death row) fall back to a Metropolis step in `alpha` space; the
/// number of such fallbacks is returned so the caller can warn once.
pub fn update_alpha<R: Rng>(
    state: &mut ModelState,
    data: &MortalityDataset,
    hyper: &Hyperparams,
    tuner: &mut MhTuner,
    rng: &mut R,
    corruption: Option<CorruptedUpdate>,
) -> Result<usize, McmcError> {
    let mut fallbacks = 0;
    for i in 0..state.n_pops {
        for x in 0..state.n_ages {
            let (mut shape, rate) = alpha_conditional(state, data, hyper, i, x)?;
            if corruption == Some(CorruptedUpdate::AlphaShapePlusOne) {
                shape += 1.0;
            }
            let idx = state.age_idx(i, x);
            if shape > 0.0 {
                let e = dist::gamma_draw(shape, rate, rng)?;
                state.alpha[idx] = e.ln();
            } else {
                // Improper-looking conditional: random-walk step on alpha
                // against the same kernel, shape * alpha - rate * exp(alpha).
                fallbacks += 1;
                let current = state.alpha[idx];
                let sd = tuner.proposal_sd(MhFamily::Alpha, idx);
                let proposal = current + dist::normal_draw(0.0, sd, rng);
                let log_cur = shape * current - rate * current.exp();
                let log_prop = shape * proposal - rate * proposal.exp();
                let accepted = mh_accept(log_cur, log_prop, rng.random())?;
                if accepted {
                    state.alpha[idx] = proposal;
                }
                tuner.record(MhFamily::Alpha, idx, accepted);
            }
        }
    }
    Ok(fallbacks)
}

/// Sequential Metropolis scan over the common age profile, with the sum
/// renormalization applied after every age when `renormalize` is set.
pub fn update_beta_common<R: Rng>(
    state: &mut ModelState,
    data: &MortalityDataset,
    tuner: &mut MhTuner,
    rng: &mut R,
    renormalize: bool,
) -> Result<(), McmcError> {
    let prior_mean = 1.0 / state.n_ages as f64;
    for x in 0..state.n_ages {
        let current = state.beta[x];
        let log_cur = poisson_loglik(data, state, LoglikScope::Age(x), false)
            + normal_logkernel(current, prior_mean, state.sigma2_beta);
        let sd = tuner.proposal_sd(MhFamily::BetaCommon, x);
        let proposal = current + dist::normal_draw(0.0, sd, rng);
        state.beta[x] = proposal;
        let log_prop = poisson_loglik(data, state, LoglikScope::Age(x), false)
            + normal_logkernel(proposal, prior_mean, state.sigma2_beta);
        let accepted = mh_accept(log_cur, log_prop, rng.random())?;
        if !accepted {
            state.beta[x] = current;
        }
        tuner.record(MhFamily::BetaCommon, x, accepted);
        if renormalize {
            state.rescale_beta_common()?;
        }
    }
    Ok(())
}

/// Same scan for one population's age profile, renormalizing by its norm.
pub fn update_beta_pop<R: Rng>(
    state: &mut ModelState,
    data: &MortalityDataset,
    tuner: &mut MhTuner,
    rng: &mut R,
    pop: usize,
    renormalize: bool,
) -> Result<(), McmcError> {
    let prior_mean = 1.0 / state.n_ages as f64;
    for x in 0..state.n_ages {
        let idx = state.age_idx(pop, x);
        let current = state.beta_pop[idx];
        let log_cur = poisson_loglik(data, state, LoglikScope::PopAge(pop, x), false)
            + normal_logkernel(current, prior_mean, state.sigma2_beta_pop[pop]);
        let sd = tuner.proposal_sd(MhFamily::BetaPop, idx);
        let proposal = current + dist::normal_draw(0.0, sd, rng);
        state.beta_pop[idx] = proposal;
        let log_prop = poisson_loglik(data, state, LoglikScope::PopAge(pop, x), false)
            + normal_logkernel(proposal, prior_mean, state.sigma2_beta_pop[pop]);
        let accepted = mh_accept(log_cur, log_prop, rng.random())?;
        if !accepted {
            state.beta_pop[idx] = current;
        }
        tuner.record(MhFamily::BetaPop, idx, accepted);
        if renormalize {
            state.rescale_beta_pop(pop)?;
        }
    }
    Ok(())
}

/// Inverse-gamma shape/rate for the common age-profile variance.
pub fn sigma2_beta_conditional(state: &ModelState, hyper: &Hyperparams) -> (f64, f64) {
    let m = state.n_ages as f64;
    let prior_mean = 1.0 / m;
    let ssq: f64 = state.beta.iter().map(|b| (b - prior_mean) * (b - prior_mean)).sum();
    (hyper.a_beta + m / 2.0, hyper.b_beta + 0.5 * ssq)
}

/// Inverse-gamma shape/rate for one population age-profile variance.
pub fn sigma2_beta_pop_conditional(
    state: &ModelState,
    hyper: &Hyperparams,
    pop: usize,
) -> (f64, f64) {
    let m = state.n_ages as f64;
    let prior_mean = 1.0 / m;
    let lo = pop * state.n_ages;
    let ssq: f64 = state.beta_pop[lo..lo + state.n_ages]
        .iter()
        .map(|b| (b - prior_mean) * (b - prior_mean))
        .sum();
    (hyper.a_beta_pop[pop] + m / 2.0, hyper.b_beta_pop[pop] + 0.5 * ssq)
}

/// Draws the common and every population age-profile variance.
pub fn update_sigma2_beta<R: Rng>(
    state: &mut ModelState,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<(), McmcError> {
    let (shape, rate) = sigma2_beta_conditional(state, hyper);
    state.sigma2_beta = dist::inv_gamma_draw(shape, rate, rng)?;
    for i in 0..state.n_pops {
        let (shape, rate) = sigma2_beta_pop_conditional(state, hyper, i);
        state.sigma2_beta_pop[i] = dist::inv_gamma_draw(shape, rate, rng)?;
    }
    Ok(())
}

/// Log kernel of the AR(1) conditional of one period coordinate given the
/// rest of its path: the innovation terms that involve `path[t]`, with the
/// first coordinate carrying the innovation-variance marginal.
pub fn kappa_conditional_logkernel(
    value: f64,
    t: usize,
    path: &[f64],
    eta: &[f64],
    rho: f64,
    sigma2: f64,
) -> f64 {
    let n = path.len();
    debug_assert!(t < n && eta.len() == n);
    let r = value - eta[t];
    let mut quad = if t == 0 {
        r * r
    } else {
        let prev = path[t - 1] - eta[t - 1];
        let innov = r - rho * prev;
        innov * innov
    };
    if t + 1 < n {
        let next = path[t + 1] - eta[t + 1];
        let innov = next - rho * r;
        quad += innov * innov;
    }
    -quad / (2.0 * sigma2)
}

/// Sequential Metropolis scan over the common period path with recentering
/// (and intercept compensation) after every year.
pub fn update_kappa_common<R: Rng>(
    state: &mut ModelState,
    data: &MortalityDataset,
    tuner: &mut MhTuner,
    rng: &mut R,
    renormalize: bool,
) -> Result<(), McmcError> {
    let design = DriftDesign::new(state.n_years);
    let eta = design.eta(state.phi);
    for t in 0..state.n_years {
        let current = state.kappa[t];
        let log_cur = poisson_loglik(data, state, LoglikScope::Year(t), false)
            + kappa_conditional_logkernel(
                current,
                t,
                &state.kappa,
                &eta,
                state.rho,
                state.sigma2_kappa,
            );
        let sd = tuner.proposal_sd(MhFamily::KappaCommon, t);
        let proposal = current + dist::normal_draw(0.0, sd, rng);
        state.kappa[t] = proposal;
        let log_prop = poisson_loglik(data, state, LoglikScope::Year(t), false)
            + kappa_conditional_logkernel(
                proposal,
                t,
                &state.kappa,
                &eta,
                state.rho,
                state.sigma2_kappa,
            );
        let accepted = mh_accept(log_cur, log_prop, rng.random())?;
        if !accepted {
            state.kappa[t] = current;
        }
        tuner.record(MhFamily::KappaCommon, t, accepted);
        if renormalize {
            state.recenter_kappa_common();
        }
    }
    Ok(())
}

/// Same scan for one population's period path.
pub fn update_kappa_pop<R: Rng>(
    state: &mut ModelState,
    data: &MortalityDataset,
    tuner: &mut MhTuner,
    rng: &mut R,
    pop: usize,
    renormalize: bool,
) -> Result<(), McmcError> {
    let design = DriftDesign::new(state.n_years);
    let eta = design.eta(state.phi_pop[pop]);
    let tlo = pop * state.n_years;
    for t in 0..state.n_years {
        let idx = tlo + t;
        let current = state.kappa_pop[idx];
        let path = &state.kappa_pop[tlo..tlo + state.n_years];
        let log_cur = kappa_conditional_logkernel(
            current,
            t,
            path,
            &eta,
            state.rho_pop[pop],
            state.sigma2_kappa_pop[pop],
        ) + poisson_loglik(data, state, LoglikScope::PopYear(pop, t), false);
        let sd = tuner.proposal_sd(MhFamily::KappaPop, idx);
        let proposal = current + dist::normal_draw(0.0, sd, rng);
        state.kappa_pop[idx] = proposal;
        let path = &state.kappa_pop[tlo..tlo + state.n_years];
        let log_prop = kappa_conditional_logkernel(
            proposal,
            t,
            path,
            &eta,
            state.rho_pop[pop],
            state.sigma2_kappa_pop[pop],
        ) + poisson_loglik(data, state, LoglikScope::PopYear(pop, t), false);
        let accepted = mh_accept(log_cur, log_prop, rng.random())?;
        if !accepted {
            state.kappa_pop[idx] = current;
        }
        tuner.record(MhFamily::KappaPop, idx, accepted);
        if renormalize {
            state.recenter_kappa_pop(pop);
        }
    }
    Ok(())
}

/// Mean and covariance of the bivariate normal conditional for the common
/// drift coefficients.
pub fn phi_common_conditional(
    state: &ModelState,
    hyper: &Hyperparams,
) -> Result<(Vector2<f64>, Matrix2<f64>), McmcError> {
    let n = state.n_years;
    let design = DriftDesign::new(n);
    let q = ArPrecision::new(state.rho, n);
    let s2 = state.sigma2_kappa;
    let prior_prec_scaled =
        Matrix2::new(s2 / hyper.sigma0_diag[0], 0.0, 0.0, s2 / hyper.sigma0_diag[1]);
    let m = q.wtqw(&design) + prior_prec_scaled;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    if !(det > 0.0 && m[(0, 0)] > 0.0) {
        return Err(McmcError::NotPositiveDefinite(format!(
            "drift conditional precision has determinant {det}"
        )));
    }
    let inv = Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det;
    let rhs = q.wtqv(&design, &state.kappa)
        + Vector2::new(
            s2 * hyper.phi0[0] / hyper.sigma0_diag[0],
            s2 * hyper.phi0[1] / hyper.sigma0_diag[1],
        );
    Ok((inv * rhs, inv * s2))
}

pub fn update_phi_common<R: Rng>(
    state: &mut ModelState,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<(), McmcError> {
    let (mean, cov) = phi_common_conditional(state, hyper)?;
    let draw = dist::mvn2_draw(mean, cov, rng)?;
    state.phi = [draw[0], draw[1]];
    Ok(())
}

/// Mean and variance of the untruncated normal conditional for an
/// autocorrelation parameter; the draw is then restricted to (-1, 1).
pub fn rho_conditional(state: &ModelState, hyper: &Hyperparams, which: PathTarget) -> (f64, f64) {
    let n = state.n_years;
    let design = DriftDesign::new(n);
    let (path, phi, s2, prior_var) = match which {
        PathTarget::Common => (&state.kappa[..], state.phi, state.sigma2_kappa, hyper.sigma2_rho),
        PathTarget::Pop(i) => (
            &state.kappa_pop[i * n..(i + 1) * n],
            state.phi_pop[i],
            state.sigma2_kappa_pop[i],
            hyper.sigma2_rho_pop[i],
        ),
    };
    let eta = design.eta(phi);
    let r: Vec<f64> = path.iter().zip(&eta).map(|(k, e)| k - e).collect();
    let mut a_rho = 0.0;
    let mut b_rho = 0.0;
    for t in 1..n {
        a_rho += r[t - 1] * r[t - 1];
        b_rho += r[t] * r[t - 1];
    }
    let denom = a_rho + s2 / prior_var;
    (b_rho / denom, s2 / denom)
}

pub fn update_rho<R: Rng>(
    state: &mut ModelState,
    hyper: &Hyperparams,
    rng: &mut R,
    which: PathTarget,
) -> Result<(), McmcError> {
    let (mean, var) = rho_conditional(state, hyper, which);
    let draw = dist::truncated_normal_draw(mean, var.sqrt(), -1.0, 1.0, rng)?
        .clamp(-1.0 + 1e-12, 1.0 - 1e-12);
    match which {
        PathTarget::Common => state.rho = draw,
        PathTarget::Pop(i) => state.rho_pop[i] = draw,
    }
    Ok(())
}

/// Inverse-gamma shape/rate for a period innovation variance. The
/// population variance also scales the slab prior of its included drift
/// coefficients, so each included component contributes 1/2 to the shape
/// and `phi^2/(2c)` to the rate on top of the path residual term.
pub fn sigma2_kappa_conditional(
    state: &ModelState,
    hyper: &Hyperparams,
    which: PathTarget,
) -> (f64, f64) {
    let n = state.n_years;
    let design = DriftDesign::new(n);
    let (path, phi, rho, a, b) = match which {
        PathTarget::Common =>
            (&state.kappa[..], state.phi, state.rho, hyper.a_kappa, hyper.b_kappa),
        PathTarget::Pop(i) => (
            &state.kappa_pop[i * n..(i + 1) * n],
            state.phi_pop[i],
            state.rho_pop[i],
            hyper.a_kappa_pop[i],
            hyper.b_kappa_pop[i],
        ),
    };
    let eta = design.eta(phi);
    let r: Vec<f64> = path.iter().zip(&eta).map(|(k, e)| k - e).collect();
    let quad = ArPrecision::new(rho, n).quad_form(&r);
    let (mut shape, mut rate) = (a + n as f64 / 2.0, b + 0.5 * quad);
    if let PathTarget::Pop(i) = which {
        for l in 0..2 {
            if state.w[i][l] {
                shape += 0.5;
                rate += phi[l] * phi[l] / (2.0 * hyper.slab_scale);
            }
        }
    }
    (shape, rate)
}

pub fn update_sigma2_kappa<R: Rng>(
    state: &mut ModelState,
    hyper: &Hyperparams,
    rng: &mut R,
    which: PathTarget,
) -> Result<(), McmcError> {
    let (shape, rate) = sigma2_kappa_conditional(state, hyper, which);
    let draw = dist::inv_gamma_draw(shape, rate, rng)?;
    match which {
        PathTarget::Common => state.sigma2_kappa = draw,
        PathTarget::Pop(i) => state.sigma2_kappa_pop[i] = draw,
    }
    Ok(())
}

/// Log of the spike ratio `R*`: the marginal likelihood of excluding one
/// drift component over including it, for residual `z` against design
/// column `col`, with slab scale `c` on top of innovation variance
/// `sigma2`.
pub fn spike_log_ratio(
    z: &[f64],
    col: &[f64],
    q: &ArPrecision,
    sigma2: f64,
    c: f64,
) -> f64 {
    let wqw = q.bilinear(col, col);
    let wqz = q.bilinear(col, z);
    0.5 * (c * wqw + 1.0).ln() - wqz * wqz / (2.0 * sigma2 * (wqw + 1.0 / c))
}

/// Inclusion probability from the prior weight and the log spike ratio,
/// computed in log space and clamped away from exact 0 and 1.
pub fn inclusion_probability(p: f64, log_ratio: f64) -> f64 {
    // xi = p / (p + (1-p) R*) = logistic(logit(p) - ln R*).
    let logit = (p / (1.0 - p)).ln();
    let s = logit - log_ratio;
    let xi = if s >= 0.0 { 1.0 / (1.0 + (-s).exp()) } else { s.exp() / (1.0 + s.exp()) };
    xi.clamp(1e-15, 1.0 - 1e-15)
}

/// Spike-and-slab step for one population: each drift component is drawn
/// as a collapsed pair, first the indicator with its own coefficient
/// integrated out of the odds, then the coefficient from its exact scalar
/// conditional given the other component's value. The second component
/// sees the first one's refreshed value, never a stale draw; the
/// inclusion probability follows from the indicator count.
pub fn update_spike<R: Rng>(
    state: &mut ModelState,
    hyper: &Hyperparams,
    rng: &mut R,
    pop: usize,
) -> Result<(), McmcError> {
    let n = state.n_years;
    let design = DriftDesign::new(n);
    let q = ArPrecision::new(state.rho_pop[pop], n);
    let s2 = state.sigma2_kappa_pop[pop];
    let c = hyper.slab_scale;
    for l in 0..2 {
        let other = 1 - l;
        let other_col = design.column(other);
        let phi_other = state.phi_pop[pop][other];
        let z: Vec<f64> = state.kappa_pop[pop * n..(pop + 1) * n]
            .iter()
            .zip(&other_col)
            .map(|(k, wv)| k - wv * phi_other)
            .collect();
        let col = design.column(l);
        let log_ratio = spike_log_ratio(&z, &col, &q, s2, c);
        let xi = inclusion_probability(state.p_incl[pop], log_ratio);
        let included = dist::bernoulli_draw(xi, rng);
        state.w[pop][l] = included;
        state.phi_pop[pop][l] = if included {
            let prec = q.bilinear(&col, &col) + 1.0 / c;
            dist::normal_draw(q.bilinear(&col, &z) / prec, (s2 / prec).sqrt(), rng)
        } else {
            0.0
        };
    }
    let (a, b) = p_conditional(state, hyper, pop);
    state.p_incl[pop] = dist::beta_draw(a, b, rng)?;
    Ok(())
}

/// Beta parameters of the inclusion-probability conditional.
pub fn p_conditional(state: &ModelState, hyper: &Hyperparams, pop: usize) -> (f64, f64) {
    let count = f64::from(u8::from(state.w[pop][0])) + f64::from(u8::from(state.w[pop][1]));
    (hyper.a_p + count, hyper.b_p + 2.0 - count)
}

/// Inverse-gamma shape/rate for one population's overdispersion variance.
/// Masked cells carry no random effect and are excluded from the count.
pub fn sigma2_nu_conditional(
    state: &ModelState,
    data: &MortalityDataset,
    hyper: &Hyperparams,
    pop: usize,
) -> (f64, f64) {
    let mut ssq = 0.0;
    let mut cells = 0usize;
    for x in 0..state.n_ages {
        for t in 0..state.n_years {
            if data.is_active(pop, x, t) {
                let v = state.nu[state.cell_idx(pop, x, t)];
                ssq += v * v;
                cells += 1;
            }
        }
    }
    (hyper.a_nu[pop] + cells as f64 / 2.0, hyper.b_nu[pop] + 0.5 * ssq)
}

/// Overdispersion block: each population's variance from its conjugate
/// conditional, then a Metropolis step on every active cell effect.
pub fn update_overdispersion<R: Rng>(
    state: &mut ModelState,
    data: &MortalityDataset,
    hyper: &Hyperparams,
    tuner: &mut MhTuner,
    rng: &mut R,
) -> Result<(), McmcError> {
    for i in 0..state.n_pops {
        let (shape, rate) = sigma2_nu_conditional(state, data, hyper, i);
        state.sigma2_nu[i] = dist::inv_gamma_draw(shape, rate, rng)?;
    }
    for i in 0..state.n_pops {
        let s2 = state.sigma2_nu[i];
        for x in 0..state.n_ages {
            for t in 0..state.n_years {
                if !data.is_active(i, x, t) {
                    continue;
                }
                let idx = state.cell_idx(i, x, t);
                let current = state.nu[idx];
                let log_cur = poisson_loglik(data, state, LoglikScope::Cell(i, x, t), false)
                    + normal_logkernel(current, 0.0, s2);
                let sd = tuner.proposal_sd(MhFamily::Nu, idx);
                let proposal = current + dist::normal_draw(0.0, sd, rng);
                state.nu[idx] = proposal;
                let log_prop = poisson_loglik(data, state, LoglikScope::Cell(i, x, t), false)
                    + normal_logkernel(proposal, 0.0, s2);
                let accepted = mh_accept(log_cur, log_prop, rng.random())?;
                if !accepted {
                    state.nu[idx] = current;
                }
                tuner.record(MhFamily::Nu, idx, accepted);
            }
        }
    }
    Ok(())
}
