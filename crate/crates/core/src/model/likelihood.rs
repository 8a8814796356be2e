//! Poisson observation likelihood and the AR(1) path density.

use crate::data::MortalityDataset;

use super::ModelState;

/// Restriction of a likelihood sum to the cells a parameter touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoglikScope {
    All,
    /// One population, all cells.
    Pop(usize),
    /// One population and age, all years.
    PopAge(usize, usize),
    /// One age across all populations.
    Age(usize),
    /// One year across all populations and ages.
    Year(usize),
    /// One population and year, all ages.
    PopYear(usize, usize),
    /// A single cell.
    Cell(usize, usize, usize),
}

/// Poisson log likelihood over the scoped active cells.
///
/// With `include_constant` the death-count factorial terms are added, giving
/// the exact log density; without it the parameter-free terms are dropped,
/// which is all a Metropolis ratio needs. Returns negative infinity when a
/// cell's log mean exceeds 700, so overflowing proposals are rejected
/// instead of poisoning the chain with infinities.
pub fn poisson_loglik(
    data: &MortalityDataset,
    state: &ModelState,
    scope: LoglikScope,
    include_constant: bool,
) -> f64 {
    let mut total = 0.0;
    let mut cell = |i: usize, x: usize, t: usize| -> bool {
        if !data.is_active(i, x, t) {
            return true;
        }
        let log_mean = data.log_exposure(i, x, t) + state.linear_predictor(i, x, t);
        if log_mean > 700.0 {
            return false;
        }
        let d = data.deaths(i, x, t) as f64;
        total += d * log_mean - log_mean.exp();
        if include_constant {
            total -= data.log_death_factorial(i, x, t);
        }
        true
    };

    let (np, na, ny) = (data.n_pops(), data.n_ages(), data.n_years());
    let ok = match scope {
        LoglikScope::All => (0..np)
            .all(|i| (0..na).all(|x| (0..ny).all(|t| cell(i, x, t)))),
        LoglikScope::Pop(i) => (0..na).all(|x| (0..ny).all(|t| cell(i, x, t))),
        LoglikScope::PopAge(i, x) => (0..ny).all(|t| cell(i, x, t)),
        LoglikScope::Age(x) => (0..np).all(|i| (0..ny).all(|t| cell(i, x, t))),
        LoglikScope::Year(t) => (0..np).all(|i| (0..na).all(|x| cell(i, x, t))),
        LoglikScope::PopYear(i, t) => (0..na).all(|x| cell(i, x, t)),
        LoglikScope::Cell(i, x, t) => cell(i, x, t),
    };
    if ok {
        total
    } else {
        f64::NEG_INFINITY
    }
}

/// Log density of an AR(1) path around a given mean path: the residual is
/// Gaussian with precision `Q / sigma2` where `Q = U'U` is unit-determinant.
/// Both the quadratic form and `log |Q|` go through the bidiagonal factor.
pub fn ar1_logdensity_around(path: &[f64], eta: &[f64], rho: f64, sigma2: f64) -> f64 {
    assert_eq!(path.len(), eta.len());
    assert!(sigma2 > 0.0);
    let n = path.len();
    let resid: Vec<f64> = path.iter().zip(eta).map(|(k, e)| k - e).collect();
    let q = super::ArPrecision::new(rho, n);
    let quad = q.quad_form(&resid);
    -0.5 * n as f64 * (2.0 * std::f64::consts::PI * sigma2).ln() + 0.5 * q.log_det()
        - 0.5 * quad / sigma2
}

/// Log density of the AR(1)-with-drift path prior `N(W phi, sigma2 Q^{-1})`.
pub fn ar1_logdensity(
    series: &[f64],
    phi: [f64; 2],
    rho: f64,
    sigma2: f64,
    design: &super::DriftDesign,
) -> Result<f64, super::ModelError> {
    if series.len() != design.len() {
        return Err(super::ModelError::Dimension(format!(
            "series length {} vs design length {}",
            series.len(),
            design.len()
        )));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(super::ModelError::State(format!("non-positive variance {sigma2}")));
    }
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(super::ModelError::State(format!("autocorrelation {rho} outside (-1, 1)")));
    }
    Ok(ar1_logdensity_around(series, &design.eta(phi), rho, sigma2))
}
