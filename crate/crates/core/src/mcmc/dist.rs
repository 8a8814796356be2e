//! Draws from the distribution families the sampler needs, with numeric
//! guards so a pathological draw surfaces as an error instead of a NaN.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

use super::McmcError;

const RETRIES: usize = 100;

/// Gamma draw in shape/rate parameterization.
pub fn gamma_draw<R: Rng>(shape: f64, rate: f64, rng: &mut R) -> Result<f64, McmcError> {
    if !(shape > 0.0 && rate > 0.0) {
        return Err(McmcError::Sampling(format!(
            "gamma parameters out of range: shape {shape}, rate {rate}"
        )));
    }
    let dist = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| McmcError::Sampling(format!("gamma({shape}, rate {rate}): {e}")))?;
    for _ in 0..RETRIES {
        let x = dist.sample(rng);
        if x > 0.0 && x.is_finite() {
            return Ok(x);
        }
    }
    Err(McmcError::Sampling(format!(
        "gamma({shape}, rate {rate}) kept producing degenerate draws"
    )))
}

/// Inverse-gamma draw: the reciprocal of a shape/rate gamma draw.
pub fn inv_gamma_draw<R: Rng>(shape: f64, rate: f64, rng: &mut R) -> Result<f64, McmcError> {
    gamma_draw(shape, rate, rng).map(|g| 1.0 / g)
}

pub fn normal_draw<R: Rng>(mean: f64, sd: f64, rng: &mut R) -> f64 {
    debug_assert!(sd >= 0.0);
    Normal::new(mean, sd).expect("normal parameters").sample(rng)
}

pub fn beta_draw<R: Rng>(a: f64, b: f64, rng: &mut R) -> Result<f64, McmcError> {
    let dist = Beta::new(a, b)
        .map_err(|e| McmcError::Sampling(format!("beta({a}, {b}): {e}")))?;
    let x: f64 = dist.sample(rng);
    Ok(x.clamp(1e-12, 1.0 - 1e-12))
}

/// Truncated normal on (lo, hi) by inverse CDF, mapped onto the nearer tail
/// for numeric resolution, with a rejection fallback on extreme intervals.
pub fn truncated_normal_draw<R: Rng>(
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64, McmcError> {
    assert!(lo < hi && sd > 0.0);
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    if a > 0.0 {
        // Both bounds above the mean: mirror into the lower tail where the
        // CDF values are small and well resolved.
        return truncated_normal_draw(-mean, sd, -hi, -lo, rng).map(|x| -x);
    }
    let std = NormalDist::new(0.0, 1.0).expect("standard normal");
    let fa = std.cdf(a);
    let fb = std.cdf(b);
    let mass = fb - fa;
    if mass >= 1e-300 {
        let u: f64 = rng.random();
        let z = std.inverse_cdf(fa + u * mass).clamp(a, b);
        return Ok((mean + sd * z).clamp(lo, hi));
    }
    // The CDF difference underflowed, so the interval sits deep in the left
    // tail. Mirror it into the right tail and use a translated-exponential
    // proposal, which stays efficient however far out the interval lies.
    let (ta, tb) = (-b, -a);
    if ta > 0.0 {
        let lambda = 0.5 * (ta + (ta * ta + 4.0).sqrt());
        for _ in 0..100_000 {
            let y = ta - rng.random::<f64>().ln() / lambda;
            if y > tb {
                continue;
            }
            let v: f64 = rng.random();
            if v <= (-0.5 * (y - lambda) * (y - lambda)).exp() {
                return Ok((mean - sd * y).clamp(lo, hi));
            }
        }
    }
    Err(McmcError::TruncatedMassUnderflow { mean, sd })
}

/// Bivariate normal draw through a hand-rolled 2x2 Cholesky factor.
pub fn mvn2_draw<R: Rng>(
    mean: Vector2<f64>,
    cov: Matrix2<f64>,
    rng: &mut R,
) -> Result<Vector2<f64>, McmcError> {
    let c00 = cov[(0, 0)];
    if !(c00 > 0.0 && c00.is_finite()) {
        return Err(McmcError::NotPositiveDefinite(format!("leading entry {c00}")));
    }
    let l00 = c00.sqrt();
    let l10 = cov[(1, 0)] / l00;
    let d = cov[(1, 1)] - l10 * l10;
    if !(d > 0.0 && d.is_finite()) {
        return Err(McmcError::NotPositiveDefinite(format!("Schur complement {d}")));
    }
    let l11 = d.sqrt();
    let z0 = normal_draw(0.0, 1.0, rng);
    let z1 = normal_draw(0.0, 1.0, rng);
    Ok(Vector2::new(mean[0] + l00 * z0, mean[1] + l10 * z0 + l11 * z1))
}

pub fn bernoulli_draw<R: Rng>(p: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    u < p
}

/// Poisson draw for a non-negative finite mean.
pub fn poisson_draw<R: Rng>(mean: f64, rng: &mut R) -> Result<u64, McmcError> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(McmcError::Sampling(format!("poisson mean {mean} out of range")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = rand_distr::Poisson::new(mean)
        .map_err(|e| McmcError::Sampling(format!("poisson({mean}): {e}")))?;
    let x: f64 = dist.sample(rng);
    Ok(x.max(0.0).round() as u64)
}
