//! Shared numeric oracles for the integration tests: quadrature posterior
//! moments, first-principles AR(1) path densities, and dense Gaussian
//! conditionals. Everything here deliberately avoids the crate's own
//! linear-algebra shortcuts so that agreement is evidence, not tautology.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Composite-Simpson posterior mean and variance of a scalar with
/// unnormalized log-density `logpdf` on `[lo, hi]`. Panics if the window
/// visibly truncates the distribution.
pub fn posterior_moments_on(lo: f64, hi: f64, logpdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = 40_000usize;
    let h = (hi - lo) / n as f64;
    let logs: Vec<f64> = (0..=n).map(|i| logpdf(lo + h * i as f64)).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(max.is_finite(), "log-density never finite on [{lo}, {hi}]");
    assert!(
        logs[0] - max < -55.0 && logs[n] - max < -55.0,
        "window [{lo}, {hi}] clips the density: edges at {:.1} and {:.1} below the mode",
        logs[0] - max,
        logs[n] - max
    );
    let weight = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, l) in logs.iter().enumerate() {
        let x = lo + h * i as f64;
        let w = weight(i) * (l - max).exp();
        z += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

/// Simpson moments on a closed support where the density may stay positive
/// up to the edges, such as a truncation interval.
pub fn posterior_moments_bounded(lo: f64, hi: f64, logpdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = 40_000usize;
    let h = (hi - lo) / n as f64;
    let logs: Vec<f64> = (0..=n).map(|i| logpdf(lo + h * i as f64)).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(max.is_finite(), "log-density never finite on [{lo}, {hi}]");
    let weight = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, l) in logs.iter().enumerate() {
        let x = lo + h * i as f64;
        let w = weight(i) * (l - max).exp();
        z += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

/// Like [`posterior_moments_on`] but grows the window symmetrically around
/// `center` until the edges are negligible.
pub fn posterior_moments_auto(
    center: f64,
    initial_halfwidth: f64,
    support_lo: Option<f64>,
    logpdf: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let mut half = initial_halfwidth;
    for _ in 0..40 {
        let lo = match support_lo {
            Some(s) => (center - half).max(s),
            None => center - half,
        };
        let hi = center + half;
        let probe = |x: f64| logpdf(x);
        let n = 400usize;
        let h = (hi - lo) / n as f64;
        let logs: Vec<f64> = (0..=n).map(|i| probe(lo + h * i as f64)).collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo_ok = logs[0] - max < -60.0 || support_lo.is_some_and(|s| lo - s < 1e-300);
        if max.is_finite() && lo_ok && logs[n] - max < -60.0 {
            return posterior_moments_on(lo, hi, logpdf);
        }
        half *= 2.0;
    }
    panic!("no window around {center} captured the density");
}

/// Posterior moments of a positive scalar, integrating over `y = ln x` so
/// that polynomial right tails in `x` become exponential in `y` and a
/// fixed node count can resolve both the bulk and the tails. The window
/// grows from `center` until the mass and second-moment integrands have
/// dropped 60 logs below their value at the center.
pub fn posterior_moments_positive(center: f64, logpdf: impl Fn(f64) -> f64) -> (f64, f64) {
    assert!(center > 0.0, "positive-support oracle needs a positive center");
    let yc = center.ln();
    let g0 = |y: f64| logpdf(y.exp()) + y;
    let g2 = |y: f64| logpdf(y.exp()) + 3.0 * y;
    let (anchor0, anchor2) = (g0(yc), g2(yc));
    assert!(anchor0.is_finite(), "log-density not finite at the center {center}");
    let mut left = 2.0;
    while g0(yc - left) - anchor0 >= -60.0 {
        left *= 2.0;
        assert!(left < 1e6, "left tail never decays below the center anchor");
    }
    let mut right = 2.0;
    while g2(yc + right) - anchor2 >= -60.0 {
        right *= 2.0;
        assert!(right < 1e6, "right tail never decays below the center anchor");
    }
    let n = 40_000usize;
    let (lo, hi) = (yc - left, yc + right);
    let h = (hi - lo) / n as f64;
    let logs: Vec<f64> = (0..=n).map(|i| g0(lo + h * i as f64)).collect();
    let max0 = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max2 = logs
        .iter()
        .enumerate()
        .map(|(i, l)| l + 2.0 * (lo + h * i as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        logs[0] - max0 < -55.0 && logs[n] + 2.0 * hi - max2 < -55.0,
        "log-space window [{lo}, {hi}] clips the density"
    );
    let weight = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, l) in logs.iter().enumerate() {
        let x = (lo + h * i as f64).exp();
        let w = weight(i) * (l - max0).exp();
        z += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

/// Log of the integral of `exp(logf)` over `[lo, hi]` by composite
/// Simpson, with the same edge guard as the moment quadratures.
pub fn log_integral_on(lo: f64, hi: f64, logf: impl Fn(f64) -> f64) -> f64 {
    let n = 40_000usize;
    let h = (hi - lo) / n as f64;
    let logs: Vec<f64> = (0..=n).map(|i| logf(lo + h * i as f64)).collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(max.is_finite(), "log-integrand never finite on [{lo}, {hi}]");
    assert!(
        logs[0] - max < -55.0 && logs[n] - max < -55.0,
        "window [{lo}, {hi}] clips the integrand: edges at {:.1} and {:.1} below the peak",
        logs[0] - max,
        logs[n] - max
    );
    let weight = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let sum: f64 = logs.iter().enumerate().map(|(i, l)| weight(i) * (l - max).exp()).sum();
    max + (sum * h / 3.0).ln()
}

/// Log-density of an AR(1) path around a trend, written directly as the
/// product of innovation normals: the first deviation at the full
/// innovation scale, later ones conditional on the previous deviation.
pub fn ar1_path_logpdf(path: &[f64], trend: &[f64], rho: f64, sigma2: f64) -> f64 {
    let n = path.len();
    let r: Vec<f64> = path.iter().zip(trend).map(|(k, e)| k - e).collect();
    let mut quad = r[0] * r[0];
    for t in 1..n {
        let innov = r[t] - rho * r[t - 1];
        quad += innov * innov;
    }
    -0.5 * n as f64 * (2.0 * std::f64::consts::PI * sigma2).ln() - quad / (2.0 * sigma2)
}

pub fn normal_logpdf(x: f64, mean: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return f64::NEG_INFINITY;
    }
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mean) * (x - mean) / (2.0 * var)
}

pub fn inv_gamma_logpdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    -(shape + 1.0) * x.ln() - rate / x
}

pub fn gamma_logpdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (shape - 1.0) * x.ln() - rate * x
}

/// Mean and variance of an inverse-gamma, defined for shape > 2.
pub fn inv_gamma_moments(shape: f64, rate: f64) -> (f64, f64) {
    assert!(shape > 2.0, "inverse-gamma variance needs shape > 2, got {shape}");
    let mean = rate / (shape - 1.0);
    (mean, rate * rate / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0)))
}

pub fn gamma_moments(shape: f64, rate: f64) -> (f64, f64) {
    (shape / rate, shape / (rate * rate))
}

pub fn beta_moments(a: f64, b: f64) -> (f64, f64) {
    let mean = a / (a + b);
    (mean, a * b / ((a + b) * (a + b) * (a + b + 1.0)))
}

/// Mean and variance of a normal truncated to `(lo, hi)`, via the standard
/// Mills-ratio identities evaluated with the crate-independent erf-based
/// normal CDF from statrs.
pub fn truncated_normal_moments(mean: f64, var: f64, lo: f64, hi: f64) -> (f64, f64) {
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let sd = var.sqrt();
    let std = Normal::new(0.0, 1.0).unwrap();
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    let zden = std.cdf(b) - std.cdf(a);
    assert!(zden > 1e-12, "truncation keeps no mass");
    let pa = std.pdf(a);
    let pb = std.pdf(b);
    let m = mean + sd * (pa - pb) / zden;
    let v = var * (1.0 + (a * pa - b * pb) / zden - ((pa - pb) / zden).powi(2));
    (m, v)
}

/// Dense AR(1) precision built from the unit-lower-bidiagonal innovation
/// operator by explicit matrix multiplication.
pub fn dense_precision(rho: f64, n: usize) -> DMatrix<f64> {
    let mut u = DMatrix::identity(n, n);
    for t in 1..n {
        u[(t, t - 1)] = -rho;
    }
    u.transpose() * u
}

/// Conditional mean and variance of coordinate `t` of a Gaussian with mean
/// `trend` and covariance `sigma2 * Q^{-1}`, given all other coordinates of
/// `path`, computed by dense partitioned inversion.
pub fn dense_conditional(
    path: &[f64],
    trend: &[f64],
    rho: f64,
    sigma2: f64,
    t: usize,
) -> (f64, f64) {
    let n = path.len();
    let q = dense_precision(rho, n);
    let cov = q.try_inverse().expect("AR(1) precision is invertible") * sigma2;
    let others: Vec<usize> = (0..n).filter(|&j| j != t).collect();
    let s_oo = DMatrix::from_fn(n - 1, n - 1, |r, c| cov[(others[r], others[c])]);
    let s_to = DMatrix::from_fn(1, n - 1, |_, c| cov[(t, others[c])]);
    let dev = DVector::from_fn(n - 1, |r, _| path[others[r]] - trend[others[r]]);
    let solve = s_oo.clone().try_inverse().expect("principal minor invertible");
    let mean = trend[t] + (&s_to * &solve * dev)[(0, 0)];
    let var = cov[(t, t)] - (&s_to * &solve * s_to.transpose())[(0, 0)];
    (mean, var)
}

/// Relative error against an oracle value, guarding tiny denominators.
pub fn rel_err(value: f64, oracle: f64) -> f64 {
    (value - oracle).abs() / oracle.abs().max(1e-12)
}

/// Deterministic xorshift stream for building toy instances without
/// depending on the crate's RNG plumbing.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
