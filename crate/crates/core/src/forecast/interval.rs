//! Posterior summaries: sample median and highest-posterior-density
//! intervals from the shortest window over order statistics.

use crate::mcmc::McmcError;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN samples"));
    v
}

/// Sample median: midpoint of the two central order statistics for even
/// sample sizes.
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of an empty sample");
    let v = sorted(xs);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Highest-posterior-density interval at mass `gamma`: the narrowest of the
/// windows spanning `ceil(gamma * n)` consecutive order statistics. Ties go
/// to the window starting at the smallest value. Needs at least one sample
/// more than the window, so that the choice is not vacuous.
pub fn hpd_interval(xs: &[f64], gamma: f64) -> Result<(f64, f64), McmcError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(McmcError::Config(format!("interval mass {gamma} outside (0, 1)")));
    }
    let n = xs.len();
    let window = (gamma * n as f64).ceil() as usize;
    if n < window + 1 {
        return Err(McmcError::Config(format!(
            "{n} samples cannot resolve a {gamma} HPD interval; need at least {}",
            window + 1
        )));
    }
    if xs.iter().any(|v| v.is_nan()) {
        return Err(McmcError::Config("NaN sample in HPD input".into()));
    }
    let v = sorted(xs);
    let mut best = 0;
    let mut best_width = f64::INFINITY;
    for start in 0..=(n - window) {
        let width = v[start + window - 1] - v[start];
        if width < best_width {
            best_width = width;
            best = start;
        }
    }
    Ok((v[best], v[best + window - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn median_odd_and_even() {
        assert_abs_diff_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_abs_diff_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_abs_diff_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn hpd_picks_the_narrowest_window() {
        // Ten points; gamma 0.5 needs a window of 5 order statistics. The
        // cluster near zero is much tighter than the spread-out tail.
        let xs = [0.0, 0.1, 0.2, 0.3, 0.4, 2.0, 4.0, 6.0, 8.0, 10.0];
        let (lo, hi) = hpd_interval(&xs, 0.5).unwrap();
        assert_abs_diff_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 0.4);
    }

    #[test]
    fn hpd_tie_takes_the_lowest_start() {
        // Evenly spaced points: every window has the same width, so the
        // interval must start at the smallest value.
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let (lo, hi) = hpd_interval(&xs, 0.6).unwrap();
        assert_abs_diff_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 5.0);
    }

    #[test]
    fn hpd_rejects_insufficient_samples() {
        let xs = [1.0, 2.0, 3.0];
        // Window is ceil(0.9 * 3) = 3, needs at least 4 samples.
        assert!(hpd_interval(&xs, 0.9).is_err());
        assert!(hpd_interval(&xs, 0.0).is_err());
        assert!(hpd_interval(&xs, 1.0).is_err());
        assert!(hpd_interval(&[1.0, f64::NAN, 2.0, 3.0], 0.5).is_err());
    }

    #[test]
    fn hpd_covers_about_gamma_mass_on_a_normal_sample() {
        let mut rng = crate::rng::substream(21, 0);
        let xs: Vec<f64> =
            (0..20_000).map(|_| crate::mcmc::dist::normal_draw(0.0, 1.0, &mut rng)).collect();
        let (lo, hi) = hpd_interval(&xs, 0.95).unwrap();
        // The normal 95% HPD interval is symmetric at +-1.96.
        assert!((lo + 1.96).abs() < 0.08, "lo {lo}");
        assert!((hi - 1.96).abs() < 0.08, "hi {hi}");
        let frac =
            xs.iter().filter(|v| **v >= lo && **v <= hi).count() as f64 / xs.len() as f64;
        assert!((frac - 0.95).abs() < 0.01);
    }
}
