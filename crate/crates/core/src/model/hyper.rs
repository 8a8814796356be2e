//! Prior hyperparameters.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Hyperparameters of every prior in the model. Per-population entries are
/// indexed like the dataset's population axis.
///
/// Naming follows the parameters they govern: `a_*`/`b_*` are shape/rate
/// pairs of Gamma or inverse-Gamma priors, `sigma2_rho*` are the variances
/// of the truncated-normal priors on the autocorrelations, and
/// `phi0`/`sigma0_diag` give the mean and diagonal covariance of the
/// bivariate normal prior on the common drift coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Gamma prior on the age-specific exposure scaling `e_x`.
    pub a_e: f64,
    pub b_e: f64,
    /// Inverse-Gamma prior on the common age-profile variance.
    pub a_beta: f64,
    pub b_beta: f64,
    /// Inverse-Gamma priors on the population age-profile variances.
    pub a_beta_pop: Vec<f64>,
    pub b_beta_pop: Vec<f64>,
    /// Inverse-Gamma priors on the cell-level overdispersion variances.
    pub a_nu: Vec<f64>,
    pub b_nu: Vec<f64>,
    /// Inverse-Gamma prior on the common period-innovation variance.
    pub a_kappa: f64,
    pub b_kappa: f64,
    /// Inverse-Gamma priors on the population period-innovation variances.
    pub a_kappa_pop: Vec<f64>,
    pub b_kappa_pop: Vec<f64>,
    /// Variance of the truncated-normal prior on the common autocorrelation.
    pub sigma2_rho: f64,
    /// Same for the population autocorrelations.
    pub sigma2_rho_pop: Vec<f64>,
    /// Mean of the normal prior on the common drift coefficients.
    pub phi0: [f64; 2],
    /// Diagonal of its covariance.
    pub sigma0_diag: [f64; 2],
    /// Beta prior on the drift-component inclusion probability.
    pub a_p: f64,
    pub b_p: f64,
    /// Slab variance multiplier: an included drift coefficient has prior
    /// variance `slab_scale * sigma2` given the innovation variance.
    pub slab_scale: f64,
}

impl Hyperparams {
    /// Defaults used throughout: diffuse variance priors, unit priors on the
    /// exposure scalings and the inclusion probability, and a slab ten times
    /// wider than the innovation scale.
    pub fn reference(n_pops: usize) -> Self {
        Self {
            a_e: 1.0,
            b_e: 1.0,
            a_beta: 0.01,
            b_beta: 0.01,
            a_beta_pop: vec![0.001; n_pops],
            b_beta_pop: vec![0.001; n_pops],
            a_nu: vec![2.5; n_pops],
            b_nu: vec![2.5; n_pops],
            a_kappa: 0.001,
            b_kappa: 0.001,
            a_kappa_pop: vec![0.001; n_pops],
            b_kappa_pop: vec![0.001; n_pops],
            sigma2_rho: 1.0,
            sigma2_rho_pop: vec![0.1; n_pops],
            phi0: [0.0, 0.0],
            sigma0_diag: [10.0, 10.0],
            a_p: 1.0,
            b_p: 1.0,
            slab_scale: 10.0,
        }
    }

    pub fn validate(&self, n_pops: usize) -> Result<(), ModelError> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ModelError::Hyper(format!("{name} must be positive and finite, got {v}")))
            }
        };
        pos(self.a_e, "a_e")?;
        pos(self.b_e, "b_e")?;
        pos(self.a_beta, "a_beta")?;
        pos(self.b_beta, "b_beta")?;
        pos(self.a_kappa, "a_kappa")?;
        pos(self.b_kappa, "b_kappa")?;
        pos(self.sigma2_rho, "sigma2_rho")?;
        pos(self.a_p, "a_p")?;
        pos(self.b_p, "b_p")?;
        pos(self.slab_scale, "slab_scale")?;
        pos(self.sigma0_diag[0], "sigma0_diag[0]")?;
        pos(self.sigma0_diag[1], "sigma0_diag[1]")?;
        if !self.phi0.iter().all(|v| v.is_finite()) {
            return Err(ModelError::Hyper("phi0 must be finite".into()));
        }
        let per_pop: [(&str, &Vec<f64>); 7] = [
            ("a_beta_pop", &self.a_beta_pop),
            ("b_beta_pop", &self.b_beta_pop),
            ("a_nu", &self.a_nu),
            ("b_nu", &self.b_nu),
            ("a_kappa_pop", &self.a_kappa_pop),
            ("b_kappa_pop", &self.b_kappa_pop),
            ("sigma2_rho_pop", &self.sigma2_rho_pop),
        ];
        for (name, vs) in per_pop {
            if vs.len() != n_pops {
                return Err(ModelError::Hyper(format!(
                    "{name} has length {}, expected {n_pops}",
                    vs.len()
                )));
            }
            for &v in vs.iter() {
                pos(v, name)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values_validate() {
        let h = Hyperparams::reference(2);
        h.validate(2).unwrap();
        assert_eq!(h.a_nu, vec![2.5, 2.5]);
        assert_eq!(h.sigma0_diag, [10.0, 10.0]);
    }

    #[test]
    fn wrong_population_count_is_rejected() {
        let h = Hyperparams::reference(2);
        assert!(h.validate(3).is_err());
    }

    #[test]
    fn nonpositive_entries_are_rejected() {
        let mut h = Hyperparams::reference(1);
        h.b_kappa = 0.0;
        assert!(h.validate(1).is_err());
        let mut h = Hyperparams::reference(1);
        h.sigma2_rho_pop[0] = -0.1;
        assert!(h.validate(1).is_err());
    }
}
