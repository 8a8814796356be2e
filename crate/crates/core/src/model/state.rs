//! The full parameter state of one MCMC iteration.

use super::ModelError;

/// All model parameters at one point of the chain.
///
/// Flat layouts: `alpha[pop * n_ages + age]`, `beta_pop[pop * n_ages + age]`,
/// `kappa_pop[pop * n_years + year]`, `nu[(pop * n_ages + age) * n_years + year]`.
///
/// Identifiability is kept by construction: the common age profile sums to
/// one, each population age profile has unit Euclidean norm, and every
/// period path sums to zero. The renormalization maps below restore those
/// constraints after a coordinate move while leaving every cell's linear
/// predictor unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub n_pops: usize,
    pub n_ages: usize,
    pub n_years: usize,

    /// Age intercepts, log scale.
    pub alpha: Vec<f64>,
    /// Common age profile, sums to one.
    pub beta: Vec<f64>,
    /// Population age profiles, unit norm each.
    pub beta_pop: Vec<f64>,
    /// Common period path, sums to zero.
    pub kappa: Vec<f64>,
    /// Population period paths, each sums to zero.
    pub kappa_pop: Vec<f64>,
    /// Common drift coefficients (intercept, slope).
    pub phi: [f64; 2],
    /// Population drift coefficients; an excluded component is exactly zero.
    pub phi_pop: Vec<[f64; 2]>,
    /// Inclusion indicators matching `phi_pop`.
    pub w: Vec<[bool; 2]>,
    /// Per-population inclusion probabilities.
    pub p_incl: Vec<f64>,
    /// Common and population autocorrelations, inside (-1, 1).
    pub rho: f64,
    pub rho_pop: Vec<f64>,
    /// Variance of the common age profile around its mean.
    pub sigma2_beta: f64,
    pub sigma2_beta_pop: Vec<f64>,
    /// Innovation variances of the period paths.
    pub sigma2_kappa: f64,
    pub sigma2_kappa_pop: Vec<f64>,
    /// Cell-level overdispersion terms and their variances; all zero when
    /// the overdispersion layer is disabled.
    pub nu: Vec<f64>,
    pub sigma2_nu: Vec<f64>,
}

impl ModelState {
    /// A constraint-satisfying baseline state: flat profiles, zero paths,
    /// unit variances, both drift components included.
    pub fn baseline(n_pops: usize, n_ages: usize, n_years: usize) -> Self {
        assert!(n_pops > 0 && n_ages > 0 && n_years > 0);
        Self {
            n_pops,
            n_ages,
            n_years,
            alpha: vec![0.0; n_pops * n_ages],
            beta: vec![1.0 / n_ages as f64; n_ages],
            beta_pop: vec![1.0 / (n_ages as f64).sqrt(); n_pops * n_ages],
            kappa: vec![0.0; n_years],
            kappa_pop: vec![0.0; n_pops * n_years],
            phi: [0.0, 0.0],
            phi_pop: vec![[0.0, 0.0]; n_pops],
            w: vec![[true, true]; n_pops],
            p_incl: vec![0.5; n_pops],
            rho: 0.0,
            rho_pop: vec![0.0; n_pops],
            sigma2_beta: 1.0,
            sigma2_beta_pop: vec![1.0; n_pops],
            sigma2_kappa: 1.0,
            sigma2_kappa_pop: vec![1.0; n_pops],
            nu: vec![0.0; n_pops * n_ages * n_years],
            sigma2_nu: vec![1.0; n_pops],
        }
    }

    #[inline]
    pub fn age_idx(&self, pop: usize, age: usize) -> usize {
        pop * self.n_ages + age
    }

    #[inline]
    pub fn year_idx(&self, pop: usize, year: usize) -> usize {
        pop * self.n_years + year
    }

    #[inline]
    pub fn cell_idx(&self, pop: usize, age: usize, year: usize) -> usize {
        (pop * self.n_ages + age) * self.n_years + year
    }

    /// Log mortality rate for one cell.
    #[inline]
    pub fn linear_predictor(&self, pop: usize, age: usize, year: usize) -> f64 {
        self.alpha[self.age_idx(pop, age)]
            + self.beta[age] * self.kappa[year]
            + self.beta_pop[self.age_idx(pop, age)] * self.kappa_pop[self.year_idx(pop, year)]
            + self.nu[self.cell_idx(pop, age, year)]
    }

    /// Every cell's linear predictor, in `cell_idx` order.
    pub fn predictor_grid(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_pops * self.n_ages * self.n_years);
        for i in 0..self.n_pops {
            for x in 0..self.n_ages {
                for t in 0..self.n_years {
                    out.push(self.linear_predictor(i, x, t));
                }
            }
        }
        out
    }

    /// Divide the common age profile by its sum and absorb the factor into
    /// the common period path. Predictors are unchanged. Fails when the sum
    /// is too close to zero to divide by.
    pub fn rescale_beta_common(&mut self) -> Result<(), ModelError> {
        let s: f64 = self.beta.iter().sum();
        if !(s.abs() > 1e-12) {
            return Err(ModelError::State(format!("common age profile sum {s} too close to zero")));
        }
        for b in &mut self.beta {
            *b /= s;
        }
        for k in &mut self.kappa {
            *k *= s;
        }
        Ok(())
    }

    /// Divide one population age profile by its norm and absorb the factor
    /// into that population's period path. Predictors are unchanged.
    pub fn rescale_beta_pop(&mut self, pop: usize) -> Result<(), ModelError> {
        let lo = pop * self.n_ages;
        let s: f64 = self.beta_pop[lo..lo + self.n_ages].iter().map(|b| b * b).sum::<f64>().sqrt();
        if !(s > 1e-12) {
            return Err(ModelError::State(format!(
                "population {pop} age profile norm {s} too close to zero"
            )));
        }
        for b in &mut self.beta_pop[lo..lo + self.n_ages] {
            *b /= s;
        }
        let tlo = pop * self.n_years;
        for k in &mut self.kappa_pop[tlo..tlo + self.n_years] {
            *k *= s;
        }
        Ok(())
    }

    /// Subtract the mean of the common period path and absorb it into every
    /// intercept through the common age profile. Predictors are unchanged.
    pub fn recenter_kappa_common(&mut self) {
        let m: f64 = self.kappa.iter().sum::<f64>() / self.n_years as f64;
        for k in &mut self.kappa {
            *k -= m;
        }
        for i in 0..self.n_pops {
            for x in 0..self.n_ages {
                self.alpha[i * self.n_ages + x] += self.beta[x] * m;
            }
        }
    }

    /// Same recentering for one population's period path, absorbed through
    /// that population's age profile.
    pub fn recenter_kappa_pop(&mut self, pop: usize) {
        let tlo = pop * self.n_years;
        let m: f64 =
            self.kappa_pop[tlo..tlo + self.n_years].iter().sum::<f64>() / self.n_years as f64;
        for k in &mut self.kappa_pop[tlo..tlo + self.n_years] {
            *k -= m;
        }
        for x in 0..self.n_ages {
            self.alpha[pop * self.n_ages + x] += self.beta_pop[pop * self.n_ages + x] * m;
        }
    }

    /// Check dimensions, finiteness, constraint residuals, and parameter
    /// ranges. Sum constraints are allowed `tol` per element; the unit norm
    /// constraint is allowed `tol` outright.
    pub fn check_invariants(&self, tol: f64) -> Result<(), ModelError> {
        let (p, m, n) = (self.n_pops, self.n_ages, self.n_years);
        let dims_ok = self.alpha.len() == p * m
            && self.beta.len() == m
            && self.beta_pop.len() == p * m
            && self.kappa.len() == n
            && self.kappa_pop.len() == p * n
            && self.phi_pop.len() == p
            && self.w.len() == p
            && self.p_incl.len() == p
            && self.rho_pop.len() == p
            && self.sigma2_beta_pop.len() == p
            && self.sigma2_kappa_pop.len() == p
            && self.nu.len() == p * m * n
            && self.sigma2_nu.len() == p;
        if !dims_ok {
            return Err(ModelError::Dimension("state vector lengths".into()));
        }

        let all_finite = self.alpha.iter().all(|v| v.is_finite())
            && self.beta.iter().all(|v| v.is_finite())
            && self.beta_pop.iter().all(|v| v.is_finite())
            && self.kappa.iter().all(|v| v.is_finite())
            && self.kappa_pop.iter().all(|v| v.is_finite())
            && self.phi.iter().all(|v| v.is_finite())
            && self.phi_pop.iter().flatten().all(|v| v.is_finite())
            && self.nu.iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(ModelError::State("non-finite parameter".into()));
        }

        let beta_sum: f64 = self.beta.iter().sum();
        if (beta_sum - 1.0).abs() > tol * m as f64 {
            return Err(ModelError::State(format!("common age profile sums to {beta_sum}")));
        }
        let kappa_sum: f64 = self.kappa.iter().sum();
        if kappa_sum.abs() > tol * n as f64 {
            return Err(ModelError::State(format!("common period path sums to {kappa_sum}")));
        }
        for i in 0..p {
            let lo = i * m;
            let norm: f64 =
                self.beta_pop[lo..lo + m].iter().map(|b| b * b).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > tol {
                return Err(ModelError::State(format!(
                    "population {i} age profile has norm {norm}"
                )));
            }
            let tlo = i * n;
            let ksum: f64 = self.kappa_pop[tlo..tlo + n].iter().sum();
            if ksum.abs() > tol * n as f64 {
                return Err(ModelError::State(format!(
                    "population {i} period path sums to {ksum}"
                )));
            }
        }

        if !(self.rho > -1.0 && self.rho < 1.0) {
            return Err(ModelError::State(format!("common autocorrelation {} outside (-1, 1)", self.rho)));
        }
        for (i, &r) in self.rho_pop.iter().enumerate() {
            if !(r > -1.0 && r < 1.0) {
                return Err(ModelError::State(format!(
                    "population {i} autocorrelation {r} outside (-1, 1)"
                )));
            }
        }
        for (i, &pr) in self.p_incl.iter().enumerate() {
            if !(pr >= 0.0 && pr <= 1.0) {
                return Err(ModelError::State(format!(
                    "population {i} inclusion probability {pr}"
                )));
            }
        }
        let var_ok = |v: f64| v > 0.0 && v.is_finite();
        if !var_ok(self.sigma2_beta) || !var_ok(self.sigma2_kappa) {
            return Err(ModelError::State("non-positive common variance".into()));
        }
        for i in 0..p {
            if !var_ok(self.sigma2_beta_pop[i])
                || !var_ok(self.sigma2_kappa_pop[i])
                || !var_ok(self.sigma2_nu[i])
            {
                return Err(ModelError::State(format!("non-positive variance for population {i}")));
            }
        }
        for (i, (wi, phi)) in self.w.iter().zip(&self.phi_pop).enumerate() {
            for l in 0..2 {
                if !wi[l] && phi[l] != 0.0 {
                    return Err(ModelError::State(format!(
                        "population {i} drift component {l} excluded but nonzero"
                    )));
                }
            }
        }
        Ok(())
    }
}
