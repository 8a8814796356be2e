//! Canonical flattening of a [`ModelState`] into named scalar parameters.
//!
//! Draw files, the binary draw cache and posterior summary tables all walk
//! the same layout, so a column index means the same parameter everywhere.

use super::ModelState;

/// One scalar parameter's position in the canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamEntry {
    /// Parameter block, for example `alpha` or `sigma2_kappa_pop`.
    pub block: &'static str,
    /// Population the scalar belongs to; `None` for shared parameters.
    pub population: Option<usize>,
    /// Flat index inside the block and population. Age-by-year blocks use
    /// `age_row * n_years + year_column`.
    pub index: usize,
    /// Unique column name, `block[population][index...]` style.
    pub name: String,
}

/// The canonical scalar ordering for states of one shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    n_pops: usize,
    n_ages: usize,
    n_years: usize,
    with_overdispersion: bool,
    entries: Vec<ParamEntry>,
}

impl ParamLayout {
    /// Layout for states of the given shape. With `with_overdispersion`
    /// false, the `sigma2_nu` and `nu` blocks are left out entirely, which
    /// matches chains run without that layer.
    pub fn new(n_pops: usize, n_ages: usize, n_years: usize, with_overdispersion: bool) -> Self {
        let mut entries = Vec::new();
        let mut push = |block: &'static str, population: Option<usize>, index: usize, name: String| {
            entries.push(ParamEntry { block, population, index, name });
        };

        for i in 0..n_pops {
            for x in 0..n_ages {
                push("alpha", Some(i), x, format!("alpha[{i}][{x}]"));
            }
        }
        for x in 0..n_ages {
            push("beta", None, x, format!("beta[{x}]"));
        }
        for i in 0..n_pops {
            for x in 0..n_ages {
                push("beta_pop", Some(i), x, format!("beta_pop[{i}][{x}]"));
            }
        }
        for t in 0..n_years {
            push("kappa", None, t, format!("kappa[{t}]"));
        }
        for i in 0..n_pops {
            for t in 0..n_years {
                push("kappa_pop", Some(i), t, format!("kappa_pop[{i}][{t}]"));
            }
        }
        for l in 0..2 {
            push("phi", None, l, format!("phi[{l}]"));
        }
        for i in 0..n_pops {
            for l in 0..2 {
                push("phi_pop", Some(i), l, format!("phi_pop[{i}][{l}]"));
            }
        }
        for i in 0..n_pops {
            for l in 0..2 {
                push("w", Some(i), l, format!("w[{i}][{l}]"));
            }
        }
        for i in 0..n_pops {
            push("p_incl", Some(i), 0, format!("p_incl[{i}]"));
        }
        push("rho", None, 0, "rho".to_string());
        for i in 0..n_pops {
            push("rho_pop", Some(i), 0, format!("rho_pop[{i}]"));
        }
        push("sigma2_beta", None, 0, "sigma2_beta".to_string());
        for i in 0..n_pops {
            push("sigma2_beta_pop", Some(i), 0, format!("sigma2_beta_pop[{i}]"));
        }
        push("sigma2_kappa", None, 0, "sigma2_kappa".to_string());
        for i in 0..n_pops {
            push("sigma2_kappa_pop", Some(i), 0, format!("sigma2_kappa_pop[{i}]"));
        }
        if with_overdispersion {
            for i in 0..n_pops {
                push("sigma2_nu", Some(i), 0, format!("sigma2_nu[{i}]"));
            }
            for i in 0..n_pops {
                for x in 0..n_ages {
                    for t in 0..n_years {
                        push("nu", Some(i), x * n_years + t, format!("nu[{i}][{x}][{t}]"));
                    }
                }
            }
        }

        Self { n_pops, n_ages, n_years, with_overdispersion, entries }
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn matches(&self, state: &ModelState) -> bool {
        state.n_pops == self.n_pops
            && state.n_ages == self.n_ages
            && state.n_years == self.n_years
    }

    /// All scalar values of one state in layout order. Inclusion indicators
    /// are encoded as 0 and 1.
    pub fn extract(&self, state: &ModelState) -> Vec<f64> {
        assert!(self.matches(state), "state shape does not match layout");
        let mut out = Vec::with_capacity(self.entries.len());
        out.extend_from_slice(&state.alpha);
        out.extend_from_slice(&state.beta);
        out.extend_from_slice(&state.beta_pop);
        out.extend_from_slice(&state.kappa);
        out.extend_from_slice(&state.kappa_pop);
        out.extend_from_slice(&state.phi);
        for phi in &state.phi_pop {
            out.extend_from_slice(phi);
        }
        for w in &state.w {
            out.push(f64::from(u8::from(w[0])));
            out.push(f64::from(u8::from(w[1])));
        }
        out.extend_from_slice(&state.p_incl);
        out.push(state.rho);
        out.extend_from_slice(&state.rho_pop);
        out.push(state.sigma2_beta);
        out.extend_from_slice(&state.sigma2_beta_pop);
        out.push(state.sigma2_kappa);
        out.extend_from_slice(&state.sigma2_kappa_pop);
        if self.with_overdispersion {
            out.extend_from_slice(&state.sigma2_nu);
            out.extend_from_slice(&state.nu);
        }
        debug_assert_eq!(out.len(), self.entries.len());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_count_matches_dimensions() {
        let (p, m, n) = (2, 3, 4);
        let with = ParamLayout::new(p, m, n, true);
        let scalar_blocks = 2 + p * 4 + 1 + p * 2; // phi + phi_pop/w/p_incl + rho + rho_pop &c.
        let expect = p * m // alpha
            + m // beta
            + p * m // beta_pop
            + n // kappa
            + p * n // kappa_pop
            + scalar_blocks
            + 1 + p // sigma2_beta, sigma2_beta_pop
            + 1 + p // sigma2_kappa, sigma2_kappa_pop
            + p // sigma2_nu
            + p * m * n; // nu
        assert_eq!(with.len(), expect);
        let without = ParamLayout::new(p, m, n, false);
        assert_eq!(without.len(), expect - p - p * m * n);
        assert!(without.entries().iter().all(|e| e.block != "nu" && e.block != "sigma2_nu"));
    }

    #[test]
    fn extract_agrees_with_names() {
        let (p, m, n) = (2, 3, 4);
        let layout = ParamLayout::new(p, m, n, true);
        let mut state = ModelState::baseline(p, m, n);
        let age = state.age_idx(1, 2);
        state.alpha[age] = -7.5;
        state.kappa[3] = 2.25;
        state.w[1] = [true, false];
        let cell = state.cell_idx(0, 1, 2);
        state.nu[cell] = 0.125;
        let values = layout.extract(&state);
        let find = |name: &str| {
            let pos = layout.entries().iter().position(|e| e.name == name).unwrap();
            values[pos]
        };
        assert_eq!(find("alpha[1][2]"), -7.5);
        assert_eq!(find("kappa[3]"), 2.25);
        assert_eq!(find("w[1][0]"), 1.0);
        assert_eq!(find("w[1][1]"), 0.0);
        assert_eq!(find("nu[0][1][2]"), 0.125);
        assert_eq!(find("rho"), 0.0);
    }

    #[test]
    fn names_are_unique() {
        let layout = ParamLayout::new(2, 3, 4, true);
        let mut names: Vec<_> = layout.entries().iter().map(|e| e.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), layout.len());
    }

    #[test]
    fn mismatched_state_panics() {
        let layout = ParamLayout::new(1, 2, 3, true);
        let state = ModelState::baseline(1, 2, 4);
        assert!(std::panic::catch_unwind(|| layout.extract(&state)).is_err());
    }
}
