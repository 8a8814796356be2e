//! Adaptive random-walk proposal scales, tuned toward a 20% to 40%
//! acceptance band during burn-in and frozen afterwards.

/// The Metropolis-updated coordinate families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MhFamily {
    Alpha,
    BetaCommon,
    BetaPop,
    KappaCommon,
    KappaPop,
    Nu,
}

impl MhFamily {
    pub const ALL: [MhFamily; 6] = [
        MhFamily::Alpha,
        MhFamily::BetaCommon,
        MhFamily::BetaPop,
        MhFamily::KappaCommon,
        MhFamily::KappaPop,
        MhFamily::Nu,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MhFamily::Alpha => "alpha",
            MhFamily::BetaCommon => "beta_common",
            MhFamily::BetaPop => "beta_pop",
            MhFamily::KappaCommon => "kappa_common",
            MhFamily::KappaPop => "kappa_pop",
            MhFamily::Nu => "nu",
        }
    }
}

#[derive(Debug, Clone)]
struct FamilySlots {
    sds: Vec<f64>,
    window_accepts: Vec<u32>,
    window_attempts: Vec<u32>,
    adapt_accepts: u64,
    adapt_attempts: u64,
    frozen_accepts: u64,
    frozen_attempts: u64,
}

impl FamilySlots {
    fn new(count: usize, init_sd: f64) -> Self {
        Self {
            sds: vec![init_sd; count],
            window_accepts: vec![0; count],
            window_attempts: vec![0; count],
            adapt_accepts: 0,
            adapt_attempts: 0,
            frozen_accepts: 0,
            frozen_attempts: 0,
        }
    }
}

/// Per-coordinate proposal standard deviations with windowed acceptance
/// tracking. While adapting, a coordinate whose windowed acceptance leaves
/// the `[0.20, 0.40]` band has its scale multiplied by 1.1 (too high) or
/// 0.9 (too low) at the end of each 50-attempt window. Once frozen the
/// scales never change again, keeping the post-burn-in kernel fixed.
#[derive(Debug, Clone)]
pub struct MhTuner {
    adapting: bool,
    window: u32,
    alpha: FamilySlots,
    beta_common: FamilySlots,
    beta_pop: FamilySlots,
    kappa_common: FamilySlots,
    kappa_pop: FamilySlots,
    nu: FamilySlots,
}

const WINDOW: u32 = 50;
const BAND_LO: f64 = 0.20;
const BAND_HI: f64 = 0.40;
const GROW: f64 = 1.1;
const SHRINK: f64 = 0.9;

impl MhTuner {
    pub fn new(n_pops: usize, n_ages: usize, n_years: usize) -> Self {
        Self {
            adapting: true,
            window: WINDOW,
            alpha: FamilySlots::new(n_pops * n_ages, 0.1),
            beta_common: FamilySlots::new(n_ages, 0.02),
            beta_pop: FamilySlots::new(n_pops * n_ages, 0.05),
            kappa_common: FamilySlots::new(n_years, 0.5),
            kappa_pop: FamilySlots::new(n_pops * n_years, 0.5),
            nu: FamilySlots::new(n_pops * n_ages * n_years, 0.2),
        }
    }

    fn family(&self, f: MhFamily) -> &FamilySlots {
        match f {
            MhFamily::Alpha => &self.alpha,
            MhFamily::BetaCommon => &self.beta_common,
            MhFamily::BetaPop => &self.beta_pop,
            MhFamily::KappaCommon => &self.kappa_common,
            MhFamily::KappaPop => &self.kappa_pop,
            MhFamily::Nu => &self.nu,
        }
    }

    fn family_mut(&mut self, f: MhFamily) -> &mut FamilySlots {
        match f {
            MhFamily::Alpha => &mut self.alpha,
            MhFamily::BetaCommon => &mut self.beta_common,
            MhFamily::BetaPop => &mut self.beta_pop,
            MhFamily::KappaCommon => &mut self.kappa_common,
            MhFamily::KappaPop => &mut self.kappa_pop,
            MhFamily::Nu => &mut self.nu,
        }
    }

    pub fn is_adapting(&self) -> bool {
        self.adapting
    }

    /// Stop adapting. Called once when burn-in ends; scales are fixed from
    /// then on and acceptance counts feed the post-burn-in report.
    pub fn freeze(&mut self) {
        self.adapting = false;
    }

    pub fn proposal_sd(&self, f: MhFamily, slot: usize) -> f64 {
        self.family(f).sds[slot]
    }

    /// Overrides every proposal scale in one family. Useful when the target
    /// scale is known in advance and the tuner runs frozen.
    pub fn set_scale(&mut self, f: MhFamily, sd: f64) {
        assert!(sd > 0.0 && sd.is_finite(), "proposal sd must be positive");
        self.family_mut(f).sds.fill(sd);
    }

    /// Record one MH attempt for a coordinate and adapt its scale when a
    /// window completes during burn-in.
    pub fn record(&mut self, f: MhFamily, slot: usize, accepted: bool) {
        let adapting = self.adapting;
        let window = self.window;
        let fam = self.family_mut(f);
        if adapting {
            fam.adapt_attempts += 1;
            fam.adapt_accepts += u64::from(accepted);
            fam.window_attempts[slot] += 1;
            fam.window_accepts[slot] += u32::from(accepted);
            if fam.window_attempts[slot] >= window {
                let rate = f64::from(fam.window_accepts[slot]) / f64::from(fam.window_attempts[slot]);
                if rate > BAND_HI {
                    fam.sds[slot] *= GROW;
                } else if rate < BAND_LO {
                    fam.sds[slot] *= SHRINK;
                }
                fam.window_attempts[slot] = 0;
                fam.window_accepts[slot] = 0;
            }
        } else {
            fam.frozen_attempts += 1;
            fam.frozen_accepts += u64::from(accepted);
        }
    }

    /// Accepted/attempted counts after the freeze, per family.
    pub fn frozen_counts(&self, f: MhFamily) -> (u64, u64) {
        let fam = self.family(f);
        (fam.frozen_accepts, fam.frozen_attempts)
    }

    /// Accepted/attempted counts during adaptation, per family.
    pub fn adapt_counts(&self, f: MhFamily) -> (u64, u64) {
        let fam = self.family(f);
        (fam.adapt_accepts, fam.adapt_attempts)
    }

    pub fn sds(&self, f: MhFamily) -> &[f64] {
        &self.family(f).sds
    }
}
