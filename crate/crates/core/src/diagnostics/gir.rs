//! Joint-distribution validation of the sampler ("getting it right").
//!
//! Two ways of sampling the joint distribution of parameters and data must
//! agree. The marginal-conditional side draws parameters straight from the
//! prior. The successive-conditional side alternates one sampler sweep
//! against the current synthetic dataset with re-simulation of that dataset
//! from the new parameters; its stationary law has the same parameter
//! marginal. Every test functional is compared between the two sides with
//! a z-statistic whose successive-side standard error comes from batch
//! means, so a bug in any full conditional shows up as diverging moments.
//!
//! The harness runs the sweep with the identifiability projections turned
//! off, so what it validates is each coordinate conditional against the
//! unprojected prior. The projections rescale or shift whole blocks after
//! every coordinate move; they preserve every likelihood value (checked
//! elsewhere as a neutrality property) but deliberately re-gauge the prior
//! coordinates, so a projected chain could not match one-shot projected
//! prior draws even if every conditional were flawless.

use crate::mcmc::{one_sweep, CorruptedUpdate, McmcError, MhFamily, MhTuner, SamplerConfig, UpdateBlock};
use crate::model::{Hyperparams, ModelState};
use crate::rng;
use crate::synth::{prior_draw_unconstrained, simulate_dataset, SynthSpec};

/// Harness dimensions and run lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct GirConfig {
    pub n_pops: usize,
    pub n_ages: usize,
    pub n_years: usize,
    /// Exposure per synthetic cell. Kept deliberately small so the
    /// likelihood stays weak and the chain explores the whole prior.
    pub exposure: f64,
    /// Independent prior draws on the marginal-conditional side.
    pub marginal_draws: usize,
    /// Sweeps of the successive-conditional chain.
    pub successive_sweeps: usize,
    pub seed: u64,
    /// Deliberate sampler defect, used to prove the harness can detect one.
    pub corruption: Option<CorruptedUpdate>,
}

impl GirConfig {
    /// Reference setup: a 2-population, 3-age, 5-year grid with 20000
    /// repetitions on each side.
    pub fn reference(seed: u64) -> Self {
        Self {
            n_pops: 2,
            n_ages: 3,
            n_years: 5,
            exposure: 1.0,
            marginal_draws: 20_000,
            successive_sweeps: 20_000,
            seed,
            corruption: None,
        }
    }
}

/// Priors tightened for the harness. Batch-means errors on the squared
/// functionals need the variance priors to carry finite eighth moments,
/// which takes inverse-gamma shapes above 8; the diffuse reference priors
/// are far from that. The intercept shape must also clear the propriety
/// bound of the implied Gamma prior on `exp(alpha)`.
pub fn gir_hyperparams(n_pops: usize) -> Hyperparams {
    Hyperparams {
        a_e: 3.0,
        b_e: 3.0,
        a_beta: 10.0,
        b_beta: 1.0,
        a_beta_pop: vec![10.0; n_pops],
        b_beta_pop: vec![1.0; n_pops],
        a_nu: vec![10.0; n_pops],
        b_nu: vec![1.0; n_pops],
        a_kappa: 10.0,
        b_kappa: 3.0,
        a_kappa_pop: vec![10.0; n_pops],
        b_kappa_pop: vec![3.0; n_pops],
        sigma2_rho: 0.25,
        sigma2_rho_pop: vec![0.25; n_pops],
        phi0: [0.0, 0.0],
        sigma0_diag: [0.25, 0.01],
        a_p: 1.0,
        b_p: 1.0,
        slab_scale: 1.0,
    }
}

/// One compared moment.
#[derive(Debug, Clone, PartialEq)]
pub struct GirStat {
    pub name: String,
    pub marginal_mean: f64,
    pub successive_mean: f64,
    /// Combined standard error of the difference.
    pub se: f64,
    pub z: f64,
}

/// Outcome of one harness run.
#[derive(Debug, Clone)]
pub struct GirReport {
    pub stats: Vec<GirStat>,
    /// Fraction of statistics with `|z| < 4`.
    pub share_within: f64,
    pub max_abs_z: f64,
}

impl GirReport {
    /// The agreement criterion: at least 95% of the compared moments inside
    /// the `|z| < 4` band.
    pub fn passes(&self) -> bool {
        self.share_within >= 0.95
    }
}

type Functional = (String, Box<dyn Fn(&ModelState) -> f64>);

/// Test functionals spanning every parameter block. Sum-constrained blocks
/// are probed through individual coordinates and through squares, never
/// through their (identically constant) sums.
fn functionals(p: usize, m: usize, n: usize) -> Vec<Functional> {
    assert!(p >= 2 && m >= 2 && n >= 3, "harness needs a non-trivial grid");
    let mut f: Vec<Functional> = Vec::new();
    let mut push = |name: &str, g: Box<dyn Fn(&ModelState) -> f64>| {
        f.push((name.to_string(), g));
    };
    push("alpha_mean", Box::new(|s| s.alpha.iter().sum::<f64>() / s.alpha.len() as f64));
    push("exp_alpha_mean", Box::new(|s| {
        s.alpha.iter().map(|a| a.exp()).sum::<f64>() / s.alpha.len() as f64
    }));
    push("alpha[0][0]", Box::new(|s| s.alpha[0]));
    push("beta[0]", Box::new(|s| s.beta[0]));
    push("beta[last]", Box::new(|s| *s.beta.last().unwrap()));
    push("beta_pop[0][0]", Box::new(|s| s.beta_pop[0]));
    push("beta_pop[1][last]", Box::new(move |s| s.beta_pop[2 * m - 1]));
    push("kappa[1]", Box::new(|s| s.kappa[1]));
    push("kappa[last]", Box::new(|s| *s.kappa.last().unwrap()));
    push("kappa_sq_mean", Box::new(|s| {
        s.kappa.iter().map(|k| k * k).sum::<f64>() / s.kappa.len() as f64
    }));
    push("kappa_pop[0][1]", Box::new(|s| s.kappa_pop[1]));
    push("kappa_pop[1][last]", Box::new(move |s| s.kappa_pop[2 * n - 1]));
    push("phi[0]", Box::new(|s| s.phi[0]));
    push("phi[1]", Box::new(|s| s.phi[1]));
    push("phi_pop[0][0]", Box::new(|s| s.phi_pop[0][0]));
    push("phi_pop[0][1]", Box::new(|s| s.phi_pop[0][1]));
    push("w_mean", Box::new(|s| {
        let total: u32 = s.w.iter().map(|w| u32::from(w[0]) + u32::from(w[1])).sum();
        f64::from(total) / (2.0 * s.w.len() as f64)
    }));
    push("w[0][0]", Box::new(|s| f64::from(u8::from(s.w[0][0]))));
    push("w[0][1]", Box::new(|s| f64::from(u8::from(s.w[0][1]))));
    push("p_incl[0]", Box::new(|s| s.p_incl[0]));
    push("rho", Box::new(|s| s.rho));
    push("rho_pop[0]", Box::new(|s| s.rho_pop[0]));
    push("sigma2_beta", Box::new(|s| s.sigma2_beta));
    push("sigma2_beta_pop[0]", Box::new(|s| s.sigma2_beta_pop[0]));
    push("sigma2_kappa", Box::new(|s| s.sigma2_kappa));
    push("sigma2_kappa_pop[0]", Box::new(|s| s.sigma2_kappa_pop[0]));
    push("sigma2_nu[0]", Box::new(|s| s.sigma2_nu[0]));
    push("nu[0][0][0]", Box::new(|s| s.nu[0]));
    push("nu_sq_mean", Box::new(|s| {
        s.nu.iter().map(|v| v * v).sum::<f64>() / s.nu.len() as f64
    }));
    f
}

/// Sample mean and the standard error of an iid mean.
fn iid_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample mean and a batch-means standard error for a correlated series,
/// using `floor(sqrt(n))` equal batches.
fn batch_moments(xs: &[f64]) -> (f64, f64) {
    let n_batches = (xs.len() as f64).sqrt().floor() as usize;
    let len = xs.len() / n_batches;
    let used = n_batches * len;
    let mean = xs[..used].iter().sum::<f64>() / used as f64;
    let mut var = 0.0;
    for b in 0..n_batches {
        let bm = xs[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64;
        var += (bm - mean) * (bm - mean);
    }
    var /= (n_batches * (n_batches - 1)) as f64;
    (mean, var.sqrt())
}

fn labels(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("P{i}")).collect()
}

/// Runs both sides and compares first and second moments of every
/// functional.
pub fn run_gir(config: &GirConfig) -> Result<GirReport, McmcError> {
    let (p, m, n) = (config.n_pops, config.n_ages, config.n_years);
    if config.marginal_draws < 100 || config.successive_sweeps < 100 {
        return Err(McmcError::Config("harness needs at least 100 repetitions per side".into()));
    }
    let hyper = gir_hyperparams(p);
    let spec = SynthSpec::new(labels(p), 60, 2000, config.exposure);
    let funcs = functionals(p, m, n);
    let k = funcs.len();

    // Marginal-conditional side: independent prior draws. The data draw
    // would be discarded immediately because every functional looks only at
    // the parameters, so it is skipped.
    let mut marginal = vec![Vec::with_capacity(config.marginal_draws); 2 * k];
    let mut rng_m = rng::substream(config.seed, 1);
    for _ in 0..config.marginal_draws {
        let state = prior_draw_unconstrained(p, m, n, &hyper, &mut rng_m)?;
        for (j, (_, g)) in funcs.iter().enumerate() {
            let v = g(&state);
            marginal[2 * j].push(v);
            marginal[2 * j + 1].push(v * v);
        }
    }

    // Successive-conditional side: sweep against the current dataset, then
    // refresh the dataset from the new parameters.
    let sampler_config = SamplerConfig {
        iterations: 1,
        burn_in: 0,
        thin: 1,
        seed: config.seed,
        overdispersion: true,
        spike: true,
        renormalize: false,
        update_order: UpdateBlock::default_order(),
        corruption: config.corruption,
    };
    let mut tuner = MhTuner::new(p, m, n);
    // Fixed proposal scales sized to the prior spreads: adaptation would
    // entangle the kernel with the chain history and break exactness, and
    // the fitting defaults are an order of magnitude too narrow here.
    tuner.set_scale(MhFamily::Alpha, 0.3);
    tuner.set_scale(MhFamily::BetaCommon, 0.4);
    tuner.set_scale(MhFamily::BetaPop, 0.4);
    tuner.set_scale(MhFamily::KappaCommon, 0.7);
    tuner.set_scale(MhFamily::KappaPop, 0.7);
    tuner.set_scale(MhFamily::Nu, 0.4);
    tuner.freeze();
    let mut rng_s = rng::substream(config.seed, 2);
    let mut state = prior_draw_unconstrained(p, m, n, &hyper, &mut rng_s)?;
    let mut data = simulate_dataset(&spec, &state, &mut rng_s)?;
    let mut successive = vec![Vec::with_capacity(config.successive_sweeps); 2 * k];
    for sweep in 0..config.successive_sweeps {
        one_sweep(&mut state, &data, &hyper, &sampler_config, &mut tuner, &mut rng_s)
            .map_err(|e| e.at(sweep))?;
        data = simulate_dataset(&spec, &state, &mut rng_s)?;
        for (j, (_, g)) in funcs.iter().enumerate() {
            let v = g(&state);
            successive[2 * j].push(v);
            successive[2 * j + 1].push(v * v);
        }
    }

    let mut stats = Vec::with_capacity(2 * k);
    for (j, (name, _)) in funcs.iter().enumerate() {
        for (moment, suffix) in [(2 * j, ""), (2 * j + 1, "^2")] {
            let (mm, sem) = iid_moments(&marginal[moment]);
            let (sm, ses) = batch_moments(&successive[moment]);
            let se = (sem * sem + ses * ses).sqrt();
            let diff = mm - sm;
            // A statistic that is constant on both sides carries no
            // information; its z is zero unless the constants differ.
            let z = if se > 1e-12 {
                diff / se
            } else if diff.abs() < 1e-9 {
                0.0
            } else {
                f64::INFINITY
            };
            stats.push(GirStat {
                name: format!("{name}{suffix}"),
                marginal_mean: mm,
                successive_mean: sm,
                se,
                z,
            });
        }
    }
    let within = stats.iter().filter(|s| s.z.abs() < 4.0).count();
    let max_abs_z = stats.iter().map(|s| s.z.abs()).fold(0.0, f64::max);
    let share_within = within as f64 / stats.len() as f64;
    Ok(GirReport { stats, share_within, max_abs_z })
}
