//! End-to-end analysis of a lift: conditions, overdamped model, both bounds
//! and empirical rates over a γ grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::spectra::{self, WorstCaseDecay};

/// How `ν_emp` is measured at each γ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmpiricalMode {
    /// Operator norm of `P_t (id − E_F)`; exact worst case, costs an SVD
    /// per time point.
    WorstCase,
    /// Trajectory of one seeded mean-zero probe.
    Probe,
    /// Worst case up to `d² ≤ 144`, probe above.
    Auto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    /// Observation period; `λ_O^{-1/2}` when absent.
    pub t_obs: Option<f64>,
    /// Explicit γ grid; otherwise `n_gamma` log-spaced points on
    /// `[γ_max/10, 10 γ_max]`.
    pub gammas: Option<Vec<f64>>,
    pub n_gamma: usize,
    pub empirical: EmpiricalMode,
    /// Samples per trajectory fit.
    pub n_time: usize,
    /// Fit horizon in units of `1 / spectral_gap`.
    pub horizon: f64,
    pub seed: u64,
    pub tol: f64,
    /// `ν_max / √λ_O` above which the lift is flagged as an optimal-lift
    /// candidate.
    pub optimal_threshold: f64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            t_obs: None,
            gammas: None,
            n_gamma: 25,
            empirical: EmpiricalMode::Auto,
            n_time: 200,
            horizon: 30.0,
            seed: 0,
            tol: 1e-9,
            optimal_threshold: 0.02,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub nu_lower: f64,
    pub nu_emp: f64,
    pub c_emp: f64,
    pub spectral_gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub a: ConditionA,
    pub b: ConditionB,
    pub c: ConditionC,
    pub d: Option<ConditionD>,
}

impl ConditionSummary {
    pub fn all_pass(&self) -> bool {
        self.a.pass && self.b.pass && self.c.pass && self.d.as_ref().is_some_and(|d| d.pass)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub conditions: ConditionSummary,
    pub lambda_o: f64,
    pub upper: UpperBound,
    pub constants: BoundConstants,
    pub c0: f64,
    pub c1: f64,
    pub gamma_max: f64,
    pub nu_max: f64,
    pub nu_upper: f64,
    pub rows: Vec<SweepRow>,
    /// `ν_max / √λ_O`.
    pub optimality_ratio: f64,
    pub optimal_candidate: bool,
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

/// The default sweep grid `[γ_max/10, 10 γ_max]`.
pub fn gamma_grid(gamma_max: f64, n: usize) -> Vec<f64> {
    log_grid(gamma_max / 10.0, gamma_max * 10.0, n)
}

/// Thread pool sized by `LIFTKIT_THREADS` (all cores when unset).
pub fn thread_pool() -> rayon::ThreadPool {
    let n = std::env::var("LIFTKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")
}

/// Empirical rate of `L_A + γ L_S`, with the spectral gap for reference.
pub fn empirical_at(
    lift: &LiftedGenerator,
    ef: &Superoperator,
    gamma: f64,
    opts: &AnalyzeOptions,
) -> Result<(spectra::RateFit, f64)> {
    let l = lift.l_gamma_at(gamma);
    let prop = Propagator::new(&l);
    let scale = l.norm();
    let gap = match prop.eigenvalues() {
        Some(w) => spectra::gap_from_spectrum(&w.to_vec(), scale)?,
        None => spectra::gap_from_spectrum(&la::eigvals(l.mat())?.to_vec(), scale)?,
    };
    let grid = spectra::uniform_grid(opts.horizon / gap, opts.n_time + 1);
    let d = lift.dim();
    let worst = match opts.empirical {
        EmpiricalMode::WorstCase => true,
        EmpiricalMode::Probe => false,
        EmpiricalMode::Auto => d * d <= 144,
    };
    let fit = if worst {
        WorstCaseDecay::from_parts(prop, lift.sigma(), ef).fit(&grid)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let x0 = random_mean_zero(lift, ef, &mut rng);
        spectra::empirical_rate_with(&prop, lift.sigma(), &x0, &grid)?
    };
    Ok((fit, gap))
}

/// Full analysis; aborts with a structured condition report when any of
/// Conditions A–C fails.
pub fn analyze(lift: &LiftedGenerator, opts: &AnalyzeOptions) -> Result<RateReport> {
    let a = verify_condition_a(lift.l_s(), lift.l_a(), lift.sigma(), opts.tol)?;
    let b = verify_condition_b(lift);
    let c = verify_condition_c(lift, opts.tol)?;
    if !(a.pass && b.pass && c.pass) {
        let summary = ConditionSummary { a, b, c, d: None };
        return Err(Error::Condition(serde_json::to_string(&summary)?));
    }
    let model = overdamped_generator(lift)?;
    let d = verify_condition_d(lift, &model, opts.tol)?;
    if !d.pass {
        log::warn!("condition D fails; rate bounds still apply");
    }
    let upper = upper_bound_rate(lift, &model)?;
    let constants = bound_constants(lift, &model, opts.t_obs)?;
    let peak = lower_bound_rate(&constants, 1.0);
    let gammas = opts.gammas.clone().unwrap_or_else(|| gamma_grid(peak.gamma_max, opts.n_gamma));
    let ef = lift.e_f()?;
    let rows: Vec<SweepRow> = thread_pool().install(|| {
        gammas
            .par_iter()
            .map(|&g| {
                let (fit, gap) = empirical_at(lift, &ef, g, opts)?;
                Ok(SweepRow {
                    gamma: g,
                    nu_lower: lower_bound_rate(&constants, g).nu,
                    nu_emp: fit.nu,
                    c_emp: fit.c,
                    spectral_gap: gap,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let optimality_ratio = peak.nu_max / model.lambda_o.sqrt();
    Ok(RateReport {
        conditions: ConditionSummary { a, b, c, d: Some(d) },
        lambda_o: model.lambda_o,
        nu_upper: upper.nu_upper,
        upper,
        c0: peak.c0,
        c1: peak.c1,
        gamma_max: peak.gamma_max,
        nu_max: peak.nu_max,
        constants,
        rows,
        optimality_ratio,
        optimal_candidate: optimality_ratio >= opts.optimal_threshold,
    })
}
