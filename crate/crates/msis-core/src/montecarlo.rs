//! Noisy observations, Monte Carlo trial batches and parameter sweeps.
//!
//! Every trial draws its noise from a ChaCha20 stream seeded by
//! [`trial_seed`], so results depend only on the plan and never on thread
//! scheduling. Per-trial results are collected in index order and reduced
//! sequentially.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bounds::{closed_forms, crb_approx, crb_exact, expectation_def, gamma, GammaMode};
use crate::config::{dbm_to_watts, watts_to_dbm, Pattern, SystemConfig};
use crate::error::{Error, Result};
use crate::estimator::{Estimator, DEFAULT_GRID};
use crate::geometry::{wrap_pi, Role};
use crate::manifold::response;
use crate::model::Model;

/// Default number of trials per angle.
pub const DEFAULT_TRIALS: usize = 500;

/// Default number of angles in a sweep grid.
pub const DEFAULT_THETA_POINTS: usize = 360;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at grid index `theta_index`:
/// `splitmix64(splitmix64(splitmix64(base) ^ theta_index) ^ trial)`.
pub fn trial_seed(base: u64, theta_index: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ theta_index) ^ trial)
}

/// Circularly symmetric Gaussian noise with variance `sigma2` per entry.
pub fn noise(len: usize, sigma2: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let s = (sigma2 / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(s * re, s * im)
        })
        .collect()
}

/// Observation `y = α μ(θ) + z` for a target at `theta`.
pub fn observe(theta: f64, model: &Model, seed: u64) -> Result<Vec<Complex64>> {
    let mu = response(theta, model, false)?.mu();
    let alpha = model.link.alpha;
    let z = noise(mu.len(), model.cfg.sigma2, seed);
    Ok(mu.iter().zip(z).map(|(m, z)| alpha * m + z).collect())
}

/// Estimator settings used by trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorSettings {
    pub grid_points: usize,
    pub refine: bool,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID,
            refine: true,
        }
    }
}

/// Monte Carlo plan over a grid of target angles.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub theta_grid: Vec<f64>,
    pub trials_per_theta: usize,
    pub base_seed: u64,
    pub estimator: EstimatorSettings,
}

impl TrialPlan {
    fn validate(&self) -> Result<()> {
        if self.trials_per_theta == 0 {
            return Err(Error::InvalidConfig("trials per angle must be at least 1".into()));
        }
        if self.theta_grid.is_empty() {
            return Err(Error::InvalidConfig("angle grid is empty".into()));
        }
        Ok(())
    }
}

/// One row of a per-angle sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub theta: f64,
    pub crb_exact: f64,
    /// `None` for asymmetric architectures.
    pub crb_approx: Option<f64>,
    /// `None` where no sector illuminates the angle.
    pub gamma: Option<f64>,
    pub e_def: f64,
    pub r2_def: f64,
    /// `None` outside the two-to-four-sector closed forms.
    pub e_closed: Option<f64>,
    pub r2_closed: Option<f64>,
    /// Mean squared wrapped error over successful trials.
    pub mse: Option<f64>,
    pub trials: usize,
    pub failures: usize,
    /// Mean wrapped error over successful trials.
    pub mean_bias: Option<f64>,
}

/// Bound quantities at one angle without Monte Carlo trials.
pub fn bound_record(theta: f64, model: &Model) -> Result<SweepRecord> {
    let cfg = &model.cfg;
    let bundle = response(theta, model, true)?;
    let e_def = bundle.c.iter().map(|z| z.norm_sqr()).sum();
    let r2_def = bundle
        .derivatives
        .as_ref()
        .map(|d| d.da_p.iter().map(|z| z.norm_sqr()).sum())
        .unwrap_or(0.0);
    let crb_approx = if cfg.is_symmetric() {
        Some(crb_approx(theta, model, GammaMode::Computed)?)
    } else {
        None
    };
    let e_closed = closed_forms(theta, cfg.sectors, cfg.pattern, cfg.n_i(), cfg.p_tr).ok();
    let r2_closed = closed_forms(theta, cfg.sectors, cfg.pattern, cfg.n_s(), cfg.p_tr).ok();
    Ok(SweepRecord {
        theta,
        crb_exact: crb_exact(theta, model)?,
        crb_approx,
        gamma: gamma(theta, cfg, Role::Sensor).ok(),
        e_def,
        r2_def,
        e_closed: e_closed.map(|c| c.e_closed),
        r2_closed: r2_closed.map(|c| c.r2_closed),
        mse: None,
        trials: 0,
        failures: 0,
        mean_bias: None,
    })
}

/// Bound records over a grid, in grid order.
pub fn crb_sweep(model: &Model, grid: &[f64]) -> Result<Vec<SweepRecord>> {
    grid.par_iter().map(|&t| bound_record(t, model)).collect()
}

/// Monte Carlo statistics at one grid angle, using a prepared estimator.
pub fn instantaneous_mse_with(
    theta_index: usize,
    plan: &TrialPlan,
    model: &Model,
    est: &Estimator<'_>,
) -> Result<SweepRecord> {
    plan.validate()?;
    let theta = *plan
        .theta_grid
        .get(theta_index)
        .ok_or_else(|| Error::Domain(format!("angle index {theta_index} outside the plan grid")))?;
    let outcomes: Vec<Result<Option<f64>>> = (0..plan.trials_per_theta)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(plan.base_seed, theta_index as u64, t as u64);
            let y = observe(theta, model, seed)?;
            match est.estimate(&y) {
                Ok(e) => Ok(Some(wrap_pi(e.theta_hat - theta))),
                Err(Error::EstimationFailed(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut sum_sq = 0.0;
    let mut sum = 0.0;
    let mut ok = 0usize;
    for o in outcomes {
        if let Some(err) = o? {
            sum_sq += err * err;
            sum += err;
            ok += 1;
        }
    }
    let mut rec = bound_record(theta, model)?;
    rec.trials = plan.trials_per_theta;
    rec.failures = plan.trials_per_theta - ok;
    if ok > 0 {
        rec.mse = Some(sum_sq / ok as f64);
        rec.mean_bias = Some(sum / ok as f64);
    }
    Ok(rec)
}

/// Monte Carlo statistics at one grid angle.
pub fn instantaneous_mse(theta_index: usize, plan: &TrialPlan, model: &Model) -> Result<SweepRecord> {
    let est = Estimator::new(model, plan.estimator.grid_points, plan.estimator.refine)?;
    instantaneous_mse_with(theta_index, plan, model, &est)
}

/// Averages over a whole angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OverallMse {
    /// Mean of the per-angle MSE; `None` if any angle had no successful trial.
    pub mse: Option<f64>,
    pub crb_exact_mean: f64,
    pub crb_approx_mean: Option<f64>,
    pub failures: usize,
    pub records: Vec<SweepRecord>,
}

fn mean_opt(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut n = 0usize;
    let mut acc = 0.0;
    for v in values {
        acc += v?;
        n += 1;
    }
    (n > 0).then(|| acc / n as f64)
}

fn summarize_records(records: Vec<SweepRecord>) -> OverallMse {
    let n = records.len() as f64;
    OverallMse {
        mse: mean_opt(records.iter().map(|r| r.mse)),
        crb_exact_mean: records.iter().map(|r| r.crb_exact).sum::<f64>() / n,
        crb_approx_mean: mean_opt(records.iter().map(|r| r.crb_approx)),
        failures: records.iter().map(|r| r.failures).sum(),
        records,
    }
}

/// Uniform average of the per-angle MSE and bounds over the plan grid.
pub fn overall_mse(plan: &TrialPlan, model: &Model) -> Result<OverallMse> {
    plan.validate()?;
    let est = Estimator::new(model, plan.estimator.grid_points, plan.estimator.refine)?;
    let records = (0..plan.theta_grid.len())
        .map(|i| instantaneous_mse_with(i, plan, model, &est))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_records(records))
}

/// Uniform average of the bounds over a grid, without trials.
pub fn overall_crb(model: &Model, grid: &[f64]) -> Result<OverallMse> {
    Ok(summarize_records(crb_sweep(model, grid)?))
}

/// Experiment families.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepKind {
    /// Bounds over the plan grid.
    CrbTheta,
    /// Bounds and Monte Carlo MSE over the plan grid.
    MseTheta,
    /// Overall MSE and bounds as the transmit power varies, in dBm.
    PowerSweep { powers_dbm: Vec<f64> },
    /// Overall bounds, and MSE if requested, as the sector count varies with
    /// the total element count held fixed.
    SectorSweep { sectors: Vec<usize>, monte_carlo: bool },
    /// Grid averages of `e` and `r²` as the total element count varies.
    ScalingN { n_values: Vec<usize> },
}

/// One row of an aggregate sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRecord {
    pub sectors: usize,
    pub n: usize,
    pub pattern: Pattern,
    pub p_tr_dbm: f64,
    pub mse: Option<f64>,
    pub crb_exact_mean: Option<f64>,
    pub crb_approx_mean: Option<f64>,
    pub e_mean: Option<f64>,
    pub r2_mean: Option<f64>,
    pub trials: usize,
    pub failures: usize,
}

/// Output of [`run_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutput {
    Theta(Vec<SweepRecord>),
    Aggregate(Vec<AggregateRecord>),
}

fn aggregate_row(cfg: &SystemConfig, o: &OverallMse, trials: usize) -> AggregateRecord {
    AggregateRecord {
        sectors: cfg.sectors,
        n: cfg.n_i(),
        pattern: cfg.pattern,
        p_tr_dbm: watts_to_dbm(cfg.p_tr),
        mse: o.mse,
        crb_exact_mean: Some(o.crb_exact_mean),
        crb_approx_mean: o.crb_approx_mean,
        e_mean: None,
        r2_mean: None,
        trials,
        failures: o.failures,
    }
}

/// Runs one experiment family. For sector and scaling sweeps the angle grid
/// is rebuilt per configuration with `plan.theta_grid.len()` points so the
/// guard band follows the pattern.
pub fn run_sweep(kind: &SweepKind, plan: &TrialPlan, cfg: &SystemConfig) -> Result<SweepOutput> {
    match kind {
        SweepKind::CrbTheta => {
            let model = Model::new(cfg.clone())?;
            Ok(SweepOutput::Theta(crb_sweep(&model, &plan.theta_grid)?))
        }
        SweepKind::MseTheta => {
            let model = Model::new(cfg.clone())?;
            Ok(SweepOutput::Theta(overall_mse(plan, &model)?.records))
        }
        SweepKind::PowerSweep { powers_dbm } => {
            let mut rows = Vec::with_capacity(powers_dbm.len());
            for &p in powers_dbm {
                let c = SystemConfig {
                    p_tr: dbm_to_watts(p),
                    ..cfg.clone()
                };
                let model = Model::new(c.clone())?;
                let o = overall_mse(plan, &model)?;
                let mut row = aggregate_row(&c, &o, plan.trials_per_theta);
                row.p_tr_dbm = p;
                rows.push(row);
            }
            Ok(SweepOutput::Aggregate(rows))
        }
        SweepKind::SectorSweep { sectors, monte_carlo } => {
            let n = cfg.n_i();
            let mut rows = Vec::with_capacity(sectors.len());
            for &l in sectors {
                let c = SystemConfig {
                    p_tr: cfg.p_tr,
                    sigma2: cfg.sigma2,
                    f_c: cfg.f_c,
                    rho: cfg.rho,
                    alpha_t: cfg.alpha_t,
                    d_ci: cfg.d_ci,
                    zeta_src: cfg.zeta_src,
                    ..SystemConfig::with_total_elements(l, n, cfg.pattern)?
                };
                let model = Model::new(c.clone())?;
                let grid = crate::bounds::sweep_grid(&model.pattern, plan.theta_grid.len());
                let o = if *monte_carlo {
                    let p = TrialPlan {
                        theta_grid: grid,
                        ..plan.clone()
                    };
                    overall_mse(&p, &model)?
                } else {
                    overall_crb(&model, &grid)?
                };
                let trials = if *monte_carlo { plan.trials_per_theta } else { 0 };
                rows.push(aggregate_row(&c, &o, trials));
            }
            Ok(SweepOutput::Aggregate(rows))
        }
        SweepKind::ScalingN { n_values } => {
            let mut rows = Vec::with_capacity(n_values.len());
            for &n in n_values {
                let c = SystemConfig {
                    p_tr: cfg.p_tr,
                    sigma2: cfg.sigma2,
                    f_c: cfg.f_c,
                    rho: cfg.rho,
                    alpha_t: cfg.alpha_t,
                    d_ci: cfg.d_ci,
                    zeta_src: cfg.zeta_src,
                    ..SystemConfig::with_total_elements(cfg.sectors, n, cfg.pattern)?
                };
                let model = Model::new(c.clone())?;
                let s = expectation_def(&model)?;
                rows.push(AggregateRecord {
                    sectors: c.sectors,
                    n,
                    pattern: c.pattern,
                    p_tr_dbm: watts_to_dbm(c.p_tr),
                    mse: None,
                    crb_exact_mean: None,
                    crb_approx_mean: None,
                    e_mean: Some(s.e_mean),
                    r2_mean: Some(s.r2_mean),
                    trials: 0,
                    failures: 0,
                });
            }
            Ok(SweepOutput::Aggregate(rows))
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("slope fit needs at least two paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain("slope fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
