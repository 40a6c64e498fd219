//! Scenario files and the command-line front end of the `msis` binary.
//!
//! A scenario is a JSON document with a `system` block and optional
//! per-command blocks. Physical quantities use unit-suffixed keys and powers
//! are given in dBm; they are converted to watts once when the file is read.
//! Unknown keys are rejected.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::sweep_grid;
use crate::config::{db_to_amplitude, dbm_to_watts, Pattern, SystemConfig};
use crate::error::Error;
use crate::estimator::{Estimator, DEFAULT_GRID};
use crate::model::Model;
use crate::montecarlo::{
    crb_sweep, log_log_slope, observe, overall_mse, run_sweep, AggregateRecord, EstimatorSettings, SweepKind,
    SweepOutput, SweepRecord, TrialPlan, DEFAULT_THETA_POINTS, DEFAULT_TRIALS,
};

/// `system` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemBlock {
    pub sectors: usize,
    pub elements_per_sector: usize,
    /// Defaults to `elements_per_sector`.
    pub sensors_per_sector: Option<usize>,
    /// Defaults to the total element count.
    pub snapshots: Option<usize>,
    pub pattern: Pattern,
    pub p_tr_dbm: f64,
    pub sigma2_dbm: f64,
    pub f_c_hz: f64,
    pub rho_m: f64,
    pub alpha_t_db: f64,
    pub alpha_t_phase_rad: f64,
    pub d_ci_m: f64,
    pub zeta_src_rad: f64,
}

impl Default for SystemBlock {
    fn default() -> Self {
        Self {
            sectors: 4,
            elements_per_sector: 6,
            sensors_per_sector: None,
            snapshots: None,
            pattern: Pattern::Directive,
            p_tr_dbm: 45.0,
            sigma2_dbm: -80.0,
            f_c_hz: 5.19e9,
            rho_m: 519.0,
            alpha_t_db: 0.0,
            alpha_t_phase_rad: 0.0,
            d_ci_m: 0.5,
            zeta_src_rad: 0.0,
        }
    }
}

impl SystemBlock {
    /// Converts to a validated configuration.
    pub fn to_config(&self) -> Result<SystemConfig, Error> {
        let m_i = self.elements_per_sector;
        let cfg = SystemConfig {
            sectors: self.sectors,
            elements_per_sector: m_i,
            sensors_per_sector: self.sensors_per_sector.unwrap_or(m_i),
            snapshots: self.snapshots.unwrap_or(self.sectors * m_i),
            pattern: self.pattern,
            p_tr: dbm_to_watts(self.p_tr_dbm),
            sigma2: dbm_to_watts(self.sigma2_dbm),
            f_c: self.f_c_hz,
            rho: self.rho_m,
            alpha_t: Complex64::from_polar(db_to_amplitude(self.alpha_t_db), self.alpha_t_phase_rad),
            d_ci: self.d_ci_m,
            zeta_src: self.zeta_src_rad,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `theta_grid` block: uniform nodes `2πk/points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGridBlock {
    pub points: usize,
}

/// `monte_carlo` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloBlock {
    pub trials: usize,
    pub seed: u64,
    pub estimator_grid: usize,
    pub refine: bool,
}

impl Default for MonteCarloBlock {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 0,
            estimator_grid: DEFAULT_GRID,
            refine: true,
        }
    }
}

/// `scaling` block: one row per `(N, L, pattern)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingBlock {
    pub n_values: Vec<usize>,
    pub sectors: Vec<usize>,
    pub patterns: Vec<Pattern>,
}

/// `sweep` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum SweepBlock {
    /// Overall MSE and bounds versus transmit power.
    Power { powers_dbm: Vec<f64> },
    /// Overall bounds versus sector count at fixed total element count.
    Sectors {
        sectors: Vec<usize>,
        #[serde(default)]
        monte_carlo: bool,
    },
}

/// Complete scenario file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub system: SystemBlock,
    pub theta_grid: Option<ThetaGridBlock>,
    pub monte_carlo: Option<MonteCarloBlock>,
    pub scaling: Option<ScalingBlock>,
    pub sweep: Option<SweepBlock>,
    /// Default output path, relative to the working directory.
    pub output: Option<PathBuf>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Failure of a CLI command, mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid input files.
    #[error("{0}")]
    Usage(String),
    /// A numeric evaluation failed.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "msis",
    version,
    about = "Multi-sector intelligent-surface sensing: bounds, estimation and sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output file; defaults to the scenario's `output`, then stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact and asymptotic bounds over the angle grid.
    Crb {
        #[command(flatten)]
        common: Common,
        /// Number of angle-grid points.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Monte Carlo MSE with bounds over the angle grid.
    Mse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Grid-averaged probing power and angle rate versus element count.
    Scaling {
        #[command(flatten)]
        common: Common,
    },
    /// Dump of the probing codebook.
    Codebook {
        #[command(flatten)]
        common: Common,
    },
    /// One noisy observation of a target.
    Observe {
        #[command(flatten)]
        common: Common,
        /// Target azimuth, rad.
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate azimuth and path gain from an observation file.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// CSV with columns index, real, imag.
        #[arg(long)]
        observation: PathBuf,
        /// Number of estimator grid points.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Power or sector-count sweep of overall MSE and bounds.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Formats a number with 17 significant digits; infinities become `inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Numeric(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numeric(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numeric(e.to_string()))
}

const CRB_HEADER: [&str; 8] = [
    "theta_rad",
    "crb_exact_rad2",
    "crb_approx_rad2",
    "gamma",
    "e_def",
    "r2_def",
    "e_closed",
    "r2_closed",
];

fn crb_row(r: &SweepRecord) -> Vec<String> {
    vec![
        fmt_num(r.theta),
        fmt_num(r.crb_exact),
        fmt_opt(r.crb_approx),
        fmt_opt(r.gamma),
        fmt_num(r.e_def),
        fmt_num(r.r2_def),
        fmt_opt(r.e_closed),
        fmt_opt(r.r2_closed),
    ]
}

/// Angle grid for a configuration, guard band applied.
fn theta_grid(model: &Model, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Usage("angle grid needs at least one point".into()));
    }
    Ok(sweep_grid(&model.pattern, points))
}

fn grid_points(s: &ScenarioFile, flag: Option<usize>) -> usize {
    flag.or(s.theta_grid.as_ref().map(|g| g.points))
        .unwrap_or(DEFAULT_THETA_POINTS)
}

fn mc_settings(s: &ScenarioFile, trials: Option<usize>, seed: Option<u64>) -> Result<MonteCarloBlock, CliError> {
    let mut mc = s
        .monte_carlo
        .clone()
        .ok_or_else(|| CliError::Usage("scenario lacks a monte_carlo block".into()))?;
    if let Some(t) = trials {
        mc.trials = t;
    }
    if let Some(v) = seed {
        mc.seed = v;
    }
    if mc.trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    Ok(mc)
}

fn plan(grid: Vec<f64>, mc: &MonteCarloBlock) -> TrialPlan {
    TrialPlan {
        theta_grid: grid,
        trials_per_theta: mc.trials,
        base_seed: mc.seed,
        estimator: EstimatorSettings {
            grid_points: mc.estimator_grid,
            refine: mc.refine,
        },
    }
}

/// Bounds over the angle grid as CSV.
pub fn cmd_crb(s: &ScenarioFile, grid: Option<usize>) -> Result<String, CliError> {
    let model = Model::new(s.system.to_config()?)?;
    let g = theta_grid(&model, grid_points(s, grid))?;
    let rows = crb_sweep(&model, &g)?;
    csv_text(&CRB_HEADER, rows.iter().map(crb_row).collect())
}

/// Monte Carlo MSE over the angle grid as CSV.
pub fn cmd_mse(
    s: &ScenarioFile,
    grid: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Result<String, CliError> {
    let mc = mc_settings(s, trials, seed)?;
    let model = Model::new(s.system.to_config()?)?;
    let g = theta_grid(&model, grid_points(s, grid))?;
    let out = overall_mse(&plan(g, &mc), &model)?;
    let mut header = CRB_HEADER.to_vec();
    header.extend(["mse_rad2", "trials", "failures", "mean_bias_rad"]);
    let rows = out
        .records
        .iter()
        .map(|r| {
            let mut row = crb_row(r);
            row.extend([
                fmt_opt(r.mse),
                r.trials.to_string(),
                r.failures.to_string(),
                fmt_opt(r.mean_bias),
            ]);
            row
        })
        .collect();
    csv_text(&header, rows)
}

/// Grid-averaged `e` and `r²` for each `(N, L, pattern)` with fitted exponents.
pub fn cmd_scaling(s: &ScenarioFile) -> Result<String, CliError> {
    let block = s
        .scaling
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario lacks a scaling block".into()))?;
    let base = s.system.to_config()?;
    let mut rows = Vec::new();
    for &l in &block.sectors {
        for &p in &block.patterns {
            let cfg = SystemConfig {
                sectors: l,
                pattern: p,
                ..base.clone()
            };
            let kind = SweepKind::ScalingN {
                n_values: block.n_values.clone(),
            };
            let unused = plan(vec![0.0], &MonteCarloBlock::default());
            let SweepOutput::Aggregate(recs) = run_sweep(&kind, &unused, &cfg)? else {
                unreachable!("scaling sweeps produce aggregate rows")
            };
            let n: Vec<f64> = recs.iter().map(|r| r.n as f64).collect();
            let e: Vec<f64> = recs.iter().map(|r| r.e_mean.unwrap_or(f64::NAN)).collect();
            let r2: Vec<f64> = recs.iter().map(|r| r.r2_mean.unwrap_or(f64::NAN)).collect();
            let e_exp = log_log_slope(&n, &e).ok();
            let r2_exp = log_log_slope(&n, &r2).ok();
            for r in &recs {
                rows.push(vec![
                    r.n.to_string(),
                    r.sectors.to_string(),
                    r.pattern.name().to_string(),
                    fmt_opt(r.e_mean),
                    fmt_opt(r.r2_mean),
                    fmt_opt(e_exp),
                    fmt_opt(r2_exp),
                ]);
            }
        }
    }
    csv_text(
        &[
            "n",
            "sectors",
            "pattern",
            "e_mean",
            "r2_mean",
            "e_exponent",
            "r2_exponent",
        ],
        rows,
    )
}

/// Codebook dump with one row per (snapshot, sector, element).
pub fn cmd_codebook(s: &ScenarioFile) -> Result<String, CliError> {
    let model = Model::new(s.system.to_config()?)?;
    let cb = &model.codebook;
    let m = cb.elements_per_sector;
    let mut rows = Vec::with_capacity(cb.x.len());
    for q in 0..cb.snapshots() {
        for sec in 0..cb.sectors {
            for e in 0..m {
                let z = cb.x[(sec * m + e, q)];
                rows.push(vec![
                    q.to_string(),
                    sec.to_string(),
                    e.to_string(),
                    fmt_num(z.re),
                    fmt_num(z.im),
                ]);
            }
        }
    }
    csv_text(&["snapshot", "sector", "element", "real", "imag"], rows)
}

/// One noisy observation as CSV `index, real, imag`.
pub fn cmd_observe(s: &ScenarioFile, theta: f64, seed: Option<u64>) -> Result<String, CliError> {
    let model = Model::new(s.system.to_config()?)?;
    let seed = seed.or(s.monte_carlo.as_ref().map(|m| m.seed)).unwrap_or(0);
    let y = observe(theta, &model, seed)?;
    let rows = y
        .iter()
        .enumerate()
        .map(|(i, z)| vec![i.to_string(), fmt_num(z.re), fmt_num(z.im)])
        .collect();
    csv_text(&["index", "real", "imag"], rows)
}

/// Reads an observation CSV with columns `index, real, imag`.
pub fn read_observation(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let expected = ["index", "real", "imag"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(bad("header must be index,real,imag".into()));
    }
    let mut y = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim().to_string();
        let index: usize = field(0)
            .parse()
            .map_err(|_| bad(format!("bad index on row {}", row + 1)))?;
        if index != row {
            return Err(bad(format!("row {} has index {index}", row + 1)));
        }
        let re: f64 = field(1)
            .parse()
            .map_err(|_| bad(format!("bad real part on row {}", row + 1)))?;
        let im: f64 = field(2)
            .parse()
            .map_err(|_| bad(format!("bad imaginary part on row {}", row + 1)))?;
        y.push(Complex64::new(re, im));
    }
    Ok(y)
}

#[derive(Serialize)]
struct EstimateJson {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_hat_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_hat_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_hat_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Estimate as JSON. An estimation failure is reported in the document.
pub fn cmd_estimate(s: &ScenarioFile, observation: &Path, grid: Option<usize>) -> Result<String, CliError> {
    let model = Model::new(s.system.to_config()?)?;
    let y = read_observation(observation)?;
    let expected = model.cfg.observation_len();
    if y.len() != expected {
        return Err(CliError::Usage(format!(
            "observation has {} samples, scenario expects {expected}",
            y.len()
        )));
    }
    let mc = s.monte_carlo.clone().unwrap_or_default();
    let points = grid.unwrap_or(mc.estimator_grid);
    let est = Estimator::new(&model, points, mc.refine).map_err(|e| CliError::Usage(e.to_string()))?;
    let doc = match est.estimate(&y) {
        Ok(e) => EstimateJson {
            status: "ok",
            theta_hat_rad: Some(e.theta_hat),
            alpha_hat_re: Some(e.alpha_hat.re),
            alpha_hat_im: Some(e.alpha_hat.im),
            metric: Some(e.metric_value),
            error: None,
        },
        Err(Error::EstimationFailed(msg)) => EstimateJson {
            status: "failed",
            theta_hat_rad: None,
            alpha_hat_re: None,
            alpha_hat_im: None,
            metric: None,
            error: Some(msg),
        },
        Err(e) => return Err(e.into()),
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn aggregate_row(r: &AggregateRecord) -> Vec<String> {
    let ratio = match (r.mse, r.crb_exact_mean) {
        (Some(m), Some(c)) => Some(m / c),
        _ => None,
    };
    vec![
        fmt_num(r.p_tr_dbm),
        r.sectors.to_string(),
        r.n.to_string(),
        r.pattern.name().to_string(),
        fmt_opt(r.mse),
        fmt_opt(r.crb_exact_mean),
        fmt_opt(r.crb_approx_mean),
        fmt_opt(ratio),
        r.trials.to_string(),
        r.failures.to_string(),
    ]
}

/// Power or sector sweep as CSV.
pub fn cmd_sweep(
    s: &ScenarioFile,
    grid: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
) -> Result<String, CliError> {
    let block = s
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario lacks a sweep block".into()))?;
    let cfg = s.system.to_config()?;
    let model = Model::new(cfg.clone())?;
    let points = grid_points(s, grid);
    let (kind, mc) = match block {
        SweepBlock::Power { powers_dbm } => (
            SweepKind::PowerSweep {
                powers_dbm: powers_dbm.clone(),
            },
            mc_settings(s, trials, seed)?,
        ),
        SweepBlock::Sectors { sectors, monte_carlo } => {
            let mc = if *monte_carlo {
                mc_settings(s, trials, seed)?
            } else {
                MonteCarloBlock::default()
            };
            (
                SweepKind::SectorSweep {
                    sectors: sectors.clone(),
                    monte_carlo: *monte_carlo,
                },
                mc,
            )
        }
    };
    let p = plan(theta_grid(&model, points)?, &mc);
    let SweepOutput::Aggregate(rows) = run_sweep(&kind, &p, &cfg)? else {
        unreachable!("power and sector sweeps produce aggregate rows")
    };
    csv_text(
        &[
            "p_tr_dbm",
            "sectors",
            "n",
            "pattern",
            "mse_rad2",
            "crb_exact_mean_rad2",
            "crb_approx_mean_rad2",
            "mse_over_crb",
            "trials",
            "failures",
        ],
        rows.iter().map(aggregate_row).collect(),
    )
}

fn emit(text: &str, common: &Common, s: &ScenarioFile) -> Result<(), CliError> {
    match common.out.as_ref().or(s.output.as_ref()) {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
        }
    }
}

/// Executes one parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Crb { common, grid } => {
            let s = ScenarioFile::load(&common.scenario)?;
            emit(&cmd_crb(&s, grid)?, &common, &s)
        }
        Command::Mse {
            common,
            grid,
            trials,
            seed,
        } => {
            let s = ScenarioFile::load(&common.scenario)?;
            emit(&cmd_mse(&s, grid, trials, seed)?, &common, &s)
        }
        Command::Scaling { common } => {
            let s = ScenarioFile::load(&common.scenario)?;
            emit(&cmd_scaling(&s)?, &common, &s)
        }
        Command::Codebook { common } => {
            let s = ScenarioFile::load(&common.scenario)?;
            emit(&cmd_codebook(&s)?, &common, &s)
        }
        Command::Observe { common, theta, seed } => {
            let s = ScenarioFile::load(&common.scenario)?;
            emit(&cmd_observe(&s, theta, seed)?, &common, &s)
        }
        Command::Estimate {
            common,
            observation,
            grid,
        } => {
            let s = ScenarioFile::load(&common.scenario)?;
            emit(&cmd_estimate(&s, &observation, grid)?, &common, &s)
        }
        Command::Sweep {
            common,
            grid,
            trials,
            seed,
        } => {
            let s = ScenarioFile::load(&common.scenario)?;
            emit(&cmd_sweep(&s, grid, trials, seed)?, &common, &s)
        }
    }
}
