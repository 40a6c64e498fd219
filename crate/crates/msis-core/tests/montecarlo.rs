mod common;

use common::*;
use msis_core::bounds::sweep_grid;
use msis_core::manifold::response;
use msis_core::montecarlo::*;
use msis_core::{Model, Pattern, SystemConfig};

fn plan(grid: Vec<f64>, trials: usize) -> TrialPlan {
    TrialPlan {
        theta_grid: grid,
        trials_per_theta: trials,
        base_seed: 42,
        estimator: EstimatorSettings {
            grid_points: 1024,
            refine: true,
        },
    }
}

#[test]
fn mixer_reference_values() {
    assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    assert_ne!(trial_seed(1, 0, 0), trial_seed(1, 0, 1));
    assert_ne!(trial_seed(1, 0, 1), trial_seed(1, 1, 0));
    assert_eq!(trial_seed(9, 3, 4), trial_seed(9, 3, 4));
}

#[test]
fn observation_determinism_and_noiseless_limit() {
    let m = model(4, 6, Pattern::Directive);
    let a = observe(1.0, &m, 5).unwrap();
    assert_eq!(a, observe(1.0, &m, 5).unwrap());
    assert_ne!(a, observe(1.0, &m, 6).unwrap());
    let mut quiet = m.clone();
    quiet.cfg.sigma2 = 0.0;
    let y = observe(1.0, &quiet, 5).unwrap();
    let mu = response(1.0, &m, false).unwrap().mu();
    for (v, u) in y.iter().zip(&mu) {
        assert_eq!(*v, m.link.alpha * u);
    }
}

#[test]
fn noise_moments() {
    let z = noise(1_000_000, 2.5, 17);
    let n = z.len() as f64;
    let var: f64 = z.iter().map(|v| v.norm_sqr()).sum::<f64>() / n;
    assert!(rel(var, 2.5) < 0.01);
    let re: f64 = z.iter().map(|v| v.re * v.re).sum::<f64>() / n;
    assert!(rel(re, 1.25) < 0.01);
    let cross: f64 = z.iter().map(|v| v.re * v.im).sum::<f64>() / n;
    assert!(cross.abs() < 0.01);
}

#[test]
fn high_snr_mse_is_tiny() {
    let cfg = SystemConfig {
        sigma2: 1e-40,
        ..SystemConfig::symmetric(4, 6, Pattern::Isotropic)
    };
    let m = Model::new(cfg).unwrap();
    let p = plan(vec![0.3, 2.2], 4);
    let rec = instantaneous_mse(1, &p, &m).unwrap();
    assert!(rec.mse.unwrap() < 1e-14);
    assert_eq!(rec.trials, 4);
    assert_eq!(rec.failures, 0);
    assert!(instantaneous_mse(5, &p, &m).is_err());
}

#[test]
fn overall_reduces_to_single_point() {
    let m = model(4, 6, Pattern::Directive);
    let p = plan(vec![1.3], 20);
    let o = overall_mse(&p, &m).unwrap();
    let r = instantaneous_mse(0, &p, &m).unwrap();
    assert_eq!(o.mse, r.mse);
    assert_eq!(o.records[0], r);
    assert_eq!(o.crb_exact_mean, r.crb_exact);
}

#[test]
fn sweeps_are_deterministic() {
    let m = model(3, 4, Pattern::Directive);
    let grid = sweep_grid(&m.pattern, 12);
    let p = plan(grid, 8);
    let a = overall_mse(&p, &m).unwrap();
    let b = overall_mse(&p, &m).unwrap();
    assert_eq!(a, b);
    assert!(a.records.iter().all(|r| r.mse.unwrap() <= std::f64::consts::PI.powi(2)));
    assert!(overall_mse(&plan(vec![], 3), &m).is_err());
    assert!(overall_mse(&plan(vec![0.1], 0), &m).is_err());
}

#[test]
fn crb_theta_directive_mostly_below_isotropic() {
    let p = plan(vec![], 1);
    let run = |pat| {
        let cfg = SystemConfig::symmetric(4, 6, pat);
        let spec = msis_core::antenna::PatternSpec::new(pat, 4).unwrap();
        let p = TrialPlan {
            theta_grid: sweep_grid(&spec, 360),
            ..p.clone()
        };
        match run_sweep(&SweepKind::CrbTheta, &p, &cfg).unwrap() {
            SweepOutput::Theta(r) => r,
            _ => unreachable!(),
        }
    };
    let iso = run(Pattern::Isotropic);
    let dir = run(Pattern::Directive);
    assert_eq!(iso.len(), 360);
    let better = iso.iter().zip(&dir).filter(|(i, d)| d.crb_exact < i.crb_exact).count();
    assert!(better > 180, "{better}");
}

#[test]
fn scaling_sweep_slope() {
    let cfg = SystemConfig::symmetric(4, 4, Pattern::Isotropic);
    let ns = vec![16, 24, 32, 48, 64];
    let out = run_sweep(&SweepKind::ScalingN { n_values: ns.clone() }, &plan(vec![0.0], 1), &cfg).unwrap();
    let SweepOutput::Aggregate(rows) = out else {
        unreachable!()
    };
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let r2: Vec<f64> = rows.iter().map(|r| r.r2_mean.unwrap()).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.e_mean.unwrap()).collect();
    assert!((log_log_slope(&x, &r2).unwrap() - 3.0).abs() < 0.1);
    assert!((log_log_slope(&x, &e).unwrap() - 1.0).abs() < 0.05);
}

#[test]
fn sector_sweep_directive_decreasing() {
    let cfg = SystemConfig::with_total_elements(2, 60, Pattern::Directive)
        .unwrap()
        .with_power_dbm(30.0);
    let kind = SweepKind::SectorSweep {
        sectors: vec![2, 3, 4, 5, 6],
        monte_carlo: false,
    };
    let SweepOutput::Aggregate(rows) = run_sweep(&kind, &plan(vec![0.0; 360], 1), &cfg).unwrap() else {
        unreachable!()
    };
    let crb: Vec<f64> = rows.iter().map(|r| r.crb_exact_mean.unwrap()).collect();
    assert_eq!(crb[0], f64::INFINITY);
    for w in crb.windows(2) {
        assert!(w[1] < w[0], "{crb:?}");
    }
    assert!(run_sweep(
        &SweepKind::SectorSweep {
            sectors: vec![7],
            monte_carlo: false
        },
        &plan(vec![0.0], 1),
        &cfg
    )
    .is_err());
}

#[test]
fn slope_fit() {
    let x = [1.0, 2.0, 4.0];
    let y = [3.0, 24.0, 192.0];
    assert!((log_log_slope(&x, &y).unwrap() - 3.0).abs() < 1e-12);
    assert!(log_log_slope(&x, &[1.0, 0.0, 1.0]).is_err());
    assert!(log_log_slope(&[1.0], &[1.0]).is_err());
}
