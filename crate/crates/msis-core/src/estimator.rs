//! Maximum-likelihood estimation of the target azimuth and path gain from
//! one stacked observation.
//!
//! The concentrated likelihood `|μᴴy|² / ‖μ‖²` is scanned on a uniform grid,
//! refined by golden-section search between the neighbours of the best node,
//! and finally polished by a bracketed root search on its analytic derivative
//! when that derivative is available.

use num_complex::Complex64;

use crate::bounds::sweep_grid;
use crate::error::{Error, Result};
use crate::geometry::wrap_2pi;
use crate::manifold::{response, ResponseBundle};
use crate::model::Model;

/// Default number of grid nodes.
pub const DEFAULT_GRID: usize = 4096;

/// Final bracket width of the golden-section search, rad.
pub const REFINE_TOL: f64 = 1e-7;

/// Responses with squared norm below this value have zero metric.
pub const METRIC_FLOOR: f64 = 1e-30;

/// Result of one estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Azimuth estimate in `[0, 2π)`.
    pub theta_hat: f64,
    /// Path-gain estimate `μᴴy / ‖μ‖²` at `theta_hat`.
    pub alpha_hat: Complex64,
    /// Concentrated likelihood at `theta_hat`.
    pub metric_value: f64,
    /// Grid spacing, rad.
    pub grid_resolution: f64,
    /// Whether a continuous refinement step ran.
    pub refined: bool,
}

fn check_len(y: &[Complex64], model: &Model) -> Result<()> {
    let expected = model.cfg.observation_len();
    if y.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: y.len(),
        });
    }
    Ok(())
}

/// Concentrated likelihood `|μ(θ)ᴴy|² / ‖μ(θ)‖²`, evaluated as
/// `|dᴴ Y c*|² / (‖c‖²‖d‖²)` with `Y` the `N_S × Q` reshape of `y`.
pub fn ml_metric(y: &[Complex64], theta: f64, model: &Model) -> Result<f64> {
    check_len(y, model)?;
    let r = response(theta, model, false)?;
    let ns = model.cfg.n_s();
    let norm = sq(&r.c) * sq(&r.a_p);
    if norm < METRIC_FLOOR {
        return Ok(0.0);
    }
    let mut g = Complex64::new(0.0, 0.0);
    for (q, cq) in r.c.iter().enumerate() {
        let col = &y[q * ns..(q + 1) * ns];
        let inner: Complex64 = r.a_p.iter().zip(col).map(|(d, v)| d.conj() * v).sum();
        g += inner * cq.conj();
    }
    Ok(g.norm_sqr() / norm)
}

/// Runs the full estimator once. Builds an [`Estimator`]; reuse one directly
/// when processing many observations of the same model.
pub fn estimate(y: &[Complex64], model: &Model, grid_points: usize, refine: bool) -> Result<Estimate> {
    Estimator::new(model, grid_points, refine)?.estimate(y)
}

fn sq(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Grid node with its precomputed manifold factors.
#[derive(Debug, Clone)]
struct Node {
    theta: f64,
    sectors: Vec<usize>,
    b_p: Vec<Complex64>,
    d: Vec<Complex64>,
    norm: f64,
}

/// Observation-specific product `W = Y Xᴴ`, `N_S × N_I`, row-major.
struct Workspace {
    w: Vec<Complex64>,
    ni: usize,
}

/// Estimator with the grid manifold cached for one model.
#[derive(Debug, Clone)]
pub struct Estimator<'a> {
    model: &'a Model,
    nodes: Vec<Node>,
    grid_points: usize,
    refine: bool,
}

impl<'a> Estimator<'a> {
    /// Precomputes the grid. Nodes within the guard band of sector edges
    /// are skipped for patterns whose derivative is singular there.
    pub fn new(model: &'a Model, grid_points: usize, refine: bool) -> Result<Self> {
        if grid_points < 8 {
            return Err(Error::Domain(format!(
                "grid needs at least 8 points, got {grid_points}"
            )));
        }
        let nodes = sweep_grid(&model.pattern, grid_points)
            .into_iter()
            .map(|t| {
                let r = response(t, model, false)?;
                Ok(Node {
                    theta: t,
                    sectors: illuminated(&r),
                    norm: sq(&r.c) * sq(&r.a_p),
                    b_p: r.b_p,
                    d: r.a_p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            nodes,
            grid_points,
            refine,
        })
    }

    /// Grid spacing, rad.
    pub fn resolution(&self) -> f64 {
        std::f64::consts::TAU / self.grid_points as f64
    }

    fn workspace(&self, y: &[Complex64]) -> Workspace {
        let cfg = &self.model.cfg;
        let (ns, ni, q) = (cfg.n_s(), cfg.n_i(), cfg.snapshots);
        let x = &self.model.codebook.x;
        let mut w = vec![Complex64::new(0.0, 0.0); ns * ni];
        for k in 0..ni {
            for qq in 0..q {
                let xc = x[(k, qq)].conj();
                let col = &y[qq * ns..(qq + 1) * ns];
                for n in 0..ns {
                    w[n * ni + k] += col[n] * xc;
                }
            }
        }
        Workspace { w, ni }
    }

    /// `dᴴ W b` restricted to the listed sectors.
    fn inner(&self, ws: &Workspace, sectors: &[usize], d: &[Complex64], b: &[Complex64]) -> Complex64 {
        let ms = self.model.cfg.sensors_per_sector;
        let mi = self.model.cfg.elements_per_sector;
        let mut acc = Complex64::new(0.0, 0.0);
        for &s1 in sectors {
            for (n, dn) in d.iter().enumerate().skip(s1 * ms).take(ms) {
                let row = &ws.w[n * ws.ni..(n + 1) * ws.ni];
                let mut t = Complex64::new(0.0, 0.0);
                for &s2 in sectors {
                    for k in s2 * mi..(s2 + 1) * mi {
                        t += row[k] * b[k];
                    }
                }
                acc += dn.conj() * t;
            }
        }
        acc
    }

    fn metric_at(&self, ws: &Workspace, theta: f64) -> Result<(f64, Complex64, f64)> {
        let r = response(theta, self.model, false)?;
        let norm = sq(&r.c) * sq(&r.a_p);
        if norm < METRIC_FLOOR {
            return Ok((0.0, Complex64::new(0.0, 0.0), norm));
        }
        let g = self.inner(ws, &illuminated(&r), &r.a_p, &r.b_p);
        Ok((g.norm_sqr() / norm, g, norm))
    }

    /// Derivative of the metric with respect to θ, or `None` inside a guard band.
    fn metric_slope(&self, ws: &Workspace, theta: f64) -> Option<f64> {
        let r = response(theta, self.model, true).ok()?;
        let dv = r.derivatives.as_ref()?;
        let (cc, dd) = (sq(&r.c), sq(&r.a_p));
        let norm = cc * dd;
        if norm < METRIC_FLOOR {
            return None;
        }
        let all: Vec<usize> = (0..self.model.cfg.sectors).collect();
        let g = self.inner(ws, &all, &r.a_p, &r.b_p);
        let dg = self.inner(ws, &all, &dv.da_p, &r.b_p) + self.inner(ws, &all, &r.a_p, &dv.db_p);
        let dc_c: Complex64 = dv.dc.iter().zip(&r.c).map(|(a, b)| a.conj() * b).sum();
        let dd_d: Complex64 = dv.da_p.iter().zip(&r.a_p).map(|(a, b)| a.conj() * b).sum();
        let dnorm = 2.0 * dc_c.re * dd + 2.0 * cc * dd_d.re;
        Some((2.0 * (g.conj() * dg).re * norm - g.norm_sqr() * dnorm) / (norm * norm))
    }

    /// Metric on the grid for one observation, in node order.
    pub fn grid_metric(&self, y: &[Complex64]) -> Result<Vec<(f64, f64)>> {
        check_len(y, self.model)?;
        let ws = self.workspace(y);
        Ok(self.scan(&ws))
    }

    fn scan(&self, ws: &Workspace) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .map(|n| {
                let v = if n.norm < METRIC_FLOOR {
                    0.0
                } else {
                    self.inner(ws, &n.sectors, &n.d, &n.b_p).norm_sqr() / n.norm
                };
                (n.theta, v)
            })
            .collect()
    }

    /// Estimates `(θ, α)` from one observation of length `Q·N_S`.
    pub fn estimate(&self, y: &[Complex64]) -> Result<Estimate> {
        check_len(y, self.model)?;
        let ws = self.workspace(y);
        let scan = self.scan(&ws);
        let mut best = 0;
        for (i, &(_, v)) in scan.iter().enumerate() {
            if v > scan[best].1 {
                best = i;
            }
        }
        let (grid_theta, grid_value) = scan[best];
        if grid_value.is_nan() || grid_value <= 0.0 {
            return Err(Error::EstimationFailed("likelihood is zero on the whole grid".into()));
        }

        let mut theta = grid_theta;
        let mut refined = false;
        if self.refine && scan.len() >= 3 {
            let count = scan.len();
            let prev = scan[(best + count - 1) % count].0;
            let next = scan[(best + 1) % count].0;
            let lo = grid_theta - wrap_2pi(grid_theta - prev);
            let hi = grid_theta + wrap_2pi(next - grid_theta);
            let (t_gold, v_gold) = golden_max(
                |t| self.metric_at(&ws, t).map(|m| m.0).unwrap_or(0.0),
                lo,
                hi,
                REFINE_TOL,
            );
            if v_gold >= grid_value {
                theta = t_gold;
                refined = true;
                if let Some(t_pol) = self.polish(&ws, t_gold) {
                    let v_pol = self.metric_at(&ws, t_pol)?.0;
                    if v_pol >= grid_value && v_pol >= v_gold * (1.0 - 1e-12) {
                        theta = t_pol;
                    }
                }
            }
        }
        let theta = wrap_2pi(theta);
        let (metric_value, g, norm) = self.metric_at(&ws, theta)?;
        let alpha_hat = if norm < METRIC_FLOOR {
            Complex64::new(0.0, 0.0)
        } else {
            g / norm
        };
        Ok(Estimate {
            theta_hat: theta,
            alpha_hat,
            metric_value,
            grid_resolution: self.resolution(),
            refined,
        })
    }

    /// Regula-falsi root search of the metric slope around `t0`.
    fn polish(&self, ws: &Workspace, t0: f64) -> Option<f64> {
        let h = 10.0 * REFINE_TOL;
        let (mut a, mut b) = (t0 - h, t0 + h);
        let (mut fa, mut fb) = (self.metric_slope(ws, a)?, self.metric_slope(ws, b)?);
        if !(fa > 0.0 && fb < 0.0) {
            return None;
        }
        let mut side = 0i8;
        let mut x = t0;
        for _ in 0..100 {
            x = (a * fb - b * fa) / (fb - fa);
            if !(x > a && x < b) {
                x = 0.5 * (a + b);
            }
            let fx = self.metric_slope(ws, x)?;
            if fx == 0.0 || b - a < 1e-14 {
                break;
            }
            if fx > 0.0 {
                a = x;
                fa = fx;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            } else {
                b = x;
                fb = fx;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            }
        }
        Some(x)
    }
}

fn illuminated(r: &ResponseBundle) -> Vec<usize> {
    r.amplitudes
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 0.0)
        .map(|(s, _)| s)
        .collect()
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`. Returns the
/// best evaluated point and its value.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f2 > f1 { (x2, f2) } else { (x1, f1) };
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3).powi(2), -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v <= 0.0);
    }

    #[test]
    fn golden_on_monotone_goes_to_edge() {
        let (x, _) = golden_max(|x| x, 0.0, 1.0, 1e-9);
        assert!(x > 1.0 - 1e-8);
    }
}
