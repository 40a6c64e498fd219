//! Fisher information, exact and asymptotic Cramér-Rao bounds for the target
//! azimuth, their building blocks (probing power `e`, squared angle rate `r²`,
//! coupling factor `Γ`), and closed forms for two to four sectors.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::antenna::{amplitude, amplitude_derivative, PatternSpec};
use crate::config::{Pattern, SystemConfig};
use crate::error::{Error, Result};
use crate::geometry::Role;
use crate::manifold::{response, ResponseBundle};
use crate::model::Model;

/// Schur complements below this value are reported as an infinite bound.
pub const SCHUR_FLOOR: f64 = 1e-30;

/// Distance in radians from sector edges excluded from θ grids when the
/// pattern derivative is singular there.
pub const GRID_GUARD: f64 = 1e-4;

/// Number of points of the midpoint grid used for expectations over θ.
pub const EXPECTATION_POINTS: usize = 4096;

/// How the coupling factor enters the asymptotic bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    /// Use the closed-form `Γ(θ)`.
    Computed,
    /// Replace `Γ(θ)` by one.
    Unity,
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Inner products of the response factors and their derivatives.
#[derive(Debug, Clone, Copy)]
struct Factors {
    cc: f64,
    dd: f64,
    dcdc: f64,
    dddd: f64,
    dc_c: Complex64,
    dd_d: Complex64,
}

impl Factors {
    fn of(bundle: &ResponseBundle) -> Result<Self> {
        let dv = bundle
            .derivatives
            .as_ref()
            .ok_or_else(|| Error::Domain("response bundle lacks derivatives".into()))?;
        Ok(Self {
            cc: norm2(&bundle.c),
            dd: norm2(&bundle.a_p),
            dcdc: norm2(&dv.dc),
            dddd: norm2(&dv.da_p),
            dc_c: dot(&dv.dc, &bundle.c),
            dd_d: dot(&dv.da_p, &bundle.a_p),
        })
    }

    fn mu_mu(&self) -> f64 {
        self.cc * self.dd
    }

    fn dmu_dmu(&self) -> f64 {
        self.dcdc * self.dd + self.cc * self.dddd + 2.0 * (self.dc_c * self.dd_d.conj()).re
    }

    fn dmu_mu(&self) -> Complex64 {
        self.dc_c * self.dd + self.cc * self.dd_d
    }

    /// `‖μ̇‖² − |μ̇ᴴμ|²/‖μ‖²`, evaluated as the sum of the two non-negative
    /// per-factor Schur complements so no cancellation between large terms
    /// occurs.
    fn schur(&self) -> f64 {
        if self.cc <= 0.0 || self.dd <= 0.0 {
            return 0.0;
        }
        let tx = (self.dcdc - self.dc_c.norm_sqr() / self.cc).max(0.0);
        let rx = (self.dddd - self.dd_d.norm_sqr() / self.dd).max(0.0);
        self.dd * tx + self.cc * rx
    }
}

/// Fisher information over `(θ, Re α, Im α)` for one response bundle.
pub fn fim(alpha: Complex64, bundle: &ResponseBundle, sigma2: f64) -> Result<Matrix3<f64>> {
    let f = Factors::of(bundle)?;
    let k = 2.0 / sigma2;
    let cross = alpha.conj() * f.dmu_mu();
    let tt = k * alpha.norm_sqr() * f.dmu_dmu();
    let tr = k * cross.re;
    let ti = k * (Complex64::new(0.0, 1.0) * cross).re;
    let aa = k * f.mu_mu();
    Ok(Matrix3::new(tt, tr, ti, tr, aa, 0.0, ti, 0.0, aa))
}

fn crb_from(f: &Factors, alpha: Complex64, sigma2: f64) -> f64 {
    let schur = f.schur();
    let a2 = alpha.norm_sqr();
    if schur < SCHUR_FLOOR || a2 == 0.0 {
        return f64::INFINITY;
    }
    sigma2 / (2.0 * a2) / schur
}

/// Exact bound on the azimuth variance; `+∞` where the angle is not identifiable.
pub fn crb_exact(theta: f64, model: &Model) -> Result<f64> {
    let bundle = response(theta, model, true)?;
    Ok(crb_from(&Factors::of(&bundle)?, model.link.alpha, model.cfg.sigma2))
}

/// Exact coupling factor `1 − |ẋᴴx|² / (‖x‖²‖ẋ‖²)` of the receive (`d`) or
/// transmit (`c`) factor of a bundle. Returns 1 when the derivative vanishes.
pub fn gamma_exact(bundle: &ResponseBundle, role: Role) -> Result<f64> {
    let f = Factors::of(bundle)?;
    let (xx, dxdx, dx_x) = match role {
        Role::Sensor => (f.dd, f.dddd, f.dd_d),
        Role::Surface => (f.cc, f.dcdc, f.dc_c),
    };
    if xx <= 0.0 {
        return Err(Error::Domain("no sector illuminates this angle".into()));
    }
    if dxdx <= 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - dx_x.norm_sqr() / (xx * dxdx))
}

/// Large-array coupling factor
/// `Γ = 1 − (Σ F² sin θ_s)² / (Σ F² · Σ F² [sin² θ_s + cos² θ_s tan²(π/L)/3])`.
///
/// Both arrays share one pattern, so the surface and sensor values coincide.
/// Exactly 1 for two sectors.
pub fn gamma(theta: f64, cfg: &SystemConfig, _role: Role) -> Result<f64> {
    let spec = PatternSpec::new(cfg.pattern, cfg.sectors)?;
    gamma_with(theta, &spec)
}

fn gamma_with(theta: f64, spec: &PatternSpec) -> Result<f64> {
    let l = spec.sectors;
    let tan2 = if l > 2 { (PI / l as f64).tan().powi(2) } else { 0.0 };
    let (mut sf, mut num, mut den) = (0.0, 0.0, 0.0);
    for s in 0..l {
        let f2 = amplitude(spec, theta, s).powi(2);
        let (sin, cos) = (theta - spec.phi(s)).sin_cos();
        sf += f2;
        num += f2 * sin;
        den += f2 * (sin * sin + cos * cos * tan2 / 3.0);
    }
    if sf <= 0.0 {
        return Err(Error::Domain(format!("no sector illuminates θ = {theta}")));
    }
    if l == 2 {
        return Ok(1.0);
    }
    Ok(1.0 - num * num / (sf * den))
}

/// Probing power on the target, `‖Xᵀ (F_I b)*‖²`, in watt·snapshots.
pub fn probing_power_def(theta: f64, model: &Model) -> Result<f64> {
    Ok(norm2(&response(theta, model, false)?.c))
}

/// Squared angle rate `‖∂(F_S a)/∂θ‖²`.
pub fn angle_rate_def(theta: f64, model: &Model) -> Result<f64> {
    let bundle = response(theta, model, true)?;
    Ok(Factors::of(&bundle)?.dddd)
}

fn require_symmetric(cfg: &SystemConfig) -> Result<()> {
    if cfg.is_symmetric() {
        Ok(())
    } else {
        Err(Error::AsymmetricArchitecture {
            m_i: cfg.elements_per_sector,
            m_s: cfg.sensors_per_sector,
        })
    }
}

fn approx_from(e: f64, r2: f64, g: f64, alpha: Complex64, sigma2: f64) -> f64 {
    let prod = g * e * r2;
    if prod < SCHUR_FLOOR || alpha.norm_sqr() == 0.0 {
        return f64::INFINITY;
    }
    sigma2 / (4.0 * alpha.norm_sqr() * prod)
}

/// Asymptotic bound `σ² / (4|α|² Γ e r²)` for the symmetric architecture.
pub fn crb_approx(theta: f64, model: &Model, mode: GammaMode) -> Result<f64> {
    require_symmetric(&model.cfg)?;
    let bundle = response(theta, model, true)?;
    let f = Factors::of(&bundle)?;
    let g = match mode {
        GammaMode::Unity => 1.0,
        GammaMode::Computed => match gamma_with(theta, &model.pattern) {
            Ok(g) => g,
            Err(_) => return Ok(f64::INFINITY),
        },
    };
    Ok(approx_from(f.cc, f.dddd, g, model.link.alpha, model.cfg.sigma2))
}

/// Closed-form probing power and angle rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    /// Leading-order probing power `P_tr N Σ F² / L`.
    pub e_closed: f64,
    /// Leading-order squared angle rate.
    pub r2_closed: f64,
    /// Exact finite-array rate expansion including the `Ḟ²` term; `None`
    /// inside the directive guard band.
    pub r2_expansion: Option<f64>,
}

/// Number of sectors illuminating `theta` (1 or 2 for three sectors).
pub fn illuminated_count(theta: f64, spec: &PatternSpec) -> usize {
    (0..spec.sectors).filter(|&s| amplitude(spec, theta, s) > 0.0).count()
}

/// Closed-form `e` and `r²` for `L ∈ {2, 3, 4}` and `n` total elements per array.
pub fn closed_forms(theta: f64, sectors: usize, pattern: Pattern, n: usize, p_tr: f64) -> Result<ClosedForms> {
    if !(2..=4).contains(&sectors) {
        return Err(Error::Domain(format!(
            "closed forms exist for 2 to 4 sectors, got {sectors}"
        )));
    }
    let spec = PatternSpec::new(pattern, sectors)?;
    let l = sectors as f64;
    let n = n as f64;
    let pi2 = PI * PI;
    let mut sf = 0.0;
    let mut r2 = 0.0;
    let mut expansion = Some(0.0);
    let m = n / l;
    let inv_tan2 = if sectors > 2 { 1.0 / (PI / l).tan().powi(2) } else { 0.0 };
    for s in 0..sectors {
        let f = amplitude(&spec, theta, s);
        let f2 = f * f;
        let (sin, cos) = (theta - spec.phi(s)).sin_cos();
        sf += f2;
        r2 += match sectors {
            2 => pi2 * f2 * cos * cos * n.powi(3) / 96.0,
            3 => pi2 * f2 * n.powi(3) / 324.0,
            _ => pi2 * f2 * (2.0 * sin * sin + 1.0) * n.powi(3) / 768.0,
        };
        expansion = match (expansion, amplitude_derivative(&spec, theta, s)) {
            (Some(acc), Ok(df)) => Some(
                acc + pi2 * f2 * ((m.powi(3) - m) / 12.0 * cos * cos + m.powi(3) / 4.0 * inv_tan2 * sin * sin)
                    + df * df * m,
            ),
            _ => None,
        };
    }
    Ok(ClosedForms {
        e_closed: p_tr * n * sf / l,
        r2_closed: r2,
        r2_expansion: expansion,
    })
}

/// Four-sector directive rate `(3 + cos 4θ) π² N³ / 256` in the global frame.
pub fn four_sector_directive_rate(theta: f64, n: usize) -> f64 {
    (3.0 + (4.0 * theta).cos()) * PI * PI * (n as f64).powi(3) / 256.0
}

/// Midpoint grid `(k + ½) 2π / points`, dropping nodes within [`GRID_GUARD`]
/// of a sector edge when the pattern derivative is singular there.
pub fn expectation_grid(spec: &PatternSpec, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| (k as f64 + 0.5) * TAU / points as f64)
        .filter(|&t| !spec.singular_at_edges() || spec.edge_distance(t) >= GRID_GUARD)
        .collect()
}

/// Node grid `2πk / points`, with the same guard rule as [`expectation_grid`].
pub fn sweep_grid(spec: &PatternSpec, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| TAU * k as f64 / points as f64)
        .filter(|&t| !spec.singular_at_edges() || spec.edge_distance(t) >= GRID_GUARD)
        .collect()
}

/// Expected coefficients from the scaling-law table: `E{r²} ≈ c N³` and
/// `E{e} ≈ c P_tr N`. Three isotropic sectors list the one- and two-sector
/// phases separately.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePrediction {
    pub r2_coef: Vec<f64>,
    pub e_coef: Vec<f64>,
}

/// Published scaling coefficients for `L ∈ {2, 3, 4}`.
pub fn table_prediction(sectors: usize, pattern: Pattern) -> Result<TablePrediction> {
    let (r2, e) = match (sectors, pattern) {
        (2, _) => (vec![0.102], vec![1.0]),
        (3, Pattern::Isotropic) => (vec![0.061, 0.121], vec![0.67, 1.33]),
        (3, Pattern::Directive) => (vec![0.116], vec![1.33]),
        (4, Pattern::Isotropic) => (vec![0.102], vec![1.0]),
        (4, Pattern::Directive) => (vec![0.116], vec![1.5]),
        _ => {
            return Err(Error::Domain(format!(
                "scaling table covers 2 to 4 sectors, got {sectors}"
            )))
        }
    };
    Ok(TablePrediction { r2_coef: r2, e_coef: e })
}

/// Grid averages of `e` and `r²` over θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSummary {
    pub sectors: usize,
    pub pattern: Pattern,
    pub n: usize,
    pub e_mean: f64,
    pub r2_mean: f64,
    /// For three sectors, averages restricted to angles seen by one sector
    /// and by two sectors: `[(e, r²), (e, r²)]`.
    pub phase_means: Option<[(f64, f64); 2]>,
    /// Published coefficients, when the sector count is covered.
    pub predicted: Option<TablePrediction>,
}

fn summarize<F>(sectors: usize, pattern: Pattern, n: usize, mut eval: F) -> Result<ScalingSummary>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let spec = PatternSpec::new(pattern, sectors)?;
    let iso = PatternSpec::new(Pattern::Isotropic, sectors)?;
    let grid = expectation_grid(&spec, EXPECTATION_POINTS);
    let mut total = (0.0, 0.0);
    let mut phase = [(0.0, 0.0, 0usize); 2];
    for &t in &grid {
        let (e, r2) = eval(t)?;
        total.0 += e;
        total.1 += r2;
        let k = illuminated_count(t, &iso).clamp(1, 2) - 1;
        phase[k].0 += e;
        phase[k].1 += r2;
        phase[k].2 += 1;
    }
    let count = grid.len() as f64;
    let phase_means =
        (sectors == 3 && phase.iter().all(|p| p.2 > 0)).then(|| phase.map(|(e, r, c)| (e / c as f64, r / c as f64)));
    Ok(ScalingSummary {
        sectors,
        pattern,
        n,
        e_mean: total.0 / count,
        r2_mean: total.1 / count,
        phase_means,
        predicted: table_prediction(sectors, pattern).ok(),
    })
}

/// Averages of the closed forms over the expectation grid, with the published
/// coefficients for comparison.
pub fn scaling_summary(sectors: usize, pattern: Pattern, n: usize, p_tr: f64) -> Result<ScalingSummary> {
    table_prediction(sectors, pattern)?;
    summarize(sectors, pattern, n, |t| {
        let cf = closed_forms(t, sectors, pattern, n, p_tr)?;
        Ok((cf.e_closed, cf.r2_closed))
    })
}

/// Averages of the definitional `e` and `r²` of a model over the expectation grid.
pub fn expectation_def(model: &Model) -> Result<ScalingSummary> {
    let cfg = &model.cfg;
    summarize(cfg.sectors, cfg.pattern, cfg.n_i(), |t| {
        let f = Factors::of(&response(t, model, true)?)?;
        Ok((f.cc, f.dddd))
    })
}
