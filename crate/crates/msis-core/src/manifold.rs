//! Steering vectors, pattern-weighted manifolds and the factored noiseless
//! response `μ(θ) = c ⊗ d` with its angle derivative.
//!
//! The transmit side enters through `c = Xᵀ (F_I b)*` (length `Q`), the
//! receive side through `d = F_S a` (length `N_S`). The stacked response is
//! the column-major vectorization of `d cᵀ`, so entry `q·N_S + n` equals
//! `c[q]·d[n]`.

use std::f64::consts::PI;

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::antenna::{amplitude, amplitude_derivative, PatternSpec};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::geometry::{direction, Role, SectorGeometry};
use crate::model::Model;

const J: Complex64 = Complex64::new(0.0, 1.0);

fn steering(theta: f64, pos: &[Vector2<f64>], sign: f64) -> Vec<Complex64> {
    let u = direction(theta);
    pos.iter()
        .map(|p| Complex64::from_polar(1.0, sign * PI * p.dot(&u)))
        .collect()
}

fn steering_derivative(theta: f64, pos: &[Vector2<f64>], sign: f64) -> Vec<Complex64> {
    let u = direction(theta);
    let du = Vector2::new(-theta.sin(), theta.cos());
    pos.iter()
        .map(|p| sign * J * PI * p.dot(&du) * Complex64::from_polar(1.0, sign * PI * p.dot(&u)))
        .collect()
}

/// Receive steering vector `exp(jπ P_Sᵀ u(θ))` of one sector.
pub fn steering_rx(theta: f64, geom: &SectorGeometry, sector: usize) -> Vec<Complex64> {
    steering(theta, geom.positions(Role::Sensor, sector), 1.0)
}

/// Transmit steering vector `exp(-jπ P_Iᵀ u(θ))` of one sector.
pub fn steering_tx(theta: f64, geom: &SectorGeometry, sector: usize) -> Vec<Complex64> {
    steering(theta, geom.positions(Role::Surface, sector), -1.0)
}

/// Angle derivative of [`steering_rx`].
pub fn steering_rx_derivative(theta: f64, geom: &SectorGeometry, sector: usize) -> Vec<Complex64> {
    steering_derivative(theta, geom.positions(Role::Sensor, sector), 1.0)
}

/// Angle derivative of [`steering_tx`].
pub fn steering_tx_derivative(theta: f64, geom: &SectorGeometry, sector: usize) -> Vec<Complex64> {
    steering_derivative(theta, geom.positions(Role::Surface, sector), -1.0)
}

/// Angle derivatives of the manifold components.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseDerivatives {
    /// Derivative of `a_p`.
    pub da_p: Vec<Complex64>,
    /// Derivative of `b_p`.
    pub db_p: Vec<Complex64>,
    /// Derivative of `c`.
    pub dc: Vec<Complex64>,
}

/// Manifolds and factored response at one angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseBundle {
    pub theta: f64,
    /// Stacked receive steering vector, length `N_S`.
    pub a: Vec<Complex64>,
    /// Stacked transmit steering vector, length `N_I`.
    pub b: Vec<Complex64>,
    /// Pattern-weighted receive manifold `F_S a`; this is the factor `d`.
    pub a_p: Vec<Complex64>,
    /// Pattern-weighted transmit manifold `F_I b`.
    pub b_p: Vec<Complex64>,
    /// Codebook-projected transmit factor `Xᵀ (F_I b)*`, length `Q`.
    pub c: Vec<Complex64>,
    /// Per-sector amplitudes `F(θ, s)`.
    pub amplitudes: Vec<f64>,
    pub derivatives: Option<ResponseDerivatives>,
}

impl ResponseBundle {
    /// Receive factor `d = a_p`.
    pub fn d(&self) -> &[Complex64] {
        &self.a_p
    }

    /// Materialized response `c ⊗ d`, length `Q·N_S`.
    pub fn mu(&self) -> Vec<Complex64> {
        kron(&self.c, &self.a_p)
    }

    /// Materialized derivative `ċ ⊗ d + c ⊗ ḋ`, if derivatives were computed.
    pub fn dmu(&self) -> Option<Vec<Complex64>> {
        self.derivatives.as_ref().map(|dv| {
            kron(&dv.dc, &self.a_p)
                .into_iter()
                .zip(kron(&self.c, &dv.da_p))
                .map(|(x, y)| x + y)
                .collect()
        })
    }
}

/// Kronecker product of two vectors; `x` is the outer index.
pub fn kron(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    x.iter().flat_map(|xi| y.iter().map(move |yi| xi * yi)).collect()
}

/// Computes the response at `theta`. With `with_derivatives`, fails inside
/// the directive guard band where the amplitude derivative diverges.
pub fn response(theta: f64, model: &Model, with_derivatives: bool) -> Result<ResponseBundle> {
    let geom = &model.geometry;
    let spec = &model.pattern;
    let l = model.cfg.sectors;
    let amplitudes: Vec<f64> = (0..l).map(|s| amplitude(spec, theta, s)).collect();

    let mut a = Vec::with_capacity(model.cfg.n_s());
    let mut b = Vec::with_capacity(model.cfg.n_i());
    let mut a_p = Vec::with_capacity(model.cfg.n_s());
    let mut b_p = Vec::with_capacity(model.cfg.n_i());
    for (s, &f) in amplitudes.iter().enumerate() {
        let a_s = steering_rx(theta, geom, s);
        let b_s = steering_tx(theta, geom, s);
        a_p.extend(a_s.iter().map(|z| f * z));
        b_p.extend(b_s.iter().map(|z| f * z));
        a.extend(a_s);
        b.extend(b_s);
    }
    let c = project(model, &b_p);

    let derivatives = if with_derivatives {
        let mut da_p = Vec::with_capacity(a.len());
        let mut db_p = Vec::with_capacity(b.len());
        let m_s = model.cfg.sensors_per_sector;
        let m_i = model.cfg.elements_per_sector;
        for (s, &f) in amplitudes.iter().enumerate() {
            let df = amplitude_derivative(spec, theta, s)?;
            let da = steering_rx_derivative(theta, geom, s);
            let db = steering_tx_derivative(theta, geom, s);
            let a_s = &a[s * m_s..(s + 1) * m_s];
            let b_s = &b[s * m_i..(s + 1) * m_i];
            da_p.extend(a_s.iter().zip(&da).map(|(x, dx)| df * x + f * dx));
            db_p.extend(b_s.iter().zip(&db).map(|(x, dx)| df * x + f * dx));
        }
        let dc = project(model, &db_p);
        Some(ResponseDerivatives { da_p, db_p, dc })
    } else {
        None
    };

    Ok(ResponseBundle {
        theta,
        a,
        b,
        a_p,
        b_p,
        c,
        amplitudes,
        derivatives,
    })
}

/// `Xᵀ v*` for a transmit-side vector `v`.
fn project(model: &Model, v: &[Complex64]) -> Vec<Complex64> {
    let x = &model.codebook.x;
    (0..x.ncols())
        .map(|q| x.column(q).iter().zip(v).map(|(xq, vn)| xq * vn.conj()).sum())
        .collect()
}

/// Large-array approximations of the receive-manifold inner products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticProducts {
    /// `ȧ_pᴴ a_p`.
    pub da_a: Complex64,
    /// `a_pᴴ a_p`.
    pub a_a: f64,
    /// `ȧ_pᴴ ȧ_p`, leading order in `M_S`.
    pub da_da: f64,
}

/// Evaluates the large-array inner products of the receive manifold.
pub fn asymptotic_inner_products(theta: f64, cfg: &SystemConfig) -> Result<AsymptoticProducts> {
    let spec = PatternSpec::new(cfg.pattern, cfg.sectors)?;
    let m = cfg.sensors_per_sector as f64;
    let l = cfg.sectors;
    let inv_tan = if l <= 2 { 0.0 } else { 1.0 / (PI / l as f64).tan() };
    let mut da_a = Complex64::new(0.0, 0.0);
    let mut a_a = 0.0;
    let mut da_da = 0.0;
    for s in 0..l {
        let f2 = amplitude(&spec, theta, s).powi(2);
        let (sin, cos) = (theta - spec.phi(s)).sin_cos();
        da_a += J * PI * f2 * m * m * inv_tan / 2.0 * sin;
        a_a += f2 * m;
        da_da += PI * PI * f2 * (cos * cos / 12.0 + sin * sin * inv_tan * inv_tan / 4.0) * m.powi(3);
    }
    Ok(AsymptoticProducts { da_a, a_a, da_da })
}

/// Coupling between the receive manifolds of two sectors at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSectorDecay {
    pub beta1: f64,
    pub beta2: f64,
    /// `1 / (M sin(π|β₂|))`.
    pub bound: f64,
    /// `|a_pᴴ a_p'| / ‖a_p‖²`, normalized by the stronger of the two sectors.
    pub actual: f64,
}

/// Measures the cross-sector inner product of two illuminated sectors and
/// the closed-form bound on it.
pub fn cross_sector_decay(theta: f64, s1: usize, s2: usize, model: &Model) -> Result<CrossSectorDecay> {
    let l = model.cfg.sectors;
    if s1 == s2 || s1 >= l || s2 >= l {
        return Err(Error::Domain(format!(
            "need two distinct sectors in 0..{l}, got {s1}, {s2}"
        )));
    }
    let spec = &model.pattern;
    let (f1, f2) = (amplitude(spec, theta, s1), amplitude(spec, theta, s2));
    if f1 == 0.0 || f2 == 0.0 {
        return Err(Error::Domain(format!(
            "sectors {s1} and {s2} must both illuminate θ = {theta}"
        )));
    }
    let t1 = theta - spec.phi(s1);
    let t2 = theta - spec.phi(s2);
    let inv_tan = if l <= 2 { 0.0 } else { 1.0 / (PI / l as f64).tan() };
    let beta1 = (t1.cos() - t2.cos()) * inv_tan / 2.0;
    let beta2 = (t1.sin() - t2.sin()) / 2.0;
    let m = model.cfg.sensors_per_sector as f64;
    let bound = 1.0 / (m * (PI * beta2.abs()).sin());

    let geom = &model.geometry;
    let a1: Vec<Complex64> = steering_rx(theta, geom, s1).iter().map(|z| f1 * z).collect();
    let a2: Vec<Complex64> = steering_rx(theta, geom, s2).iter().map(|z| f2 * z).collect();
    let cross: Complex64 = a1.iter().zip(&a2).map(|(x, y)| x.conj() * y).sum();
    let strongest = f1.max(f2);
    let actual = cross.norm() / (strongest * strongest * m);
    Ok(CrossSectorDecay {
        beta1,
        beta2,
        bound,
        actual,
    })
}
