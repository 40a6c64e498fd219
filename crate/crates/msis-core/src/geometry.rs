//! Prism geometry: sector rotations, element and sensor positions, and the
//! map from global target azimuth to per-sector local angles.
//!
//! Positions are in half-wavelength units. Sectors are indexed from zero;
//! sector `s` faces the direction `φ_s = π/2 + (2s + 1)π/L`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_2pi(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let w = wrap_2pi(x);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Unit direction vector `u(θ) = [cos θ, sin θ]`.
pub fn direction(theta: f64) -> Vector2<f64> {
    Vector2::new(theta.cos(), theta.sin())
}

/// Broadside angle `φ_s` of sector `s` (zero-based) in a prism of `sectors` faces.
pub fn sector_rotation_angle(sector: usize, sectors: usize) -> Result<f64> {
    if sectors < 2 || sector >= sectors {
        return Err(Error::Domain(format!(
            "sector index {sector} outside 0..{sectors} (need at least 2 sectors)"
        )));
    }
    let l = sectors as f64;
    Ok(wrap_2pi(PI / 2.0 + (2.0 * sector as f64 + 1.0) * PI / l))
}

/// Centered coordinates `-(M-1)/2, …, (M-1)/2` of an `M`-element line array.
pub fn local_axis_positions(m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Domain("array needs at least one element".into()));
    }
    let half = (m as f64 - 1.0) / 2.0;
    Ok((0..m).map(|i| i as f64 - half).collect())
}

/// Distance from the prism axis to each face center, `M / (2 tan(π/L))`.
///
/// Two sectors share one plane through the origin, so the offset is zero.
pub fn center_offset(sectors: usize, m: usize) -> f64 {
    if sectors <= 2 {
        0.0
    } else {
        m as f64 / (2.0 * (PI / sectors as f64).tan())
    }
}

/// Frame of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorFrame {
    /// Broadside angle, rad, in `[0, 2π)`.
    pub phi: f64,
    /// Rotation taking local coordinates to global coordinates.
    pub local_to_global: Matrix2<f64>,
    /// Inverse of `local_to_global`.
    pub global_to_local: Matrix2<f64>,
    /// Face center in global coordinates.
    pub center: Vector2<f64>,
}

impl SectorFrame {
    /// Maps a point from local sector coordinates to global coordinates.
    pub fn to_global(&self, local: Vector2<f64>) -> Vector2<f64> {
        self.local_to_global * local + self.center
    }

    /// Maps a global point into local sector coordinates.
    pub fn to_local(&self, global: Vector2<f64>) -> Vector2<f64> {
        self.global_to_local * (global - self.center)
    }
}

/// Which array of a sector a position set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Surface elements (transmit side).
    Surface,
    /// Receive sensors.
    Sensor,
}

/// Complete prism layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorGeometry {
    pub sectors: usize,
    /// Face-center distance from the origin.
    pub offset: f64,
    pub frames: Vec<SectorFrame>,
    /// Local along-face coordinates of the surface elements.
    pub local_surface: Vec<f64>,
    /// Local along-face coordinates of the sensors.
    pub local_sensor: Vec<f64>,
    /// Global surface-element positions, one vector per sector.
    pub pos_surface: Vec<Vec<Vector2<f64>>>,
    /// Global sensor positions, one vector per sector.
    pub pos_sensor: Vec<Vec<Vector2<f64>>>,
}

/// Builds the prism layout. The face width uses `M = max(M_I, M_S)`.
pub fn build_geometry(cfg: &SystemConfig) -> Result<SectorGeometry> {
    cfg.validate()?;
    let l = cfg.sectors;
    let m = cfg.elements_per_sector.max(cfg.sensors_per_sector);
    let offset = center_offset(l, m);
    let local_surface = local_axis_positions(cfg.elements_per_sector)?;
    let local_sensor = local_axis_positions(cfg.sensors_per_sector)?;

    let mut frames = Vec::with_capacity(l);
    let mut pos_surface = Vec::with_capacity(l);
    let mut pos_sensor = Vec::with_capacity(l);
    for s in 0..l {
        let phi = sector_rotation_angle(s, l)?;
        let (sin, cos) = phi.sin_cos();
        let local_to_global = Matrix2::new(cos, -sin, sin, cos);
        let frame = SectorFrame {
            phi,
            local_to_global,
            global_to_local: local_to_global.transpose(),
            center: offset * Vector2::new(cos, sin),
        };
        let place =
            |ys: &[f64]| -> Vec<Vector2<f64>> { ys.iter().map(|&y| frame.to_global(Vector2::new(0.0, y))).collect() };
        pos_surface.push(place(&local_surface));
        pos_sensor.push(place(&local_sensor));
        frames.push(frame);
    }
    Ok(SectorGeometry {
        sectors: l,
        offset,
        frames,
        local_surface,
        local_sensor,
        pos_surface,
        pos_sensor,
    })
}

impl SectorGeometry {
    /// Global positions of one array of a sector.
    pub fn positions(&self, role: Role, sector: usize) -> &[Vector2<f64>] {
        match role {
            Role::Surface => &self.pos_surface[sector],
            Role::Sensor => &self.pos_sensor[sector],
        }
    }

    /// Broadside angle of a sector.
    pub fn phi(&self, sector: usize) -> f64 {
        self.frames[sector].phi
    }
}

/// Target position in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    /// Global azimuth in `[0, 2π)`.
    pub theta: f64,
    /// Range in meters.
    pub rho: f64,
}

impl TargetState {
    pub fn new(theta: f64, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("invalid target (θ = {theta}, ρ = {rho})")));
        }
        Ok(Self {
            theta: wrap_2pi(theta),
            rho,
        })
    }

    /// Position `ρ u(θ)` in meters.
    pub fn position_m(&self) -> Vector2<f64> {
        self.rho * direction(self.theta)
    }
}

/// Far-field local angle `θ − φ_s`, wrapped to `(-π, π]`.
pub fn local_target_angle(theta: f64, sector: usize, geom: &SectorGeometry) -> f64 {
    wrap_pi(theta - geom.phi(sector))
}

/// Exact local angle of the target seen from the face center of a sector,
/// in `(-π, π]`. `wavelength` converts the target range to half-wavelengths.
pub fn local_target_angle_exact(
    target: &TargetState,
    sector: usize,
    geom: &SectorGeometry,
    wavelength: f64,
) -> Result<f64> {
    let p_t = target.position_m() / (wavelength / 2.0);
    let v = geom.frames[sector].to_local(p_t);
    if v.norm() <= 1e-12 * (1.0 + p_t.norm()) {
        return Err(Error::DegeneratePosition { sector });
    }
    Ok(v.y.atan2(v.x))
}
