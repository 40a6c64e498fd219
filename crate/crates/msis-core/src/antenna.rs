//! Element gain patterns over the front half-space of each sector.
//!
//! The isotropic pattern has constant gain 2. The directive pattern is
//! `2(α+1)cos^α θ_l` with `α` chosen so the half-power point falls on the
//! sector's angular half-width `π/L`. Both integrate to `4π` over a hemisphere.

use std::f64::consts::PI;

use crate::config::Pattern;
use crate::error::{Error, Result};
use crate::geometry::wrap_pi;

/// Half-width in radians of the band around a sector edge in which the
/// directive amplitude derivative is treated as singular.
pub const BOUNDARY_EPS: f64 = 1e-6;

/// Cosines at or below this value are treated as the sector edge or beyond.
pub const EDGE_COS_TOL: f64 = 1e-12;

/// Gain pattern of one element type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSpec {
    pub kind: Pattern,
    /// Rolloff exponent; zero for the isotropic pattern.
    pub alpha: f64,
    pub sectors: usize,
}

impl PatternSpec {
    pub fn new(kind: Pattern, sectors: usize) -> Result<Self> {
        let alpha = match kind {
            Pattern::Isotropic => {
                rolloff_exponent(sectors)?;
                0.0
            }
            Pattern::Directive => rolloff_exponent(sectors)?,
        };
        Ok(Self { kind, alpha, sectors })
    }

    /// Whether the amplitude derivative diverges at sector edges, i.e. `0 < α < 2`.
    pub fn singular_at_edges(&self) -> bool {
        self.alpha > 0.0 && self.alpha < 2.0
    }

    /// Broadside angle of `sector`.
    pub fn phi(&self, sector: usize) -> f64 {
        let l = self.sectors as f64;
        PI / 2.0 + (2.0 * sector as f64 + 1.0) * PI / l
    }

    /// Angular distance from `theta` to the nearest sector edge.
    pub fn edge_distance(&self, theta: f64) -> f64 {
        (0..self.sectors)
            .map(|s| {
                let t = wrap_pi(theta - self.phi(s)).abs();
                (t - PI / 2.0).abs()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Directive rolloff exponent `log(1/2) / log(cos(π/L))`; exactly 0, 1, 2 for
/// `L` = 2, 3, 4.
pub fn rolloff_exponent(sectors: usize) -> Result<f64> {
    match sectors {
        0 | 1 => Err(Error::Domain(format!(
            "rolloff exponent needs at least 2 sectors, got {sectors}"
        ))),
        2 => Ok(0.0),
        3 => Ok(1.0),
        4 => Ok(2.0),
        l => Ok(0.5f64.ln() / (PI / l as f64).cos().ln()),
    }
}

/// Power gain at local angle `theta_l`; zero on and behind the sector edge.
pub fn gain(spec: &PatternSpec, theta_l: f64) -> f64 {
    let c = theta_l.cos();
    if c <= EDGE_COS_TOL {
        return 0.0;
    }
    match spec.kind {
        Pattern::Isotropic => 2.0,
        Pattern::Directive => 2.0 * (spec.alpha + 1.0) * c.powf(spec.alpha),
    }
}

/// Amplitude gain `F(θ, s) = sqrt(G(θ − φ_s))`.
pub fn amplitude(spec: &PatternSpec, theta: f64, sector: usize) -> f64 {
    gain(spec, theta - spec.phi(sector)).sqrt()
}

/// Derivative of [`amplitude`] with respect to `theta`.
///
/// Returns 0 behind the sector and for the isotropic pattern. Fails with
/// [`Error::BoundarySingularity`] within [`BOUNDARY_EPS`] of an edge when the
/// derivative diverges there.
pub fn amplitude_derivative(spec: &PatternSpec, theta: f64, sector: usize) -> Result<f64> {
    let t = theta - spec.phi(sector);
    let (s, c) = t.sin_cos();
    if spec.singular_at_edges() && c.abs() < BOUNDARY_EPS.sin() {
        return Err(Error::BoundarySingularity {
            distance: c.abs().asin(),
        });
    }
    if c <= EDGE_COS_TOL || spec.kind == Pattern::Isotropic || spec.alpha == 0.0 {
        return Ok(0.0);
    }
    let a = spec.alpha;
    Ok(-(2.0 * (a + 1.0)).sqrt() * (a / 2.0) * c.powf(a / 2.0 - 1.0) * s)
}

/// Integral of the gain over a hemisphere, with the pattern extended
/// rotationally about boresight. Composite midpoint rule on `intervals`
/// polar-angle steps, which avoids the edge where the gain is set to zero.
pub fn hemisphere_power(spec: &PatternSpec, intervals: usize) -> f64 {
    let n = intervals.max(1);
    let h = (PI / 2.0) / n as f64;
    (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            2.0 * PI * gain(spec, x) * x.sin()
        })
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dir(l: usize) -> PatternSpec {
        PatternSpec::new(Pattern::Directive, l).unwrap()
    }

    fn iso(l: usize) -> PatternSpec {
        PatternSpec::new(Pattern::Isotropic, l).unwrap()
    }

    #[test]
    fn rolloff_values() {
        assert_eq!(rolloff_exponent(2).unwrap(), 0.0);
        assert_eq!(rolloff_exponent(3).unwrap(), 1.0);
        assert_eq!(rolloff_exponent(4).unwrap(), 2.0);
        assert_relative_eq!(rolloff_exponent(6).unwrap(), 4.81884167930642, epsilon = 1e-12);
        assert!(rolloff_exponent(1).is_err());
        for l in 3..=8 {
            let a = rolloff_exponent(l).unwrap();
            assert_relative_eq!((PI / l as f64).cos().powf(a), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn gain_values() {
        assert_eq!(gain(&iso(4), 0.0), 2.0);
        assert_eq!(gain(&dir(4), 0.0), 6.0);
        assert_eq!(gain(&iso(4), 2.0), 0.0);
        assert_eq!(gain(&dir(3), -2.0), 0.0);
        assert_eq!(gain(&iso(2), PI / 2.0), 0.0);
        for l in 3..=6 {
            let p = dir(l);
            assert_relative_eq!(gain(&p, PI / l as f64) / gain(&p, 0.0), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn directive_two_sectors_is_isotropic() {
        for k in 0..720 {
            let t = k as f64 * PI / 360.0;
            assert_eq!(gain(&dir(2), t), gain(&iso(2), t));
        }
    }

    #[test]
    fn amplitude_values() {
        let p = dir(4);
        assert_relative_eq!(amplitude(&p, p.phi(1), 1), 6f64.sqrt());
        assert_relative_eq!(amplitude(&iso(4), p.phi(2) + 0.3, 2), 2f64.sqrt());
        let p3 = dir(3);
        assert_relative_eq!(amplitude(&p3, p3.phi(0) + PI / 3.0, 0), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn derivative_closed_forms() {
        assert_eq!(amplitude_derivative(&iso(4), 0.3, 0).unwrap(), 0.0);
        let p = dir(4);
        for k in 0..50 {
            let t = -1.5 + 3.0 * k as f64 / 49.0;
            let d = amplitude_derivative(&p, p.phi(0) + t, 0).unwrap();
            assert_relative_eq!(d, -6f64.sqrt() * t.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_finite_difference_l3() {
        let p = dir(3);
        let theta = p.phi(1) + PI / 4.0;
        let h = 1e-7;
        let fd = (amplitude(&p, theta + h, 1) - amplitude(&p, theta - h, 1)) / (2.0 * h);
        let d = amplitude_derivative(&p, theta, 1).unwrap();
        assert!(((fd - d) / d).abs() < 1e-6);
    }

    #[test]
    fn guard_band() {
        let p = dir(3);
        let edge = p.phi(0) + PI / 2.0;
        assert!(matches!(
            amplitude_derivative(&p, edge - 1e-7, 0),
            Err(Error::BoundarySingularity { .. })
        ));
        assert!(amplitude_derivative(&p, edge - 1e-5, 0).is_ok());
        assert_eq!(amplitude_derivative(&dir(4), dir(4).phi(0) + PI / 2.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn hemisphere_normalization() {
        for l in 2..=6 {
            for p in [iso(l), dir(l)] {
                let total = hemisphere_power(&p, 20_000);
                assert!((total / (4.0 * PI) - 1.0).abs() < 1e-6, "L={l} {p:?} {total}");
            }
        }
    }

    #[test]
    fn edge_distance() {
        let p = iso(4);
        assert!(p.edge_distance(p.phi(0) + PI / 2.0) < 1e-12);
        assert_relative_eq!(p.edge_distance(p.phi(0) + PI / 4.0), PI / 4.0, epsilon = 1e-12);
        let q = iso(3);
        assert_relative_eq!(q.edge_distance(q.phi(0)), PI / 6.0, epsilon = 1e-12);
    }
}
