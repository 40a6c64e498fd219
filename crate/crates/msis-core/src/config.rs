//! Scenario parameters and unit conversions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Element gain pattern shared by the surface elements and the sensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    /// Constant gain over the front half-space.
    Isotropic,
    /// Cosine-power rolloff with the half-power beamwidth matched to the sector.
    Directive,
}

impl Pattern {
    /// Lower-case name used in files and tables.
    pub fn name(self) -> &'static str {
        match self {
            Pattern::Isotropic => "isotropic",
            Pattern::Directive => "directive",
        }
    }
}

/// All parameters of one sensing scenario. Powers are in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of sectors `L`.
    pub sectors: usize,
    /// Surface elements per sector `M_I`.
    pub elements_per_sector: usize,
    /// Receive sensors per sector `M_S`.
    pub sensors_per_sector: usize,
    /// Snapshot count `Q`, a positive multiple of `M_I`.
    pub snapshots: usize,
    pub pattern: Pattern,
    /// Transmit power per snapshot, W.
    pub p_tr: f64,
    /// Noise power per complex sample, W.
    pub sigma2: f64,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Target range, m.
    pub rho: f64,
    /// Complex scattering coefficient of the target.
    pub alpha_t: Complex64,
    /// Controller to first-sector distance, m. Kept as metadata.
    pub d_ci: f64,
    /// Incidence angle of the controller on the surface, rad.
    pub zeta_src: f64,
}

impl SystemConfig {
    /// Symmetric architecture with `m` elements and `m` sensors per sector,
    /// `Q = N_I`, and the default physical parameters of [`Default`].
    pub fn symmetric(sectors: usize, m: usize, pattern: Pattern) -> Self {
        Self {
            sectors,
            elements_per_sector: m,
            sensors_per_sector: m,
            snapshots: sectors * m,
            pattern,
            ..Self::default()
        }
    }

    /// Symmetric architecture with `n` total elements split evenly over the sectors.
    pub fn with_total_elements(sectors: usize, n: usize, pattern: Pattern) -> Result<Self> {
        if sectors == 0 || !n.is_multiple_of(sectors) {
            return Err(Error::InvalidConfig(format!(
                "{n} elements cannot be split evenly over {sectors} sectors"
            )));
        }
        Ok(Self::symmetric(sectors, n / sectors, pattern))
    }

    /// Sets the transmit power from a dBm value.
    pub fn with_power_dbm(mut self, dbm: f64) -> Self {
        self.p_tr = dbm_to_watts(dbm);
        self
    }

    /// Total surface elements `N_I = L·M_I`.
    pub fn n_i(&self) -> usize {
        self.sectors * self.elements_per_sector
    }

    /// Total sensors `N_S = L·M_S`.
    pub fn n_s(&self) -> usize {
        self.sectors * self.sensors_per_sector
    }

    /// Length of the stacked observation, `Q·N_S`.
    pub fn observation_len(&self) -> usize {
        self.snapshots * self.n_s()
    }

    /// Whether transmit and receive arrays coincide.
    pub fn is_symmetric(&self) -> bool {
        self.elements_per_sector == self.sensors_per_sector
    }

    /// Carrier wavelength in meters.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    /// Checks every invariant of the configuration.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.sectors < 2 {
            return bad(format!("need at least 2 sectors, got {}", self.sectors));
        }
        if self.elements_per_sector == 0 || self.sensors_per_sector == 0 {
            return bad("elements and sensors per sector must be positive".into());
        }
        if self.snapshots == 0 || !self.snapshots.is_multiple_of(self.elements_per_sector) {
            return bad(format!(
                "snapshot count {} must be a positive multiple of M_I = {}",
                self.snapshots, self.elements_per_sector
            ));
        }
        for (name, v) in [
            ("p_tr", self.p_tr),
            ("sigma2", self.sigma2),
            ("f_c", self.f_c),
            ("rho", self.rho),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.alpha_t.re.is_finite() && self.alpha_t.im.is_finite()) {
            return bad("alpha_t must be finite".into());
        }
        if !self.d_ci.is_finite() || self.d_ci < 0.0 {
            return bad(format!("d_ci must be non-negative, got {}", self.d_ci));
        }
        if !self.zeta_src.is_finite() {
            return bad("zeta_src must be finite".into());
        }
        Ok(())
    }
}

impl Default for SystemConfig {
    /// Four sectors of six elements and six sensors, directive pattern,
    /// 45 dBm transmit power, -80 dBm noise, 5.19 GHz, target at 519 m.
    fn default() -> Self {
        Self {
            sectors: 4,
            elements_per_sector: 6,
            sensors_per_sector: 6,
            snapshots: 24,
            pattern: Pattern::Directive,
            p_tr: dbm_to_watts(45.0),
            sigma2: dbm_to_watts(-80.0),
            f_c: 5.19e9,
            rho: 519.0,
            alpha_t: Complex64::new(1.0, 0.0),
            d_ci: 0.5,
            zeta_src: 0.0,
        }
    }
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Amplitude factor of a power ratio given in dB.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(45.0) - 31.622776601683793).abs() < 1e-12);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((watts_to_dbm(dbm_to_watts(-80.0)) + 80.0).abs() < 1e-12);
        assert!((db_to_amplitude(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_is_valid() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.n_i(), 24);
        assert_eq!(cfg.observation_len(), 576);
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = SystemConfig {
            sectors: 1,
            ..SystemConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let cfg = SystemConfig {
            snapshots: 25,
            ..SystemConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SystemConfig {
            sigma2: 0.0,
            ..SystemConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SystemConfig {
            rho: f64::NAN,
            ..SystemConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(SystemConfig::with_total_elements(3, 16, Pattern::Isotropic).is_err());
    }
}
