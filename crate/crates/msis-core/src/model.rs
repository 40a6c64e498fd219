//! Precomputed scenario state shared by all evaluations.

use crate::antenna::PatternSpec;
use crate::config::SystemConfig;
use crate::error::Result;
use crate::geometry::{build_geometry, SectorGeometry};
use crate::waveform::{build_codebook, link_budget, Codebook, LinkBudget};

/// A validated configuration together with its geometry, codebook, pattern
/// and link budget. Immutable once built.
#[derive(Debug, Clone)]
pub struct Model {
    pub cfg: SystemConfig,
    pub geometry: SectorGeometry,
    pub codebook: Codebook,
    pub pattern: PatternSpec,
    pub link: LinkBudget,
}

impl Model {
    pub fn new(cfg: SystemConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            geometry: build_geometry(&cfg)?,
            codebook: build_codebook(&cfg)?,
            pattern: PatternSpec::new(cfg.pattern, cfg.sectors)?,
            link: link_budget(&cfg)?,
            cfg,
        })
    }
}
