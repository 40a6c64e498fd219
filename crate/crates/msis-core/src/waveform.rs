//! Controller-to-surface channel, per-sector phase-shift matrices, the
//! periodic DFT probing codebook, and the round-trip link budget.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::Result;
use crate::geometry::local_axis_positions;

/// DFT codeword `f_q[m] = exp(-j 2π m (q mod M) / M)`.
pub fn dft_codeword(q: usize, m_i: usize) -> Vec<Complex64> {
    let k = q % m_i;
    (0..m_i)
        .map(|m| Complex64::from_polar(1.0, -2.0 * PI * ((m * k) % m_i) as f64 / m_i as f64))
        .collect()
}

/// Channel from the co-located source to the elements of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceChannel {
    /// Channel vector `α_g a_g`.
    pub g: Vec<Complex64>,
    /// Path gain, normalized to `sqrt(1/M_I)`.
    pub alpha_g: Complex64,
    /// Unit-modulus steering vector toward the source.
    pub a_g: Vec<Complex64>,
}

impl SourceChannel {
    /// Source seen at incidence angle `zeta_src` by an `m_i`-element face.
    pub fn new(m_i: usize, zeta_src: f64) -> Result<Self> {
        let a_g: Vec<Complex64> = local_axis_positions(m_i)?
            .into_iter()
            .map(|y| Complex64::from_polar(1.0, PI * y * zeta_src.sin()))
            .collect();
        let alpha_g = Complex64::new((1.0 / m_i as f64).sqrt(), 0.0);
        let g = a_g.iter().map(|a| alpha_g * a).collect();
        Ok(Self { g, alpha_g, a_g })
    }
}

/// Diagonals of the phase-shift matrices `sqrt(1/L) diag(f_q) diag(a_g*)`
/// applied by each sector during snapshot `q`.
pub fn phase_shift_matrices(q: usize, src: &SourceChannel, sectors: usize) -> Vec<Vec<Complex64>> {
    let m_i = src.a_g.len();
    let scale = (1.0 / sectors as f64).sqrt();
    let f = dft_codeword(q, m_i);
    let diag: Vec<Complex64> = f.iter().zip(&src.a_g).map(|(f, a)| scale * f * a.conj()).collect();
    vec![diag; sectors]
}

/// Probing signals over all snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    /// Stacked signal `X`, `N_I × Q`; row `s·M_I + m` is element `m` of sector `s`.
    pub x: DMatrix<Complex64>,
    /// Gram form `X* Xᵀ`, `N_I × N_I`.
    pub gram: DMatrix<Complex64>,
    pub sectors: usize,
    pub elements_per_sector: usize,
}

impl Codebook {
    /// Rows of `X` belonging to one sector, `M_I × Q`.
    pub fn sector_block(&self, sector: usize) -> DMatrix<Complex64> {
        let m = self.elements_per_sector;
        self.x.rows(sector * m, m).into_owned()
    }

    /// Snapshot count `Q`.
    pub fn snapshots(&self) -> usize {
        self.x.ncols()
    }
}

/// Builds the codebook by applying each snapshot's phase-shift matrices to
/// the source channel, scaled by `sqrt(P_tr)`.
pub fn build_codebook(cfg: &SystemConfig) -> Result<Codebook> {
    cfg.validate()?;
    let l = cfg.sectors;
    let m_i = cfg.elements_per_sector;
    let src = SourceChannel::new(m_i, cfg.zeta_src)?;
    let amp = cfg.p_tr.sqrt();
    let mut x = DMatrix::zeros(cfg.n_i(), cfg.snapshots);
    for q in 0..cfg.snapshots {
        for (s, diag) in phase_shift_matrices(q, &src, l).iter().enumerate() {
            for m in 0..m_i {
                x[(s * m_i + m, q)] = amp * diag[m] * src.g[m];
            }
        }
    }
    let gram = x.conjugate() * x.transpose();
    Ok(Codebook {
        x,
        gram,
        sectors: l,
        elements_per_sector: m_i,
    })
}

/// Round-trip propagation constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Carrier wavelength, m.
    pub wavelength: f64,
    /// Complex round-trip gain `sqrt(64 λ² / (π³ ρ⁴)) α_T`.
    pub alpha: Complex64,
    /// Noise power per complex sample, W.
    pub sigma2: f64,
}

/// Computes the link budget of a configuration.
pub fn link_budget(cfg: &SystemConfig) -> Result<LinkBudget> {
    cfg.validate()?;
    let lambda = cfg.wavelength();
    let loss = (64.0 * lambda * lambda / (PI.powi(3) * cfg.rho.powi(4))).sqrt();
    Ok(LinkBudget {
        wavelength: lambda,
        alpha: loss * cfg.alpha_t,
        sigma2: cfg.sigma2,
    })
}
