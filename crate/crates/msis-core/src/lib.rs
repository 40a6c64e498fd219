//! Signal model, Cramér-Rao bounds and maximum-likelihood angle estimation for
//! a multi-sector intelligent surface that senses a single far-field target.
//!
//! The surface is an `L`-faced prism. Each face carries `M_I` passive elements
//! fed by a co-located source and `M_S` receive sensors. A periodic DFT
//! codebook probes the scene, and the stacked echo is used to estimate the
//! target azimuth and its complex path gain.
//!
//! Module layout follows the processing chain:
//! [`geometry`] → [`antenna`] → [`waveform`] → [`manifold`] → [`bounds`] /
//! [`estimator`] → [`montecarlo`], with [`scenario`] providing the file-based
//! front end used by the `msis` binary.

pub mod antenna;
pub mod bounds;
pub mod config;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod manifold;
pub mod montecarlo;
pub mod scenario;
pub mod waveform;

mod model;

pub use config::{Pattern, SystemConfig};
pub use error::{Error, Result};
pub use model::Model;
