//! C ABI over `msis-core`.
//!
//! Models are opaque handles created by [`msis_model_new`] and released by
//! [`msis_model_free`]. Every fallible call returns an [`MsisStatus`]; on
//! failure the message is kept per thread and read with
//! [`msis_last_error_message`]. Powers cross the boundary in dBm, angles in
//! radians, complex samples as interleaved [`MsisComplex`] pairs.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use msis_core::bounds::{self, GammaMode};
use msis_core::config::{dbm_to_watts, Pattern, SystemConfig};
use msis_core::estimator::Estimator;
use msis_core::geometry::Role;
use msis_core::{montecarlo, Error, Model};
use num_complex::Complex64;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Domain = 3,
    BoundarySingularity = 4,
    DegeneratePosition = 5,
    DimensionMismatch = 6,
    EstimationFailed = 7,
    AsymmetricArchitecture = 8,
    Panic = 9,
}

/// Element radiation pattern.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsisPattern {
    Isotropic = 0,
    Directive = 1,
}

/// System parameters. Fill with [`msis_config_default`] and override fields.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MsisConfig {
    pub sectors: usize,
    pub elements_per_sector: usize,
    pub sensors_per_sector: usize,
    pub snapshots: usize,
    pub pattern: MsisPattern,
    pub p_tr_dbm: f64,
    pub sigma2_dbm: f64,
    pub f_c_hz: f64,
    pub rho_m: f64,
    pub alpha_t_re: f64,
    pub alpha_t_im: f64,
    pub d_ci_m: f64,
    pub zeta_src_rad: f64,
}

/// Complex sample.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MsisComplex {
    pub re: f64,
    pub im: f64,
}

/// Result of [`msis_estimate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MsisEstimate {
    pub theta_hat_rad: f64,
    pub alpha_hat: MsisComplex,
    pub metric: f64,
}

/// Opaque model handle.
pub struct MsisModel {
    inner: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MsisStatus {
    match e {
        Error::Domain(_) => MsisStatus::Domain,
        Error::InvalidConfig(_) => MsisStatus::InvalidConfig,
        Error::BoundarySingularity { .. } => MsisStatus::BoundarySingularity,
        Error::DegeneratePosition { .. } => MsisStatus::DegeneratePosition,
        Error::DimensionMismatch { .. } => MsisStatus::DimensionMismatch,
        Error::EstimationFailed(_) => MsisStatus::EstimationFailed,
        Error::AsymmetricArchitecture { .. } => MsisStatus::AsymmetricArchitecture,
    }
}

/// Runs `f`, converting errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), Error>>(f: F) -> MsisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MsisStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            MsisStatus::Panic
        }
    }
}

fn null_error(what: &str) -> MsisStatus {
    set_error(format!("null pointer: {what}"));
    MsisStatus::NullPointer
}

impl From<&MsisConfig> for SystemConfig {
    fn from(c: &MsisConfig) -> Self {
        SystemConfig {
            sectors: c.sectors,
            elements_per_sector: c.elements_per_sector,
            sensors_per_sector: c.sensors_per_sector,
            snapshots: c.snapshots,
            pattern: match c.pattern {
                MsisPattern::Isotropic => Pattern::Isotropic,
                MsisPattern::Directive => Pattern::Directive,
            },
            p_tr: dbm_to_watts(c.p_tr_dbm),
            sigma2: dbm_to_watts(c.sigma2_dbm),
            f_c: c.f_c_hz,
            rho: c.rho_m,
            alpha_t: Complex64::new(c.alpha_t_re, c.alpha_t_im),
            d_ci: c.d_ci_m,
            zeta_src: c.zeta_src_rad,
        }
    }
}

/// Writes the default configuration: 4 directive sectors of 6 elements,
/// 24 snapshots, 45 dBm transmit power and -80 dBm noise.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_config_default(out: *mut MsisConfig) -> MsisStatus {
    if out.is_null() {
        return null_error("out");
    }
    *out = MsisConfig {
        sectors: 4,
        elements_per_sector: 6,
        sensors_per_sector: 6,
        snapshots: 24,
        pattern: MsisPattern::Directive,
        p_tr_dbm: 45.0,
        sigma2_dbm: -80.0,
        f_c_hz: 5.19e9,
        rho_m: 519.0,
        alpha_t_re: 1.0,
        alpha_t_im: 0.0,
        d_ci_m: 0.5,
        zeta_src_rad: 0.0,
    };
    MsisStatus::Ok
}

/// Builds a model. On success `*out` owns a handle for [`msis_model_free`].
///
/// # Safety
/// `config` must be null or point to a valid config; `out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_model_new(config: *const MsisConfig, out: *mut *mut MsisModel) -> MsisStatus {
    if config.is_null() {
        return null_error("config");
    }
    if out.is_null() {
        return null_error("out");
    }
    *out = ptr::null_mut();
    let cfg = SystemConfig::from(&*config);
    guard(|| {
        let model = Model::new(cfg)?;
        *out = Box::into_raw(Box::new(MsisModel { inner: model }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`msis_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn msis_model_free(model: *mut MsisModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of complex samples in one observation.
///
/// # Safety
/// `model` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_observation_len(model: *const MsisModel, out: *mut usize) -> MsisStatus {
    if model.is_null() {
        return null_error("model");
    }
    if out.is_null() {
        return null_error("out");
    }
    *out = (*model).inner.cfg.observation_len();
    MsisStatus::Ok
}

unsafe fn scalar<F: FnOnce(&Model) -> Result<f64, Error>>(model: *const MsisModel, out: *mut f64, f: F) -> MsisStatus {
    if model.is_null() {
        return null_error("model");
    }
    if out.is_null() {
        return null_error("out");
    }
    let m = &(*model).inner;
    guard(|| {
        *out = f(m)?;
        Ok(())
    })
}

/// Exact angle bound at `theta_rad`, rad². Infinite where the angle is unobservable.
///
/// # Safety
/// `model` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_crb_exact(model: *const MsisModel, theta_rad: f64, out: *mut f64) -> MsisStatus {
    scalar(model, out, |m| bounds::crb_exact(theta_rad, m))
}

/// Large-array approximation of the angle bound, rad². Needs a symmetric architecture.
///
/// # Safety
/// `model` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_crb_approx(model: *const MsisModel, theta_rad: f64, out: *mut f64) -> MsisStatus {
    scalar(model, out, |m| bounds::crb_approx(theta_rad, m, GammaMode::Computed))
}

/// Correction factor of the large-array bound, in `(0, 1]`.
///
/// # Safety
/// `model` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_gamma(model: *const MsisModel, theta_rad: f64, out: *mut f64) -> MsisStatus {
    scalar(model, out, |m| bounds::gamma(theta_rad, &m.cfg, Role::Sensor))
}

/// Probing power reaching the target direction.
///
/// # Safety
/// `model` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_probing_power(model: *const MsisModel, theta_rad: f64, out: *mut f64) -> MsisStatus {
    scalar(model, out, |m| bounds::probing_power_def(theta_rad, m))
}

/// Squared angle rate of the response.
///
/// # Safety
/// `model` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_angle_rate(model: *const MsisModel, theta_rad: f64, out: *mut f64) -> MsisStatus {
    scalar(model, out, |m| bounds::angle_rate_def(theta_rad, m))
}

/// Draws one noisy observation into `out[0..len]`. `len` must equal
/// [`msis_observation_len`]. The same seed always gives the same samples.
///
/// # Safety
/// `model` must be null or a live handle; `out` null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn msis_observe(
    model: *const MsisModel,
    theta_rad: f64,
    seed: u64,
    out: *mut MsisComplex,
    len: usize,
) -> MsisStatus {
    if model.is_null() {
        return null_error("model");
    }
    if out.is_null() {
        return null_error("out");
    }
    let m = &(*model).inner;
    guard(|| {
        let expected = m.cfg.observation_len();
        if len != expected {
            return Err(Error::DimensionMismatch { expected, actual: len });
        }
        let y = montecarlo::observe(theta_rad, m, seed)?;
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, z) in dst.iter_mut().zip(y) {
            *d = MsisComplex { re: z.re, im: z.im };
        }
        Ok(())
    })
}

/// Maximum-likelihood estimate of azimuth and path gain from `y[0..len]`
/// using a uniform search grid of `grid_points` nodes and refinement.
///
/// # Safety
/// `model` must be null or a live handle; `y` null or valid for `len`
/// reads; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn msis_estimate(
    model: *const MsisModel,
    y: *const MsisComplex,
    len: usize,
    grid_points: usize,
    out: *mut MsisEstimate,
) -> MsisStatus {
    if model.is_null() {
        return null_error("model");
    }
    if y.is_null() {
        return null_error("y");
    }
    if out.is_null() {
        return null_error("out");
    }
    let m = &(*model).inner;
    let samples: Vec<Complex64> = std::slice::from_raw_parts(y, len)
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    guard(|| {
        let e = Estimator::new(m, grid_points, true)?.estimate(&samples)?;
        *out = MsisEstimate {
            theta_hat_rad: e.theta_hat,
            alpha_hat: MsisComplex {
                re: e.alpha_hat.re,
                im: e.alpha_hat.im,
            },
            metric: e.metric_value,
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` with a
/// terminating NUL, truncating to `cap` bytes. Returns the full message
/// length without the NUL, or 0 if no error was recorded.
///
/// # Safety
/// `buf` must be null or valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn msis_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}
