//! C ABI over `pvinvest`.
//!
//! Models and trajectories are opaque heap handles created and released by
//! the `*_new` / `*_free` pairs. Every fallible call returns a [`PvStatus`];
//! on failure [`pv_last_error_message`] describes the problem. Error messages
//! are kept per thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pvinvest::dynamics::{simulate_base, simulate_storage};
use pvinvest::io::parse_config;
use pvinvest::model::{optimal_investment_base, optimal_investment_storage};
use pvinvest::oracle::calibrate_composite_term;
use pvinvest::{
    validate_parameters, ClosedFormSolution, Error, FormulaVariant, IntegrationConfig, ModelParameters, ParamKey,
    StorageParameters, Trajectory,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameters = 2,
    InvalidArgument = 3,
    InvalidUtf8 = 4,
    Parse = 5,
    Numerical = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PvVariant {
    FocDerived = 0,
    AsPublished = 1,
}

impl From<PvVariant> for FormulaVariant {
    fn from(v: PvVariant) -> Self {
        match v {
            PvVariant::FocDerived => FormulaVariant::FocDerived,
            PvVariant::AsPublished => FormulaVariant::AsPublished,
        }
    }
}

/// Closed-form optimum. `s_star` is NaN for PV-only solutions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvSolution {
    pub i_star: f64,
    pub psi: f64,
    pub e_star: f64,
    pub d_star: f64,
    pub s_star: f64,
    pub has_storage: bool,
    pub clamped: bool,
}

impl From<ClosedFormSolution> for PvSolution {
    fn from(s: ClosedFormSolution) -> Self {
        PvSolution {
            i_star: s.i_star,
            psi: s.psi,
            e_star: s.e_star,
            d_star: s.d_star,
            s_star: s.s_star.unwrap_or(f64::NAN),
            has_storage: s.s_star.is_some(),
            clamped: s.clamped,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvSample {
    pub t: f64,
    pub i: f64,
    pub e: f64,
    pub d: f64,
    pub s: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvSimulation {
    pub dt: f64,
    pub t_end: f64,
    pub e0: f64,
    pub d0: f64,
    pub s0: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvCalibration {
    pub psi: f64,
    pub psi_base: f64,
    pub psi_tax: f64,
    pub residual: f64,
}

/// Model and storage parameters.
pub struct PvModel {
    model: ModelParameters,
    storage: StorageParameters,
}

/// Simulated path.
pub struct PvTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(err: &Error) -> PvStatus {
    match err {
        Error::InvalidParameters(_) => PvStatus::InvalidParameters,
        Error::Scenario { source, .. } => status_of(source),
        Error::Config(_) => PvStatus::Parse,
        Error::NoSteadyState(_)
        | Error::SearchBoundary { .. }
        | Error::Irreconcilable { .. }
        | Error::TooFewSamples(_) => PvStatus::Numerical,
        _ => PvStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> PvStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn guard(f: impl FnOnce() -> PvStatus) -> PvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == PvStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => {
            set_error("internal panic");
            PvStatus::Panic
        }
    }
}

fn null(what: &str) -> PvStatus {
    set_error(format!("{what} is null"));
    PvStatus::NullPointer
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, PvStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        PvStatus::InvalidUtf8
    })
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn pv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New model with the calibrated default parameters. Release with [`pv_model_free`].
#[no_mangle]
pub extern "C" fn pv_model_new_default() -> *mut PvModel {
    Box::into_raw(Box::new(PvModel {
        model: ModelParameters::default(),
        storage: StorageParameters::default(),
    }))
}

/// New model from a JSON run configuration (only the `model` and `storage`
/// sections matter; other sections are still validated).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_model_from_json(json: *const c_char, out: *mut *mut PvModel) -> PvStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let text = match read_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text, "json") {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(PvModel {
                    model: cfg.model,
                    storage: cfg.storage,
                }));
                PvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pv_model_free(model: *mut PvModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Sets one parameter by name (`r`, `c`, `eta`, ..., `c_s`, `eta_s`, `q`,
/// `sigma`). The change is rejected and the model left untouched when the
/// result is invalid.
///
/// # Safety
/// `model` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pv_model_set_param(model: *mut PvModel, name: *const c_char, value: f64) -> PvStatus {
    guard(|| {
        let Some(m) = model.as_mut() else {
            return null("model");
        };
        let key = match read_str(name, "name").map(str::parse::<ParamKey>) {
            Ok(Ok(k)) => k,
            Ok(Err(e)) => return fail(e),
            Err(s) => return s,
        };
        let (mut p, mut sp) = (m.model, m.storage);
        key.set(&mut p, &mut sp, value);
        if let Err(v) = validate_parameters(&p, Some(&sp)) {
            return fail(v.into());
        }
        m.model = p;
        m.storage = sp;
        PvStatus::Ok
    })
}

/// # Safety
/// `model` must be a live handle, `name` a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pv_model_get_param(model: *const PvModel, name: *const c_char, out: *mut f64) -> PvStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return null("model");
        };
        if out.is_null() {
            return null("out");
        }
        match read_str(name, "name").map(str::parse::<ParamKey>) {
            Ok(Ok(k)) => {
                *out = k.get(&m.model, &m.storage);
                PvStatus::Ok
            }
            Ok(Err(e)) => fail(e),
            Err(s) => s,
        }
    })
}

/// PV-only optimum.
///
/// # Safety
/// `model` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pv_solve_base(model: *const PvModel, out: *mut PvSolution) -> PvStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return null("model");
        };
        if out.is_null() {
            return null("out");
        }
        match optimal_investment_base(&m.model) {
            Ok(s) => {
                *out = s.into();
                PvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Optimum with storage under the chosen formula.
///
/// # Safety
/// `model` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pv_solve_storage(model: *const PvModel, variant: PvVariant, out: *mut PvSolution) -> PvStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return null("model");
        };
        if out.is_null() {
            return null("out");
        }
        match optimal_investment_storage(&m.model, &m.storage, variant.into()) {
            Ok(s) => {
                *out = s.into();
                PvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Simulates the optimal constant investment. Release the result with
/// [`pv_trajectory_free`].
///
/// # Safety
/// `model` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pv_simulate(
    model: *const PvModel,
    with_storage: bool,
    variant: PvVariant,
    sim: PvSimulation,
    out: *mut *mut PvTrajectory,
) -> PvStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return null("model");
        };
        if out.is_null() {
            return null("out");
        }
        let cfg = IntegrationConfig {
            dt: sim.dt,
            t_end: sim.t_end,
            e0: sim.e0,
            d0: sim.d0,
            s0: sim.s0,
        };
        let result = if with_storage {
            optimal_investment_storage(&m.model, &m.storage, variant.into())
                .and_then(|s| simulate_storage(&m.model, &m.storage, |_| s.i_star, &cfg))
        } else {
            optimal_investment_base(&m.model).and_then(|s| simulate_base(&m.model, |_| s.i_star, &cfg))
        };
        match result {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(PvTrajectory { inner }));
                PvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pv_trajectory_len(traj: *const PvTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.samples.len())
}

/// # Safety
/// `traj` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pv_trajectory_get(traj: *const PvTrajectory, index: usize, out: *mut PvSample) -> PvStatus {
    guard(|| {
        let Some(t) = traj.as_ref() else {
            return null("trajectory");
        };
        if out.is_null() {
            return null("out");
        }
        let Some(s) = t.inner.samples.get(index) else {
            set_error(format!(
                "index {index} out of range for {} samples",
                t.inner.samples.len()
            ));
            return PvStatus::OutOfRange;
        };
        *out = PvSample {
            t: s.t,
            i: s.i,
            e: s.e,
            d: s.d,
            s: if t.inner.storage { s.s } else { 0.0 },
        };
        PvStatus::Ok
    })
}

/// Discounted welfare of the simulated path.
///
/// # Safety
/// `traj` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pv_trajectory_objective(traj: *const PvTrajectory, out: *mut f64) -> PvStatus {
    guard(|| {
        let Some(t) = traj.as_ref() else {
            return null("trajectory");
        };
        if out.is_null() {
            return null("out");
        }
        *out = t.inner.objective_value;
        PvStatus::Ok
    })
}

/// # Safety
/// `traj` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pv_trajectory_free(traj: *mut PvTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Recovers the composite shadow term from two reported optima that differ
/// only in `(r, c)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pv_calibrate(
    reported_base: f64,
    reported_tax: f64,
    base_r: f64,
    base_c: f64,
    tax_r: f64,
    tax_c: f64,
    eta: f64,
    out: *mut PvCalibration,
) -> PvStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match calibrate_composite_term(reported_base, reported_tax, (base_r, base_c), (tax_r, tax_c), eta) {
            Ok(c) => {
                *out = PvCalibration {
                    psi: c.psi,
                    psi_base: c.psi_base,
                    psi_tax: c.psi_tax,
                    residual: c.residual,
                };
                PvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
