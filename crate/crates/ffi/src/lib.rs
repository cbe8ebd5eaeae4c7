//! C ABI for the gaitsynth planner.
//!
//! Every fallible call returns a [`GsStatus`]; on failure the message is
//! available from [`gs_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gaitsynth::builder::{build_library, BuilderConfig};
use gaitsynth::gait::{BEZIER_ORDER, NUM_OUTPUTS};
use gaitsynth::gaitlib_io::{load_library, save_library};
use gaitsynth::predictor::{capture_point, predict_preimpact, ConstantHeight};
use gaitsynth::{
    bezier, CentroidalState, Desired, Error, GaitLibrary, PhaseState, PredictorGains, Stance, SynthesizerConfig,
};

/// Number of Bézier coefficients in one gait (10 outputs of order 5).
pub const GS_ALPHA_LEN: usize = 60;

const _: () = assert!(GS_ALPHA_LEN == NUM_OUTPUTS * (BEZIER_ORDER + 1));

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    OutOfRange = 5,
    PredictionFailed = 6,
    Unreachable = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStance {
    Right = 0,
    Left = 1,
}

/// Loaded gait library.
pub struct GsLibrary(GaitLibrary);

/// Synthesizer bound to its own copy of a library and a configuration.
pub struct GsSynthesizer {
    lib: GaitLibrary,
    cfg: SynthesizerConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GsLibraryDims {
    pub periods: usize,
    pub vx: usize,
    pub rvy: usize,
    pub lvy: usize,
    pub gaits: usize,
    pub order: usize,
}

/// Synthesizer settings. Regions keep their defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GsSynthConfig {
    pub kx: f64,
    pub ky: f64,
    pub vx_desired: f64,
    pub vy_right_desired: f64,
    pub vy_left_desired: f64,
    pub period_index: usize,
    pub support_halfwidth: [f64; 2],
    pub max_modification: f64,
    pub kp: f64,
    pub kd: f64,
    pub mass: f64,
    pub gravity: f64,
}

/// CoM state relative to the stance foot.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GsState {
    pub z: f64,
    pub zdot: f64,
    pub p: [f64; 2],
    pub v: [f64; 2],
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GsPhase {
    pub t0: f64,
    pub s0: f64,
    pub period: f64,
    pub stance: GsStance,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GsSynthesis {
    /// Row-major, one row of `order + 1` coefficients per output.
    pub alpha: [f64; GS_ALPHA_LEN],
    pub period: f64,
    pub period_index: usize,
    pub step_duration: f64,
    pub predicted: GsState,
    pub has_prediction: bool,
    pub saturated: bool,
    pub truncated: bool,
    pub fall: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::Io { .. } => GsStatus::Io,
        Error::Parse { .. } => GsStatus::Parse,
        Error::OutOfRange { .. } | Error::PeriodIndex { .. } | Error::PhaseDomain(_) => GsStatus::OutOfRange,
        Error::PredictionFailed(_) | Error::Singularity(_) => GsStatus::PredictionFailed,
        Error::Unreachable { .. } => GsStatus::Unreachable,
        Error::InvalidArgument(_) | Error::EmptyLibrary | Error::NoTimeScale | Error::InvalidBound { .. } => {
            GsStatus::InvalidArgument
        }
        _ => GsStatus::Internal,
    }
}

/// Runs `f`, recording the message of any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (GsStatus, String)>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GsStatus::Internal
        }
    }
}

fn lift<T>(r: gaitsynth::Result<T>) -> Result<T, (GsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (GsStatus, String) {
    (GsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, (GsStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (GsStatus::InvalidArgument, "path is not valid UTF-8".to_string()))
}

fn to_state(s: &GsState) -> CentroidalState {
    CentroidalState::new(s.z, s.zdot, s.p, s.v)
}

fn from_state(s: &CentroidalState) -> GsState {
    GsState {
        z: s.z,
        zdot: s.zdot,
        p: s.p,
        v: s.v,
    }
}

fn to_config(c: &GsSynthConfig) -> SynthesizerConfig {
    SynthesizerConfig {
        kx: c.kx,
        ky: c.ky,
        desired: Desired::new(c.vx_desired, c.vy_right_desired, c.vy_left_desired, c.period_index),
        support_halfwidth: c.support_halfwidth,
        max_modification: c.max_modification,
        gains: gains_of(c),
        ..SynthesizerConfig::default()
    }
}

fn gains_of(c: &GsSynthConfig) -> PredictorGains {
    PredictorGains {
        kp: c.kp,
        kd: c.kd,
        mass: c.mass,
        gravity: c.gravity,
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_library_load(path: *const c_char, out: *mut *mut GsLibrary) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let lib = lift(load_library(path_arg(path)?))?;
        *out = Box::into_raw(Box::new(GsLibrary(lib)));
        Ok(())
    })
}

/// Builds the default desk-scale library.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_library_build_default(out: *mut *mut GsLibrary) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let lib = lift(build_library(&BuilderConfig::default()))?;
        *out = Box::into_raw(Box::new(GsLibrary(lib)));
        Ok(())
    })
}

/// # Safety
/// `lib` must come from this library and `path` be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gs_library_save(lib: *const GsLibrary, path: *const c_char) -> GsStatus {
    guard(|| {
        let lib = lib.as_ref().ok_or_else(|| null("library"))?;
        lift(save_library(&lib.0, path_arg(path)?))
    })
}

/// # Safety
/// `lib` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_library_free(lib: *mut GsLibrary) {
    if !lib.is_null() {
        drop(Box::from_raw(lib));
    }
}

/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gs_library_dims(lib: *const GsLibrary, out: *mut GsLibraryDims) -> GsStatus {
    guard(|| {
        let lib = &lib.as_ref().ok_or_else(|| null("library"))?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = GsLibraryDims {
            periods: lib.periods().len(),
            vx: lib.vx_grid().len(),
            rvy: lib.rvy_grid().len(),
            lvy: lib.lvy_grid().len(),
            gaits: lib.len(),
            order: lib.order(),
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_synth_config_default(out: *mut GsSynthConfig) -> GsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = SynthesizerConfig::default();
        *out = GsSynthConfig {
            kx: d.kx,
            ky: d.ky,
            vx_desired: d.desired.vx,
            vy_right_desired: d.desired.vy_right,
            vy_left_desired: d.desired.vy_left,
            period_index: d.desired.period_index,
            support_halfwidth: d.support_halfwidth,
            max_modification: d.max_modification,
            kp: d.gains.kp,
            kd: d.gains.kd,
            mass: d.gains.mass,
            gravity: d.gains.gravity,
        };
        Ok(())
    })
}

/// Copies the library; the caller may free `lib` afterwards.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gs_synthesizer_new(
    lib: *const GsLibrary,
    cfg: *const GsSynthConfig,
    out: *mut *mut GsSynthesizer,
) -> GsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let lib = &lib.as_ref().ok_or_else(|| null("library"))?.0;
        let cfg = to_config(cfg.as_ref().ok_or_else(|| null("config"))?);
        lift(cfg.gains.validate())?;
        if lib.order() != BEZIER_ORDER {
            return Err((
                GsStatus::InvalidArgument,
                format!("library order {} is not {BEZIER_ORDER}", lib.order()),
            ));
        }
        lift(lib.period(cfg.desired.period_index))?;
        *out = Box::into_raw(Box::new(GsSynthesizer { lib: lib.clone(), cfg }));
        Ok(())
    })
}

/// # Safety
/// `synth` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_synthesizer_free(synth: *mut GsSynthesizer) {
    if !synth.is_null() {
        drop(Box::from_raw(synth));
    }
}

/// One synthesis call. On failure `out` is left untouched.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gs_synthesize(
    synth: *const GsSynthesizer,
    state: *const GsState,
    phase: *const GsPhase,
    out: *mut GsSynthesis,
) -> GsStatus {
    guard(|| {
        let synth = synth.as_ref().ok_or_else(|| null("synthesizer"))?;
        let state = to_state(state.as_ref().ok_or_else(|| null("state"))?);
        let ph = phase.as_ref().ok_or_else(|| null("phase"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let phase = PhaseState {
            t0: ph.t0,
            s0: ph.s0,
            period: ph.period,
            step: 0,
            stance: match ph.stance {
                GsStance::Right => Stance::Right,
                GsStance::Left => Stance::Left,
            },
        };
        let r = lift(gaitsynth::synthesizer::synthesize(
            &state, &phase, &synth.lib, &synth.cfg,
        ))?;
        let mut alpha = [0.0; GS_ALPHA_LEN];
        alpha.copy_from_slice(r.gait.coefficients());
        *out = GsSynthesis {
            alpha,
            period: r.period,
            period_index: r.period_index,
            step_duration: r.step_duration,
            predicted: r.predicted.as_ref().map(from_state).unwrap_or_default(),
            has_prediction: r.predicted.is_some(),
            saturated: r.saturated,
            truncated: r.truncated,
            fall: r.fall,
        };
        Ok(())
    })
}

/// Evaluates a Bézier polynomial with `n` coefficients at `s` in `[0, 1]`.
///
/// # Safety
/// `coeffs` must point to `n` doubles and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn gs_bezier_eval(coeffs: *const f64, n: usize, s: f64, out: *mut f64) -> GsStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lift(bezier::eval(std::slice::from_raw_parts(coeffs, n), s))?;
        Ok(())
    })
}

/// Integrates the centroidal model from `t0` to `tt` tracking a constant
/// height `z_ref`, using the gains in `cfg`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gs_predict_preimpact(
    cfg: *const GsSynthConfig,
    state: *const GsState,
    t0: f64,
    tt: f64,
    z_ref: f64,
    out: *mut GsState,
) -> GsStatus {
    guard(|| {
        let gains = gains_of(cfg.as_ref().ok_or_else(|| null("config"))?);
        lift(gains.validate())?;
        let state = to_state(state.as_ref().ok_or_else(|| null("state"))?);
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = from_state(&lift(predict_preimpact(
            &state,
            t0,
            tt,
            &ConstantHeight(z_ref),
            &gains,
        ))?);
        Ok(())
    })
}

/// # Safety
/// `p`, `v` and `out` must each point to two doubles.
#[no_mangle]
pub unsafe extern "C" fn gs_capture_point(
    p: *const f64,
    v: *const f64,
    z: f64,
    gravity: f64,
    out: *mut f64,
) -> GsStatus {
    guard(|| {
        if p.is_null() || v.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        if !(z > 0.0) || !(gravity > 0.0) {
            return Err((
                GsStatus::InvalidArgument,
                format!("z = {z} and gravity = {gravity} must be positive"),
            ));
        }
        let cp = capture_point(*(p as *const [f64; 2]), *(v as *const [f64; 2]), z, gravity);
        *(out as *mut [f64; 2]) = cp;
        Ok(())
    })
}
