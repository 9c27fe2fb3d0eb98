//! C ABI over `spinor_qcrb`.
//!
//! Every entry point returns an [`SqStatus`]. On failure a message is kept
//! per thread and can be read with [`sq_last_error_message`]. Objects cross
//! the boundary as opaque handles that the caller releases with the matching
//! `_free` function. Enumerations are passed as plain `uint32_t` values from
//! the `SQ_*` constants so that out-of-range input is an error, not undefined
//! behaviour.
//!
//! The header `include/spinor_qcrb.h` is generated by cbindgen at build time.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spinor_qcrb::fock3::{optimal_prepared_state, pair_qcrb, PairState, PreparationMethod};
use spinor_qcrb::optimize::{optimize_sum_variance, Ensemble, OptimizationResult, StateFamily};
use spinor_qcrb::qfim::{qcrb_simultaneous, PrecisionBound};
use spinor_qcrb::readout::{
    expectation_and_std, fft_estimate, final_state, signal_sweep, Observable, SpectrumOptions, TimeGrid,
};
use spinor_qcrb::spin::{coherent_state, uniform_state, SpinConfig};
use spinor_qcrb::{Error, C64};

pub const SQ_ENSEMBLE_PRODUCT: u32 = 0;
pub const SQ_ENSEMBLE_GHZ: u32 = 1;

pub const SQ_FAMILY_GENERAL: u32 = 0;
pub const SQ_FAMILY_THREE_AMPLITUDE: u32 = 1;
pub const SQ_FAMILY_COHERENT_THETA: u32 = 2;

pub const SQ_METHOD_SMD: u32 = 0;
pub const SQ_METHOD_QPT: u32 = 1;

/// Bits of `SqEstimate::flags`.
pub const SQ_FLAG_INCONSISTENT: u32 = 1;
pub const SQ_FLAG_DEGENERATE: u32 = 2;
pub const SQ_FLAG_OUT_OF_REGIME: u32 = 4;
pub const SQ_FLAG_NYQUIST: u32 = 8;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Validation = 4,
    Numerical = 5,
    Resource = 6,
    /// The optimizer stopped at its iteration cap. The output handle is
    /// still set and holds the best point found.
    NotConverged = 7,
    Estimation = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SqBound {
    pub delta_p: f64,
    pub delta_q: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SqEstimate {
    pub p_hat: f64,
    pub q_hat: f64,
    /// Angular-frequency bin width.
    pub resolution: f64,
    /// `SQ_FLAG_*` bits.
    pub flags: u32,
}

/// Result of a state optimization.
pub struct SqOptimization {
    inner: OptimizationResult,
}

/// Prepared pair-basis state with its control value and bound.
pub struct SqPairState {
    state: PairState,
    control: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) => SqStatus::Domain,
            Error::Validation(_) => SqStatus::Validation,
            Error::Numerical(_) => SqStatus::Numerical,
            Error::Resource(_) => SqStatus::Resource,
            Error::NotConverged { .. } => SqStatus::NotConverged,
            Error::Estimation { .. } => SqStatus::Estimation,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: SqStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn run(f: impl FnOnce() -> Result<SqStatus, Failure>) -> SqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SqStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut()
        .ok_or_else(|| fail(SqStatus::NullPointer, format!("{name} is null")))
}

unsafe fn handle_ref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    ptr.as_ref()
        .ok_or_else(|| fail(SqStatus::NullPointer, format!("{name} is null")))
}

fn ensemble(v: u32) -> Result<Ensemble, Failure> {
    match v {
        SQ_ENSEMBLE_PRODUCT => Ok(Ensemble::Product),
        SQ_ENSEMBLE_GHZ => Ok(Ensemble::Ghz),
        _ => Err(fail(SqStatus::InvalidArgument, format!("unknown ensemble {v}"))),
    }
}

fn family(v: u32) -> Result<StateFamily, Failure> {
    match v {
        SQ_FAMILY_GENERAL => Ok(StateFamily::General),
        SQ_FAMILY_THREE_AMPLITUDE => Ok(StateFamily::ThreeAmplitude),
        SQ_FAMILY_COHERENT_THETA => Ok(StateFamily::CoherentTheta),
        _ => Err(fail(SqStatus::InvalidArgument, format!("unknown state family {v}"))),
    }
}

fn method(v: u32) -> Result<PreparationMethod, Failure> {
    match v {
        SQ_METHOD_SMD => Ok(PreparationMethod::Smd),
        SQ_METHOD_QPT => Ok(PreparationMethod::Qpt),
        _ => Err(fail(
            SqStatus::InvalidArgument,
            format!("unknown preparation method {v}"),
        )),
    }
}

fn bound(b: &PrecisionBound) -> SqBound {
    SqBound {
        delta_p: b.delta_p,
        delta_q: b.delta_q,
    }
}

/// Copies `src` into a caller buffer of `capacity` elements. `written`
/// always receives the required length.
unsafe fn copy_out(src: &[f64], dst: *mut f64, capacity: usize, written: *mut usize) -> Result<SqStatus, Failure> {
    *out_ref(written, "written")? = src.len();
    if dst.is_null() {
        return Ok(SqStatus::Ok);
    }
    if capacity < src.len() {
        return Err(fail(
            SqStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", src.len()),
        ));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(SqStatus::Ok)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sq_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Joint bounds of the uniform single-atom state (`T = 1`, one trial).
#[no_mangle]
pub unsafe extern "C" fn sq_uniform_bound(spin: u32, atoms: u32, ensemble_kind: u32, out: *mut SqBound) -> SqStatus {
    run(|| {
        let out = out_ref(out, "out")?;
        let config = SpinConfig::new(spin, atoms)?;
        let q = ensemble(ensemble_kind)?.qfim(&uniform_state(spin)?, &config);
        *out = bound(&qcrb_simultaneous(&q, 1)?);
        Ok(SqStatus::Ok)
    })
}

/// Joint bounds of the spin-coherent state at polar angle `theta`
/// (`phi = 0`, `T = 1`, one trial).
#[no_mangle]
pub unsafe extern "C" fn sq_coherent_bound(
    spin: u32,
    atoms: u32,
    ensemble_kind: u32,
    theta: f64,
    out: *mut SqBound,
) -> SqStatus {
    run(|| {
        let out = out_ref(out, "out")?;
        let config = SpinConfig::new(spin, atoms)?;
        let q = ensemble(ensemble_kind)?.qfim(&coherent_state(spin, theta, 0.0)?, &config);
        *out = bound(&qcrb_simultaneous(&q, 1)?);
        Ok(SqStatus::Ok)
    })
}

/// Minimizes `Delta^2 p + Delta^2 q` over `family`. On `Ok` or
/// `NotConverged` `*out` receives a handle to free with
/// `sq_optimization_free`.
#[no_mangle]
pub unsafe extern "C" fn sq_optimize(
    spin: u32,
    atoms: u32,
    ensemble_kind: u32,
    family_kind: u32,
    out: *mut *mut SqOptimization,
) -> SqStatus {
    run(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let (e, f) = (ensemble(ensemble_kind)?, family(family_kind)?);
        match optimize_sum_variance(spin, atoms, e, f) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SqOptimization { inner }));
                Ok(SqStatus::Ok)
            }
            Err(Error::NotConverged { iterations, best }) => {
                set_error(format!("optimizer did not converge after {iterations} iterations"));
                *out = Box::into_raw(Box::new(SqOptimization { inner: *best }));
                Ok(SqStatus::NotConverged)
            }
            Err(e) => Err(e.into()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn sq_optimization_bound(handle: *const SqOptimization, out: *mut SqBound) -> SqStatus {
    run(|| {
        let h = handle_ref(handle, "handle")?;
        *out_ref(out, "out")? = bound(&h.inner.bound);
        Ok(SqStatus::Ok)
    })
}

/// Sublevel populations of the optimal state in ascending `m`. Pass a null
/// `buffer` to query the length through `written`.
#[no_mangle]
pub unsafe extern "C" fn sq_optimization_populations(
    handle: *const SqOptimization,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SqStatus {
    run(|| {
        let h = handle_ref(handle, "handle")?;
        copy_out(&h.inner.best_state.populations(), buffer, capacity, written)
    })
}

#[no_mangle]
pub unsafe extern "C" fn sq_optimization_free(handle: *mut SqOptimization) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Pair-basis state from `len = N/2 + 1` amplitudes `re[k] + i im[k]`.
#[no_mangle]
pub unsafe extern "C" fn sq_pair_state_new(
    atoms: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut SqPairState,
) -> SqStatus {
    run(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        if re.is_null() || im.is_null() {
            return Err(fail(SqStatus::NullPointer, "amplitude arrays are null"));
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let alphas = re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect();
        let state = PairState::new(atoms, alphas)?;
        *out = Box::into_raw(Box::new(SqPairState {
            state,
            control: f64::NAN,
        }));
        Ok(SqStatus::Ok)
    })
}

/// Optimal state of the preparation `method_kind` on its default control grid.
#[no_mangle]
pub unsafe extern "C" fn sq_prepare(atoms: usize, method_kind: u32, out: *mut *mut SqPairState) -> SqStatus {
    run(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let m = method(method_kind)?;
        let r = optimal_prepared_state(m, atoms, &m.default_grid())?;
        *out = Box::into_raw(Box::new(SqPairState {
            state: r.state,
            control: r.control,
        }));
        Ok(SqStatus::Ok)
    })
}

/// Optimal control value (`t` or `epsilon`); NaN for states built with
/// `sq_pair_state_new`.
#[no_mangle]
pub unsafe extern "C" fn sq_pair_state_control(handle: *const SqPairState, out: *mut f64) -> SqStatus {
    run(|| {
        let h = handle_ref(handle, "handle")?;
        *out_ref(out, "out")? = h.control;
        Ok(SqStatus::Ok)
    })
}

#[no_mangle]
pub unsafe extern "C" fn sq_pair_state_bound(handle: *const SqPairState, out: *mut SqBound) -> SqStatus {
    run(|| {
        let h = handle_ref(handle, "handle")?;
        *out_ref(out, "out")? = bound(&pair_qcrb(&h.state));
        Ok(SqStatus::Ok)
    })
}

/// Real and imaginary parts of the pair amplitudes. Pass null buffers to
/// query the length.
#[no_mangle]
pub unsafe extern "C" fn sq_pair_state_alphas(
    handle: *const SqPairState,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SqStatus {
    run(|| {
        let h = handle_ref(handle, "handle")?;
        let a = h.state.alphas();
        let (r, i): (Vec<f64>, Vec<f64>) = a.iter().map(|z| (z.re, z.im)).unzip();
        copy_out(&r, re, capacity, written)?;
        copy_out(&i, im, capacity, written)
    })
}

#[no_mangle]
pub unsafe extern "C" fn sq_pair_state_free(handle: *mut SqPairState) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// `<(N1 - N0)^2>` and `<(N-1 - N0)^2>` after the full interferometer.
#[no_mangle]
pub unsafe extern "C" fn sq_signal(
    handle: *const SqPairState,
    p: f64,
    q: f64,
    t: f64,
    sq_p0: *mut f64,
    sq_m0: *mut f64,
) -> SqStatus {
    run(|| {
        let h = handle_ref(handle, "handle")?;
        let (a, b) = (out_ref(sq_p0, "sq_p0")?, out_ref(sq_m0, "sq_m0")?);
        let f = final_state(&h.state, p, q, t)?;
        *a = expectation_and_std(&f, Observable::SqP0).0;
        *b = expectation_and_std(&f, Observable::SqM0).0;
        Ok(SqStatus::Ok)
    })
}

/// Samples both signals from `t = 0` and recovers `p` and `q` from their
/// spectra. A `step <= 0` selects the default `pi / (8 |p|)`.
#[no_mangle]
pub unsafe extern "C" fn sq_estimate(
    handle: *const SqPairState,
    p: f64,
    q: f64,
    step: f64,
    samples: usize,
    hann: bool,
    out: *mut SqEstimate,
) -> SqStatus {
    run(|| {
        let h = handle_ref(handle, "handle")?;
        let out = out_ref(out, "out")?;
        let step = if step > 0.0 {
            step
        } else {
            TimeGrid::default_for(p)?.step
        };
        let grid = TimeGrid::new(0.0, step, samples)?;
        let est = fft_estimate(&signal_sweep(&h.state, p, q, &grid, p)?, SpectrumOptions { hann })?;
        let f = est.flags;
        *out = SqEstimate {
            p_hat: est.p_hat,
            q_hat: est.q_hat,
            resolution: est.resolution,
            flags: [
                (f.inconsistent, SQ_FLAG_INCONSISTENT),
                (f.degenerate, SQ_FLAG_DEGENERATE),
                (f.out_of_regime, SQ_FLAG_OUT_OF_REGIME),
                (f.nyquist_violation, SQ_FLAG_NYQUIST),
            ]
            .iter()
            .filter(|(set, _)| *set)
            .fold(0, |acc, (_, bit)| acc | bit),
        };
        Ok(SqStatus::Ok)
    })
}
