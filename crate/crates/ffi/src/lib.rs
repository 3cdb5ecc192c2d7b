//! C ABI over the biphoton library.
//!
//! Conventions: every constructor writes an opaque handle through an out
//! pointer and returns a status code; handles are freed with the matching
//! `_free` function; `biphoton_last_error_message` describes the most
//! recent failure on the calling thread. No call unwinds across the
//! boundary. The header `include/biphoton.h` mirrors this surface
//! (regenerate with cbindgen via `cbindgen.toml` when the tool is
//! available).

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use biphoton::grid::linspace;
use biphoton::hom::{sweep_analytic, sweep_numeric, witness, HomTrace, NumericHom};
use biphoton::modes::{singlet_overlap, schmidt_decompose, HermiteBasis};
use biphoton::spectra::{
    build_jsa, GridSpec, PhasematchModel, PhasematchShape, ProcessModel, PumpModel,
    SuperpositionModel, DEFAULT_GAMMA,
};
use biphoton::units::{AngularFrequency, Delay};
use biphoton::SpectralGrid;

/// Status codes, aligned with the command-line exit classes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum biphoton_status {
    BIPHOTON_OK = 0,
    BIPHOTON_INVALID_ARGUMENT = 1,
    BIPHOTON_CONFIG_ERROR = 2,
    BIPHOTON_NUMERICAL_ERROR = 3,
    BIPHOTON_IO_ERROR = 4,
}

use biphoton_status::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let owned = CString::new(message.into().replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn biphoton_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guard<F: FnOnce() -> biphoton_status>(body: F) -> biphoton_status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            BIPHOTON_NUMERICAL_ERROR
        }
    }
}

/// Opaque process model handle.
pub struct biphoton_model(ProcessModel);
/// Opaque sampled joint-spectrum handle.
pub struct biphoton_grid(SpectralGrid);
/// Opaque coincidence-trace handle.
pub struct biphoton_trace(HomTrace);

/// Create a single-process model. `sinc_shape` nonzero selects the true
/// sinc phasematching, zero the Gaussian approximation.
#[no_mangle]
pub extern "C" fn biphoton_model_new(
    omega_c_rad_per_ps: f64,
    sigma_rad_per_ps: f64,
    length_mm: f64,
    dk_s_ps_per_mm: f64,
    dk_i_ps_per_mm: f64,
    sinc_shape: c_int,
    out: *mut *mut biphoton_model,
) -> biphoton_status {
    guard(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return BIPHOTON_INVALID_ARGUMENT;
        }
        let model = ProcessModel {
            pump: PumpModel {
                omega_c: AngularFrequency::from_rad_per_ps(omega_c_rad_per_ps),
                sigma: sigma_rad_per_ps,
            },
            phasematch: PhasematchModel {
                length_mm,
                dk_s: dk_s_ps_per_mm,
                dk_i: dk_i_ps_per_mm,
                gamma: DEFAULT_GAMMA,
                shape: if sinc_shape != 0 {
                    PhasematchShape::Sinc
                } else {
                    PhasematchShape::GaussianApprox
                },
            },
            superposition: None,
        };
        if let Err(e) = model.validate() {
            set_error(e.to_string());
            return BIPHOTON_CONFIG_ERROR;
        }
        unsafe { *out = Box::into_raw(Box::new(biphoton_model(model))) };
        BIPHOTON_OK
    })
}

/// Attach the displaced-process superposition F = f⁺ + r·e^{iφ}·f⁻.
#[no_mangle]
pub extern "C" fn biphoton_model_set_superposition(
    model: *mut biphoton_model,
    delta_omega_rad_per_ps: f64,
    r: f64,
    phi_rad: f64,
) -> biphoton_status {
    guard(|| {
        let Some(model) = (unsafe { model.as_mut() }) else {
            set_error("model handle is null");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        let sp = SuperpositionModel { delta_omega: delta_omega_rad_per_ps, r, phi: phi_rad };
        if let Err(e) = sp.validate() {
            set_error(e.to_string());
            return BIPHOTON_CONFIG_ERROR;
        }
        model.0.superposition = Some(sp);
        BIPHOTON_OK
    })
}

#[no_mangle]
pub extern "C" fn biphoton_model_free(model: *mut biphoton_model) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Sample the normalized joint spectrum. Pass `samples = 0` or
/// `half_span_rad_per_ps = 0` to derive either from the model.
#[no_mangle]
pub extern "C" fn biphoton_jsa_build(
    model: *const biphoton_model,
    samples: usize,
    half_span_rad_per_ps: f64,
    out: *mut *mut biphoton_grid,
) -> biphoton_status {
    guard(|| {
        let Some(model) = (unsafe { model.as_ref() }) else {
            set_error("model handle is null");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        if out.is_null() {
            set_error("out pointer is null");
            return BIPHOTON_INVALID_ARGUMENT;
        }
        let spec = GridSpec {
            samples: (samples > 0).then_some(samples),
            half_span: (half_span_rad_per_ps > 0.0).then_some(half_span_rad_per_ps),
            center: None,
        };
        match build_jsa(&model.0, &spec) {
            Ok(grid) => {
                unsafe { *out = Box::into_raw(Box::new(biphoton_grid(grid))) };
                BIPHOTON_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BIPHOTON_NUMERICAL_ERROR
            }
        }
    })
}

#[no_mangle]
pub extern "C" fn biphoton_grid_free(grid: *mut biphoton_grid) {
    if !grid.is_null() {
        drop(unsafe { Box::from_raw(grid) });
    }
}

/// Samples per axis of a built grid; 0 on a null handle.
#[no_mangle]
pub extern "C" fn biphoton_grid_samples(grid: *const biphoton_grid) -> usize {
    unsafe { grid.as_ref() }.map_or(0, |g| g.0.omega_s_axis().len())
}

/// Coincidence probability of the sampled state at one delay.
#[no_mangle]
pub extern "C" fn biphoton_hom_numeric(
    grid: *const biphoton_grid,
    tau_ps: f64,
    out_p: *mut f64,
) -> biphoton_status {
    guard(|| {
        let (Some(grid), false) = (unsafe { grid.as_ref() }, out_p.is_null()) else {
            set_error("null handle or out pointer");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        match NumericHom::new(&grid.0).and_then(|e| e.probability(Delay::from_ps(tau_ps))) {
            Ok(p) => {
                unsafe { *out_p = p };
                BIPHOTON_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BIPHOTON_NUMERICAL_ERROR
            }
        }
    })
}

/// Closed-form coincidence probability of a Gaussian-approximation model.
#[no_mangle]
pub extern "C" fn biphoton_hom_analytic(
    model: *const biphoton_model,
    tau_ps: f64,
    out_p: *mut f64,
) -> biphoton_status {
    guard(|| {
        let (Some(model), false) = (unsafe { model.as_ref() }, out_p.is_null()) else {
            set_error("null handle or out pointer");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        match biphoton::hom::hom_analytic(&model.0, Delay::from_ps(tau_ps)) {
            Ok(p) => {
                unsafe { *out_p = p };
                BIPHOTON_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BIPHOTON_NUMERICAL_ERROR
            }
        }
    })
}

fn delay_axis(start_ps: f64, stop_ps: f64, count: usize) -> Option<Vec<Delay>> {
    if count == 0 || !(stop_ps > start_ps) && count > 1 {
        return None;
    }
    Some(if count == 1 {
        vec![Delay::from_ps(start_ps)]
    } else {
        linspace(start_ps, stop_ps, count).into_iter().map(Delay::from_ps).collect()
    })
}

/// Sweep the numeric engine over a uniform delay axis.
#[no_mangle]
pub extern "C" fn biphoton_sweep_numeric(
    grid: *const biphoton_grid,
    start_ps: f64,
    stop_ps: f64,
    count: usize,
    out: *mut *mut biphoton_trace,
) -> biphoton_status {
    guard(|| {
        let (Some(grid), false) = (unsafe { grid.as_ref() }, out.is_null()) else {
            set_error("null handle or out pointer");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        let Some(delays) = delay_axis(start_ps, stop_ps, count) else {
            set_error("delay axis must be increasing with count >= 1");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        match sweep_numeric(&grid.0, &delays) {
            Ok(trace) => {
                unsafe { *out = Box::into_raw(Box::new(biphoton_trace(trace))) };
                BIPHOTON_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BIPHOTON_NUMERICAL_ERROR
            }
        }
    })
}

/// Sweep the analytic engine over a uniform delay axis.
#[no_mangle]
pub extern "C" fn biphoton_sweep_analytic(
    model: *const biphoton_model,
    start_ps: f64,
    stop_ps: f64,
    count: usize,
    out: *mut *mut biphoton_trace,
) -> biphoton_status {
    guard(|| {
        let (Some(model), false) = (unsafe { model.as_ref() }, out.is_null()) else {
            set_error("null handle or out pointer");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        let Some(delays) = delay_axis(start_ps, stop_ps, count) else {
            set_error("delay axis must be increasing with count >= 1");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        match sweep_analytic(&model.0, &delays) {
            Ok(trace) => {
                unsafe { *out = Box::into_raw(Box::new(biphoton_trace(trace))) };
                BIPHOTON_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BIPHOTON_NUMERICAL_ERROR
            }
        }
    })
}

#[no_mangle]
pub extern "C" fn biphoton_trace_len(trace: *const biphoton_trace) -> usize {
    unsafe { trace.as_ref() }.map_or(0, |t| t.0.len())
}

/// Read one trace sample.
#[no_mangle]
pub extern "C" fn biphoton_trace_get(
    trace: *const biphoton_trace,
    index: usize,
    out_tau_ps: *mut f64,
    out_p: *mut f64,
) -> biphoton_status {
    guard(|| {
        let Some(trace) = (unsafe { trace.as_ref() }) else {
            set_error("trace handle is null");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        if out_tau_ps.is_null() || out_p.is_null() {
            set_error("out pointer is null");
            return BIPHOTON_INVALID_ARGUMENT;
        }
        if index >= trace.0.len() {
            set_error(format!("index {index} out of range ({} samples)", trace.0.len()));
            return BIPHOTON_INVALID_ARGUMENT;
        }
        unsafe {
            *out_tau_ps = trace.0.delays()[index].ps();
            *out_p = trace.0.probabilities()[index];
        }
        BIPHOTON_OK
    })
}

#[no_mangle]
pub extern "C" fn biphoton_trace_free(trace: *mut biphoton_trace) {
    if !trace.is_null() {
        drop(unsafe { Box::from_raw(trace) });
    }
}

/// Apply the p > 1/2 witness. Pass a negative `epsilon` for the default
/// guard band. Writes 1 for Entangled, 0 for Inconclusive.
#[no_mangle]
pub extern "C" fn biphoton_witness(
    trace: *const biphoton_trace,
    epsilon: f64,
    out_entangled: *mut c_int,
) -> biphoton_status {
    guard(|| {
        let (Some(trace), false) = (unsafe { trace.as_ref() }, out_entangled.is_null()) else {
            set_error("null handle or out pointer");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        match witness(&trace.0, (epsilon >= 0.0).then_some(epsilon)) {
            Ok(report) => {
                let flag = matches!(report.verdict, biphoton::Verdict::Entangled);
                unsafe { *out_entangled = flag as c_int };
                BIPHOTON_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BIPHOTON_NUMERICAL_ERROR
            }
        }
    })
}

/// Weight of the antisymmetric two-mode state in the sampled spectrum, in
/// the Hermite basis described by center, scale and max order.
#[no_mangle]
pub extern "C" fn biphoton_singlet_overlap(
    grid: *const biphoton_grid,
    center_rad_per_ps: f64,
    scale_rad_per_ps: f64,
    max_order: usize,
    out_overlap: *mut f64,
) -> biphoton_status {
    guard(|| {
        let (Some(grid), false) = (unsafe { grid.as_ref() }, out_overlap.is_null()) else {
            set_error("null handle or out pointer");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        let basis = match HermiteBasis::new(
            AngularFrequency::from_rad_per_ps(center_rad_per_ps),
            scale_rad_per_ps,
            max_order.max(1),
        ) {
            Ok(b) => b,
            Err(e) => {
                set_error(e.to_string());
                return BIPHOTON_CONFIG_ERROR;
            }
        };
        match singlet_overlap(&grid.0, &basis) {
            Ok(v) => {
                unsafe { *out_overlap = v };
                BIPHOTON_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BIPHOTON_NUMERICAL_ERROR
            }
        }
    })
}

/// Copy up to `capacity` Schmidt values (descending) into `out_values`;
/// the number written lands in `out_written`.
#[no_mangle]
pub extern "C" fn biphoton_schmidt_values(
    grid: *const biphoton_grid,
    out_values: *mut f64,
    capacity: usize,
    out_written: *mut usize,
) -> biphoton_status {
    guard(|| {
        let Some(grid) = (unsafe { grid.as_ref() }) else {
            set_error("grid handle is null");
            return BIPHOTON_INVALID_ARGUMENT;
        };
        if out_values.is_null() || out_written.is_null() {
            set_error("out pointer is null");
            return BIPHOTON_INVALID_ARGUMENT;
        }
        let dec = schmidt_decompose(&grid.0);
        let n = dec.schmidt_values.len().min(capacity);
        unsafe {
            std::ptr::copy_nonoverlapping(dec.schmidt_values.as_ptr(), out_values, n);
            *out_written = n;
        }
        BIPHOTON_OK
    })
}
