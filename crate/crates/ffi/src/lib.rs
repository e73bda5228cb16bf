//! C ABI over `intrinsic-arrow`.
//!
//! Every fallible function returns an [`IaStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be fetched with [`ia_last_error_message`]. Typical projectors and Langevin
//! experiments are opaque handles released with their `_free` function.
//!
//! The header `include/intrinsic_arrow.h` is generated at build time.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use intrinsic_arrow::classical::{mean_d_joint, shannon_information_change, SimplexDistribution};
use intrinsic_arrow::langevin::{
    forward_reverse_experiment, LangevinExperiment, LangevinParams, Protocol,
};
use intrinsic_arrow::quantum::{
    fidelity_closed_form, projector_traces, typical_projector, Spectrum, TypicalProjectorSpec,
};
use intrinsic_arrow::{Error, TimeArrow};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFinite = 3,
    UndeterminedArrow = 4,
    DegenerateSupport = 5,
    InvalidDistribution = 6,
    InfeasibleEnumeration = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Sample mean with its standard error.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IaEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Langevin model and time grid.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IaLangevinSetup {
    pub lambda: f64,
    pub gamma: f64,
    pub dt: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Arms of a Langevin experiment.
pub const IA_ARM_FORWARD: c_int = 0;
pub const IA_ARM_REVERSE: c_int = 1;

/// Per-path fields of a Langevin experiment.
pub const IA_FIELD_DELTA_I: c_int = 0;
pub const IA_FIELD_D: c_int = 1;
pub const IA_FIELD_XI: c_int = 2;
pub const IA_FIELD_ETA: c_int = 3;

/// Opaque typical-projector handle.
pub struct IaTypicalProjector {
    spec: TypicalProjectorSpec,
    spectrum: Spectrum,
}

/// Opaque Langevin experiment handle.
pub struct IaLangevinExperiment {
    inner: LangevinExperiment,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_last_error(message: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(message.bytes().filter(|&b| b != 0));
    });
}

fn status_of(err: &Error) -> IaStatus {
    match err {
        Error::NonFinite(_) => IaStatus::NonFinite,
        Error::UndeterminedArrow => IaStatus::UndeterminedArrow,
        Error::DegenerateSupport { .. } => IaStatus::DegenerateSupport,
        Error::BelowFloor { .. } | Error::NotFlat | Error::InvalidDensityMatrix(_) => {
            IaStatus::InvalidDistribution
        }
        Error::InfeasibleEnumeration { .. } => IaStatus::InfeasibleEnumeration,
        _ => IaStatus::InvalidArgument,
    }
}

struct Failure(IaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(IaStatus::NullPointer, format!("{name} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(IaStatus::InvalidArgument, message.into())
}

/// Run `f`, record any failure and convert panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IaStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            IaStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(data: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

fn arrow(s: c_int) -> Result<TimeArrow, Failure> {
    match s {
        1 => Ok(TimeArrow::Plus),
        -1 => Ok(TimeArrow::Minus),
        0 => Err(Error::UndeterminedArrow.into()),
        other => Err(invalid(format!("arrow must be +1 or -1, got {other}"))),
    }
}

/// Library version as a NUL-terminated static string.
#[no_mangle]
pub extern "C" fn ia_version() -> *const c_char {
    static VERSION: std::sync::OnceLock<std::ffi::CString> = std::sync::OnceLock::new();
    VERSION
        .get_or_init(|| std::ffi::CString::new(intrinsic_arrow::VERSION).unwrap_or_default())
        .as_ptr()
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one, so a
/// return value larger than `len` signals truncation. `buf` may be null when
/// `len` is 0.
///
/// # Safety
/// `buf` must be valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn ia_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        e.len() + 1
    })
}

/// Static description of a status code; "unknown" for other values.
#[no_mangle]
pub extern "C" fn ia_status_name(status: c_int) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid argument",
        3 => c"non-finite value",
        4 => c"undetermined arrow",
        5 => c"degenerate support",
        6 => c"invalid distribution",
        7 => c"infeasible enumeration",
        8 => c"buffer too small",
        9 => c"panic",
        _ => c"unknown",
    };
    s.as_ptr()
}

// Arrow law

/// `P(s | x) = 1 / (1 + exp(-s x))`, `s` = +1 or -1.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn ia_arrow_probability(x: f64, s: c_int, out: *mut f64) -> IaStatus {
    guard(|| {
        write(
            out,
            intrinsic_arrow::arrow_probability(x, arrow(s)?)?,
            "out",
        )
    })
}

/// `D = ln p_forward - ln p_reversed`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn ia_log_ratio(p_forward: f64, p_reversed: f64, out: *mut f64) -> IaStatus {
    guard(|| {
        write(
            out,
            intrinsic_arrow::log_ratio(p_forward, p_reversed)?.value(),
            "out",
        )
    })
}

/// Posterior of arrow `s` given the two likelihoods.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn ia_bayes_posterior(
    p_forward: f64,
    p_reversed: f64,
    s: c_int,
    out: *mut f64,
) -> IaStatus {
    guard(|| {
        let p = intrinsic_arrow::bayes_posterior(p_forward, p_reversed, arrow(s)?)?;
        write(out, p, "out")
    })
}

/// Mean posterior of the `+` arrow over `n` decision statistics.
///
/// # Safety
/// `d` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_mean_fidelity(
    d: *const f64,
    n: usize,
    out: *mut IaEstimate,
) -> IaStatus {
    guard(|| {
        let stats = slice(d, n, "d")?
            .iter()
            .map(|&x| intrinsic_arrow::DecisionStatistic::raw(x))
            .collect::<Result<Vec<_>, _>>()?;
        let f = intrinsic_arrow::mean_fidelity(&stats)?;
        write(
            out,
            IaEstimate {
                mean: f.mean,
                std_error: f.std_error,
                count: f.sample_count,
            },
            "out",
        )
    })
}

// Classical ensemble

unsafe fn simplex_pair(
    rho1: *const f64,
    rho2: *const f64,
    d: usize,
) -> Result<(SimplexDistribution, SimplexDistribution), Failure> {
    Ok((
        SimplexDistribution::new(slice(rho1, d, "rho1")?.to_vec())?,
        SimplexDistribution::new(slice(rho2, d, "rho2")?.to_vec())?,
    ))
}

/// `ΔI = n [H(ρ2) - H(ρ1)]` for two distributions of length `d`.
///
/// # Safety
/// `rho1` and `rho2` must point to `d` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_shannon_information_change(
    rho1: *const f64,
    rho2: *const f64,
    d: usize,
    n: u64,
    out: *mut f64,
) -> IaStatus {
    guard(|| {
        let (r1, r2) = simplex_pair(rho1, rho2, d)?;
        write(out, shannon_information_change(&r1, &r2, n)?.nats(), "out")
    })
}

/// Closed-form mean of the joint decision statistic.
///
/// # Safety
/// `rho1` and `rho2` must point to `d` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_mean_d_joint(
    rho1: *const f64,
    rho2: *const f64,
    d: usize,
    n: u64,
    out: *mut f64,
) -> IaStatus {
    guard(|| {
        let (r1, r2) = simplex_pair(rho1, rho2, d)?;
        write(out, mean_d_joint(&r1, &r2, n)?, "out")
    })
}

// Quantum ensemble

/// `F = 1 / (1 + exp(-ΔI))` for `ΔI >= 0`.
///
/// # Safety
/// `out` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn ia_fidelity_closed_form(delta_i: f64, out: *mut f64) -> IaStatus {
    guard(|| write(out, fidelity_closed_form(delta_i)?, "out"))
}

/// Build the `delta`-typical projector of `ρ^{⊗n}` from the `d` eigenvalues
/// of `ρ`. Release with [`ia_typical_projector_free`].
///
/// # Safety
/// `eigenvalues` must point to `d` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_typical_projector_new(
    eigenvalues: *const f64,
    d: usize,
    n: u32,
    delta: f64,
    out: *mut *mut IaTypicalProjector,
) -> IaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spectrum = Spectrum::new(slice(eigenvalues, d, "eigenvalues")?.to_vec())?;
        let spec = typical_projector(&spectrum, n, delta)?;
        out.write(Box::into_raw(Box::new(IaTypicalProjector {
            spec,
            spectrum,
        })));
        Ok(())
    })
}

/// `Tr(E1 ρ^{⊗n})` and `Tr(E1 (1/d)^{⊗n})`.
///
/// # Safety
/// `handle` must come from [`ia_typical_projector_new`]; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_typical_projector_traces(
    handle: *const IaTypicalProjector,
    tr_xi: *mut f64,
    tr_eta: *mut f64,
) -> IaStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let t = projector_traces(&h.spec, &h.spectrum)?;
        write(tr_xi, t.tr_xi, "tr_xi")?;
        write(tr_eta, t.tr_eta, "tr_eta")
    })
}

/// `ln rank(E1)`; `-inf` for the zero projector.
///
/// # Safety
/// `handle` must come from [`ia_typical_projector_new`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_typical_projector_log_rank(
    handle: *const IaTypicalProjector,
    out: *mut f64,
) -> IaStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        write(out, h.spec.log_dim, "out")
    })
}

/// Number of type classes spanning `E1`.
///
/// # Safety
/// `handle` must come from [`ia_typical_projector_new`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_typical_projector_class_count(
    handle: *const IaTypicalProjector,
    out: *mut usize,
) -> IaStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        write(out, h.spec.classes.len(), "out")
    })
}

/// # Safety
/// `handle` must come from [`ia_typical_projector_new`] and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ia_typical_projector_free(handle: *mut IaTypicalProjector) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

// Langevin

/// Forward/reverse experiment with `n_paths` per arm. The protocol is given
/// as `n_knots` `(t, value)` knots, linearly interpolated; a repeated time
/// is a jump. Release with [`ia_langevin_experiment_free`].
///
/// # Safety
/// `setup` and `out` must be valid; `knot_t` and `knot_value` must point to
/// `n_knots` doubles each.
#[no_mangle]
pub unsafe extern "C" fn ia_langevin_experiment_run(
    setup: *const IaLangevinSetup,
    knot_t: *const f64,
    knot_value: *const f64,
    n_knots: usize,
    n_paths: usize,
    seed: u64,
    out: *mut *mut IaLangevinExperiment,
) -> IaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = setup.as_ref().ok_or_else(|| null("setup"))?;
        let params = LangevinParams::new(s.lambda, s.gamma, s.dt, s.t1, s.t2)?;
        let knots: Vec<(f64, f64)> = slice(knot_t, n_knots, "knot_t")?
            .iter()
            .copied()
            .zip(slice(knot_value, n_knots, "knot_value")?.iter().copied())
            .collect();
        let protocol = Protocol::from_knots(&params, &knots)?;
        let inner = forward_reverse_experiment(&params, &protocol, n_paths, seed)?;
        out.write(Box::into_raw(Box::new(IaLangevinExperiment { inner })));
        Ok(())
    })
}

/// Paths per arm.
///
/// # Safety
/// `handle` must come from [`ia_langevin_experiment_run`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_langevin_experiment_len(
    handle: *const IaLangevinExperiment,
    out: *mut usize,
) -> IaStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        write(out, h.inner.forward.len(), "out")
    })
}

/// Copy one per-path field (`IA_FIELD_*`) of one arm (`IA_ARM_*`) into
/// `buf`, which must hold at least the arm length.
///
/// # Safety
/// `handle` must come from [`ia_langevin_experiment_run`]; `buf` must be
/// valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ia_langevin_experiment_copy(
    handle: *const IaLangevinExperiment,
    arm: c_int,
    field: c_int,
    buf: *mut f64,
    len: usize,
) -> IaStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let records = match arm {
            IA_ARM_FORWARD => &h.inner.forward,
            IA_ARM_REVERSE => &h.inner.reverse,
            other => return Err(invalid(format!("unknown arm {other}"))),
        };
        let pick: fn(&intrinsic_arrow::langevin::PathRecord) -> f64 = match field {
            IA_FIELD_DELTA_I => |r| r.delta_i,
            IA_FIELD_D => |r| r.d,
            IA_FIELD_XI => |r| r.xi,
            IA_FIELD_ETA => |r| r.eta,
            other => return Err(invalid(format!("unknown field {other}"))),
        };
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < records.len() {
            return Err(Failure(
                IaStatus::BufferTooSmall,
                format!("buffer holds {len}, need {}", records.len()),
            ));
        }
        for (i, r) in records.iter().enumerate() {
            buf.add(i).write(pick(r));
        }
        Ok(())
    })
}

/// `<e^{-D}>` over the forward arm.
///
/// # Safety
/// `handle` must come from [`ia_langevin_experiment_run`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ia_langevin_experiment_integral_relation(
    handle: *const IaLangevinExperiment,
    out: *mut IaEstimate,
) -> IaStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let m = h.inner.integral_relation();
        write(
            out,
            IaEstimate {
                mean: m.mean,
                std_error: m.std_error,
                count: m.count,
            },
            "out",
        )
    })
}

/// # Safety
/// `handle` must come from [`ia_langevin_experiment_run`] and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ia_langevin_experiment_free(handle: *mut IaLangevinExperiment) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}
