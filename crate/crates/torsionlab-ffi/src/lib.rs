//! C interface for the torsionlab library.
//!
//! Models are held behind opaque handles created by the `tl_model_*`
//! constructors and released with [`tl_model_free`].  Every accessor
//! returns a status code and writes its result through an out pointer;
//! on failure a human-readable message is available from
//! [`tl_last_error`] until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use torsionlab::models::{
    circle_model, equivariant_circle, interval_model, moore_model, product_model, ActionKind,
    CellModel,
};
use torsionlab::zeta::{circle_analytic, interval_analytic, rho_an, IntervalSpectrum};
use torsionlab::TorsionError;

/// Status code returned by every fallible call.
pub type TlStatus = i32;

/// The call succeeded.
pub const TL_OK: TlStatus = 0;
/// A required pointer argument was null.
pub const TL_NULL_POINTER: TlStatus = 1;
/// An argument was out of range or structurally invalid.
pub const TL_INVALID_ARGUMENT: TlStatus = 2;
/// The invariant is not defined for this model.
pub const TL_UNSUPPORTED: TlStatus = 3;
/// The computation failed numerically.
pub const TL_NUMERIC: TlStatus = 4;

/// Reflection through a diameter; the orientation class is inverted.
pub const TL_ACTION_CONJUGATION: i32 = 0;
/// Rotation by half a turn; the orientation class is preserved.
pub const TL_ACTION_ANTIPODAL: i32 = 1;

#[derive(Clone, Copy)]
enum Geometry {
    Interval,
    Circle,
    Other,
}

/// Opaque handle to a cellular model together with the parameters it was
/// built from.
pub struct TlModel {
    model: CellModel,
    geometry: Geometry,
    mu: f64,
    subdiv: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn status_of(err: &TorsionError) -> TlStatus {
    match err {
        TorsionError::Unsupported(_)
        | TorsionError::UnsupportedHomology(_)
        | TorsionError::MissingFundamentalCycle => TL_UNSUPPORTED,
        TorsionError::PoleAtHalf => TL_NUMERIC,
        _ => TL_INVALID_ARGUMENT,
    }
}

fn construct(
    f: impl FnOnce() -> Result<(CellModel, Geometry, f64, usize), TorsionError>,
) -> *mut TlModel {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok((model, geometry, mu, subdiv))) => Box::into_raw(Box::new(TlModel {
            model,
            geometry,
            mu,
            subdiv,
        })),
        Ok(Err(err)) => {
            set_error(&err.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Null-checks the handle and out pointer, then evaluates `f` with panics
/// contained at the boundary.
unsafe fn get<T>(
    model: *const TlModel,
    out: *mut T,
    f: impl FnOnce(&TlModel) -> Result<T, TorsionError>,
) -> TlStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer");
        return TL_NULL_POINTER;
    }
    let handle = &*model;
    match catch_unwind(AssertUnwindSafe(|| f(handle))) {
        Ok(Ok(value)) => {
            out.write(value);
            TL_OK
        }
        Ok(Err(err)) => {
            set_error(&err.to_string());
            status_of(&err)
        }
        Err(_) => {
            set_error("internal panic");
            TL_NUMERIC
        }
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread.  The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Unit interval of length `mu` subdivided into `subdiv` edges.
/// Returns null and sets the error message on failure.
#[no_mangle]
pub extern "C" fn tl_model_interval(subdiv: usize, mu: f64) -> *mut TlModel {
    construct(|| Ok((interval_model(subdiv, mu)?, Geometry::Interval, mu, subdiv)))
}

/// Circle of circumference `mu` subdivided into `subdiv` edges
/// (`subdiv >= 3`).  Returns null and sets the error message on failure.
#[no_mangle]
pub extern "C" fn tl_model_circle(subdiv: usize, mu: f64) -> *mut TlModel {
    construct(|| Ok((circle_model(subdiv, mu)?, Geometry::Circle, mu, subdiv)))
}

/// Two-cell complex whose first homology is cyclic of order `order`
/// (`order >= 2`).  Returns null and sets the error message on failure.
#[no_mangle]
pub extern "C" fn tl_model_moore(order: u64) -> *mut TlModel {
    construct(|| Ok((moore_model(order)?, Geometry::Other, 1.0, 1)))
}

/// Product of two circles with the given subdivisions and circumferences.
/// Returns null and sets the error message on failure.
#[no_mangle]
pub extern "C" fn tl_model_torus(
    subdiv_a: usize,
    mu_a: f64,
    subdiv_b: usize,
    mu_b: f64,
) -> *mut TlModel {
    construct(|| {
        let product = product_model(&circle_model(subdiv_a, mu_a)?, &circle_model(subdiv_b, mu_b)?)?;
        Ok((product, Geometry::Other, mu_a, subdiv_a))
    })
}

/// Circle with an order-two symmetry: `action` is one of
/// `TL_ACTION_CONJUGATION` or `TL_ACTION_ANTIPODAL`, and `subdiv` must be
/// even.  Returns null and sets the error message on failure.
#[no_mangle]
pub extern "C" fn tl_model_equivariant_circle(action: i32, subdiv: usize, mu: f64) -> *mut TlModel {
    construct(|| {
        let kind = match action {
            TL_ACTION_CONJUGATION => ActionKind::Conjugation,
            TL_ACTION_ANTIPODAL => ActionKind::Antipodal,
            other => {
                return Err(TorsionError::InvalidParameter(format!(
                    "unknown action code {other}"
                )))
            }
        };
        Ok((equivariant_circle(kind, subdiv, mu)?, Geometry::Circle, mu, subdiv))
    })
}

/// Releases a handle.  Passing null is a no-op.
///
/// # Safety
/// `model` must be null or a handle from a `tl_model_*` constructor that
/// has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn tl_model_free(model: *mut TlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Writes the rank of the real homology in the given degree.
///
/// # Safety
/// `model` must be a live handle from a `tl_model_*` constructor and
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn tl_model_betti(
    model: *const TlModel,
    degree: i64,
    out: *mut usize,
) -> TlStatus {
    get(model, out, |h| Ok(h.model.complex.realify().betti(degree)))
}

/// Writes the torsion of the realified cellular complex.
///
/// # Safety
/// `model` must be a live handle from a `tl_model_*` constructor and
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn tl_model_torsion(model: *const TlModel, out: *mut f64) -> TlStatus {
    get(model, out, |h| Ok(h.model.complex.realify().torsion()))
}

/// Writes the volume-corrected topological invariant of the model.
///
/// # Safety
/// `model` must be a live handle from a `tl_model_*` constructor and
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn tl_model_rho_top(model: *const TlModel, out: *mut f64) -> TlStatus {
    get(model, out, |h| torsionlab::manifold::rho_top(&h.model))
}

/// Writes the analytic invariant of the continuum limit the model was
/// sampled from.  Only the interval and the circle carry one.
///
/// # Safety
/// `model` must be a live handle from a `tl_model_*` constructor and
/// `out` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn tl_model_rho_an(model: *const TlModel, out: *mut f64) -> TlStatus {
    get(model, out, |h| {
        let analytic = match h.geometry {
            Geometry::Circle => circle_analytic(h.mu, h.subdiv)?,
            Geometry::Interval => {
                interval_analytic(h.mu, h.subdiv, IntervalSpectrum::PaperValue)?
            }
            Geometry::Other => {
                return Err(TorsionError::Unsupported(format!(
                    "{}: analytic spectra are provided for the circle and the interval",
                    h.model.name
                )))
            }
        };
        Ok(rho_an(&analytic))
    })
}
