//! C ABI over the `ncerg` laboratory.
//!
//! Operators and semigroups cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns an [`NcergStatus`]; on failure the message is available from
//! [`ncerg_last_error_message`] on the same thread. Strings returned by the
//! library are released with [`ncerg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ncerg::algebra::{AlgebraShape, Operator};
use ncerg::averaging::{average_phi1, average_quadrature};
use ncerg::dynamics::{make_family, FamilySpec, Semigroup};
use ncerg::rearrangement::Rearrangeable;
use ncerg::spaces::{norm_p, NormDescriptor};
use ncerg::{Error, C64};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcergStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Numerical = 4,
    Scenario = 5,
    Io = 6,
    BufferTooSmall = 7,
    Utf8 = 8,
    Panic = 9,
}

/// Opaque operator handle.
pub struct NcergOperator(Operator);

/// Opaque semigroup handle.
pub struct NcergSemigroup(Semigroup);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NcergStatus {
    match e {
        Error::InvalidShape(_) | Error::ShapeMismatch(_) => NcergStatus::ShapeMismatch,
        Error::Numerical(_) => NcergStatus::Numerical,
        Error::Scenario(_) => NcergStatus::Scenario,
        Error::Io(_) => NcergStatus::Io,
        _ => NcergStatus::InvalidArgument,
    }
}

fn fail(status: NcergStatus, msg: impl Into<String>) -> NcergStatus {
    set_error(msg.into());
    status
}

/// Run `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (NcergStatus, String)>) -> NcergStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NcergStatus::Ok,
        Ok(Err((s, m))) => fail(s, m),
        Err(_) => fail(NcergStatus::Panic, "internal panic"),
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (NcergStatus, String)>;
}

impl<T> IntoFfi<T> for ncerg::Result<T> {
    fn ffi(self) -> Result<T, (NcergStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (NcergStatus, String) {
    (NcergStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], (NcergStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NcergStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (NcergStatus::Utf8, format!("{what}: {e}")))
}

unsafe fn shape_arg(dims: *const usize, weights: *const f64, n: usize) -> Result<AlgebraShape, (NcergStatus, String)> {
    let d = slice(dims, n, "dims")?;
    let w = slice(weights, n, "weights")?;
    AlgebraShape::new(d.iter().copied().zip(w.iter().copied())).ffi()
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (NcergStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn operator_ref<'a>(p: *const NcergOperator) -> Result<&'a Operator, (NcergStatus, String)> {
    p.as_ref().map(|o| &o.0).ok_or_else(|| null("operator"))
}

unsafe fn semigroup_ref<'a>(p: *const NcergSemigroup) -> Result<&'a Semigroup, (NcergStatus, String)> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("semigroup"))
}

unsafe fn write_scalar(out: *mut f64, v: f64) -> Result<(), (NcergStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = v;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ncerg_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn ncerg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Diagonal operator on the algebra ⊕ M_{dims[k]} with trace weights
/// `weights[k]`; `values` lists the block diagonals in order.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_diagonal(
    dims: *const usize,
    weights: *const f64,
    nblocks: usize,
    values: *const f64,
    nvalues: usize,
    out: *mut *mut NcergOperator,
) -> NcergStatus {
    guard(|| {
        let shape = shape_arg(dims, weights, nblocks)?;
        let v = slice(values, nvalues, "values")?;
        put(out, NcergOperator(Operator::diagonal(&shape, v).ffi()?))
    })
}

/// Operator from row-major block entries, concatenated block by block.
/// `im` may be NULL for a real operator.
///
/// # Safety
/// `re` (and `im` when not NULL) must hold `nentries` values.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_from_blocks(
    dims: *const usize,
    weights: *const f64,
    nblocks: usize,
    re: *const f64,
    im: *const f64,
    nentries: usize,
    out: *mut *mut NcergOperator,
) -> NcergStatus {
    guard(|| {
        let shape = shape_arg(dims, weights, nblocks)?;
        let re = slice(re, nentries, "re")?;
        let im = if im.is_null() { None } else { Some(slice(im, nentries, "im")?) };
        let need: usize = shape.blocks().iter().map(|b| b.dim * b.dim).sum();
        if nentries != need {
            return Err((NcergStatus::ShapeMismatch, format!("expected {need} entries, got {nentries}")));
        }
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(shape.num_blocks());
        for b in shape.blocks() {
            let n = b.dim;
            blocks.push(ncerg::CMatrix::from_fn(n, n, |i, j| {
                let k = offset + i * n + j;
                C64::new(re[k], im.map_or(0.0, |v| v[k]))
            }));
            offset += n * n;
        }
        put(out, NcergOperator(Operator::new(shape, blocks).ffi()?))
    })
}

/// Release an operator handle. NULL is ignored.
///
/// # Safety
/// `op` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_free(op: *mut NcergOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of complex entries over all blocks.
///
/// # Safety
/// `op` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_len(op: *const NcergOperator, out: *mut usize) -> NcergStatus {
    guard(|| {
        let x = operator_ref(op)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = x.blocks().iter().map(|m| m.len()).sum();
        Ok(())
    })
}

/// Copy the row-major block entries into `re` and `im` (capacity entries
/// each). `out_len` receives the required length; too small a capacity
/// yields `BufferTooSmall`.
///
/// # Safety
/// `re` and `im` must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_entries(
    op: *const NcergOperator,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> NcergStatus {
    guard(|| {
        let x = operator_ref(op)?;
        let n: usize = x.blocks().iter().map(|m| m.len()).sum();
        if !out_len.is_null() {
            *out_len = n;
        }
        if capacity < n {
            return Err((NcergStatus::BufferTooSmall, format!("need {n} entries, capacity {capacity}")));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let mut k = 0;
        for m in x.blocks() {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    *re.add(k) = m[(i, j)].re;
                    *im.add(k) = m[(i, j)].im;
                    k += 1;
                }
            }
        }
        Ok(())
    })
}

/// Weighted trace τ(x); writes the real and imaginary parts.
///
/// # Safety
/// `op` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_trace(op: *const NcergOperator, out_re: *mut f64, out_im: *mut f64) -> NcergStatus {
    guard(|| {
        let t = operator_ref(op)?.trace_complex();
        write_scalar(out_re, t.re)?;
        if !out_im.is_null() {
            *out_im = t.im;
        }
        Ok(())
    })
}

/// ‖x‖_p for 1 ≤ p ≤ ∞ (pass INFINITY for the operator norm).
///
/// # Safety
/// `op` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_norm_p(op: *const NcergOperator, p: f64, out: *mut f64) -> NcergStatus {
    guard(|| write_scalar(out, norm_p(operator_ref(op)?, p).ffi()?))
}

/// Norm given by a JSON descriptor such as `{"kind":"lorentz","phi":{"name":"power","alpha":0.5}}`.
///
/// # Safety
/// `descriptor` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_norm_json(
    op: *const NcergOperator,
    descriptor: *const c_char,
    out: *mut f64,
) -> NcergStatus {
    guard(|| {
        let x = operator_ref(op)?;
        let d: NormDescriptor = serde_json::from_str(str_arg(descriptor, "descriptor")?)
            .map_err(|e| (NcergStatus::InvalidArgument, format!("descriptor: {e}")))?;
        write_scalar(out, d.norm(x).ffi()?)
    })
}

/// The rearrangement μ(x) as pieces: μ equals `values[i]` on
/// `[ends[i-1], ends[i])` with `ends[-1] = 0`, and 0 after the last end.
///
/// # Safety
/// `ends` and `values` must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn ncerg_operator_mu(
    op: *const NcergOperator,
    ends: *mut f64,
    values: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> NcergStatus {
    guard(|| {
        let f = operator_ref(op)?.mu();
        let knots = f.knots();
        if !out_len.is_null() {
            *out_len = knots.len();
        }
        if capacity < knots.len() {
            return Err((
                NcergStatus::BufferTooSmall,
                format!("need {} pieces, capacity {capacity}", knots.len()),
            ));
        }
        if knots.is_empty() {
            return Ok(());
        }
        if ends.is_null() || values.is_null() {
            return Err(null("ends/values"));
        }
        for (i, &(e, v)) in knots.iter().enumerate() {
            *ends.add(i) = e;
            *values.add(i) = v;
        }
        Ok(())
    })
}

/// Build a semigroup from a JSON family spec, e.g. `{"family":"heat_cycle","n":8}`.
///
/// # Safety
/// `spec` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ncerg_semigroup_from_json(spec: *const c_char, out: *mut *mut NcergSemigroup) -> NcergStatus {
    guard(|| {
        let spec: FamilySpec = serde_json::from_str(str_arg(spec, "spec")?)
            .map_err(|e| (NcergStatus::InvalidArgument, format!("spec: {e}")))?;
        put(out, NcergSemigroup(make_family(&spec).ffi()?))
    })
}

/// Release a semigroup handle. NULL is ignored.
///
/// # Safety
/// `sg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ncerg_semigroup_free(sg: *mut NcergSemigroup) {
    if !sg.is_null() {
        drop(Box::from_raw(sg));
    }
}

/// Number of parameters d of the semigroup.
///
/// # Safety
/// `sg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncerg_semigroup_dim(sg: *const NcergSemigroup, out: *mut usize) -> NcergStatus {
    guard(|| {
        let d = semigroup_ref(sg)?.d();
        if out.is_null() {
            return Err(null("out"));
        }
        *out = d;
        Ok(())
    })
}

/// A_t(x) in closed form.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncerg_average_phi1(
    sg: *const NcergSemigroup,
    x: *const NcergOperator,
    t: f64,
    out: *mut *mut NcergOperator,
) -> NcergStatus {
    guard(|| {
        let y = average_phi1(semigroup_ref(sg)?, operator_ref(x)?, t).ffi()?;
        put(out, NcergOperator(y))
    })
}

/// A_t(x) by Gauss–Legendre quadrature; `error_estimate` (nullable)
/// receives the gap to a rule with four more points per axis.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncerg_average_quadrature(
    sg: *const NcergSemigroup,
    x: *const NcergOperator,
    t: f64,
    order: usize,
    out: *mut *mut NcergOperator,
    error_estimate: *mut f64,
) -> NcergStatus {
    guard(|| {
        let q = average_quadrature(semigroup_ref(sg)?, operator_ref(x)?, t, order).ffi()?;
        if !error_estimate.is_null() {
            *error_estimate = q.error_estimate;
        }
        put(out, NcergOperator(q.value))
    })
}

/// Run a JSON scenario held in memory. The report is returned through
/// `out_report` (release with [`ncerg_string_free`]) and the process-style
/// exit code (0, or 2 on a bound violation) through `out_exit_code`.
/// `has_seed = false` keeps the scenario's own seed.
///
/// # Safety
/// `scenario` must be a NUL-terminated string; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ncerg_run_scenario_json(
    scenario: *const c_char,
    has_seed: bool,
    seed: u64,
    out_report: *mut *mut c_char,
    out_exit_code: *mut i32,
) -> NcergStatus {
    guard(|| {
        let text = str_arg(scenario, "scenario")?;
        if out_report.is_null() || out_exit_code.is_null() {
            return Err(null("out"));
        }
        let outcome = ncerg::scenario::execute(text, has_seed.then_some(seed)).ffi()?;
        *out_exit_code = outcome.exit_code;
        *out_report = CString::new(outcome.report_json)
            .map_err(|e| (NcergStatus::Numerical, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ncerg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
