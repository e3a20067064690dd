//! C ABI over `varcong`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released by the matching `*_free`. Every fallible function returns a
//! [`VcStatus`]; on failure a message is available from [`vc_last_error`]
//! until the next call on the same thread. Strings returned through `char **`
//! out-parameters are owned by the caller and released with [`vc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use varcong::congruence::{enumerate_all_congruences, find_violation, EquivalenceRelation};
use varcong::lattice::height_formula;
use varcong::synthesis::{LayeredLattice, Synthesizer};
use varcong::transform::Transformation;
use varcong::variant::VariantContext;
use varcong::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    CapExceeded = 4,
    NotCongruence = 5,
    Universal = 6,
    Invalid = 7,
    Internal = 8,
}

/// A sandwich element with its regular part, local monoid and retraction.
pub struct VcContext {
    inner: VariantContext,
}

/// A congruence lattice produced by structural enumeration.
pub struct VcLattice {
    inner: LayeredLattice,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> VcStatus {
    match e {
        Error::Parse(_) | Error::Json(_) => VcStatus::Parse,
        Error::CapExceeded { .. } => VcStatus::CapExceeded,
        Error::NotCongruence { .. } => VcStatus::NotCongruence,
        Error::Universal => VcStatus::Universal,
        _ => VcStatus::Invalid,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (VcStatus, String)>) -> VcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            VcStatus::Internal
        }
    }
}

fn lib(e: Error) -> (VcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (VcStatus, String) {
    (VcStatus::NullPointer, format!("{name} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, (VcStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (VcStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (VcStatus, String)> {
    let c = CString::new(s).map_err(|_| (VcStatus::Internal, "string contains nul".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn context<'a>(ctx: *const VcContext) -> Result<&'a VariantContext, (VcStatus, String)> {
    ctx.as_ref().map(|c| &c.inner).ok_or_else(|| null("context"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn vc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn vc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the context of the sandwich element `a`, given as `"n: i1 ... in"`.
///
/// # Safety
/// `a` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_context_new(a: *const c_char, out: *mut *mut VcContext) -> VcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let t: Transformation = read_str(a, "a")?.parse().map_err(lib)?;
        let inner = VariantContext::from_transformation(&t).map_err(lib)?;
        *out = Box::into_raw(Box::new(VcContext { inner }));
        Ok(())
    })
}

/// # Safety
/// `ctx` must come from [`vc_context_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn vc_context_free(ctx: *mut VcContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Sizes of the regular part `P` and of the local monoid, and the rank of `a`.
///
/// # Safety
/// `ctx` must be a live handle; out-pointers may be null to skip a value.
#[no_mangle]
pub unsafe extern "C" fn vc_context_sizes(
    ctx: *const VcContext,
    size_p: *mut usize,
    size_local: *mut usize,
    rank: *mut usize,
) -> VcStatus {
    guard(|| {
        let c = context(ctx)?;
        if let Some(p) = size_p.as_mut() {
            *p = c.p.len();
        }
        if let Some(t) = size_local.as_mut() {
            *t = c.t.len();
        }
        if let Some(r) = rank.as_mut() {
            *r = c.rank();
        }
        Ok(())
    })
}

/// JSON summary of the context.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_context_summary_json(ctx: *const VcContext, out: *mut *mut c_char) -> VcStatus {
    guard(|| {
        let c = context(ctx)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = serde_json::to_string(&c.summary()).map_err(|e| lib(e.into()))?;
        write_string(out, s)
    })
}

/// Number of congruences of the regular part by brute force. Refused when
/// the regular part has more than `cap_elements` elements.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_oracle_count(ctx: *const VcContext, cap_elements: usize, out: *mut usize) -> VcStatus {
    guard(|| {
        let c = context(ctx)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = enumerate_all_congruences(&c.p, cap_elements).map_err(lib)?.len();
        Ok(())
    })
}

/// Structural enumeration of the congruence lattice. `cap` bounds both the
/// system enumerations and the number of lattice nodes.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_lattice_new(ctx: *const VcContext, cap: usize, out: *mut *mut VcLattice) -> VcStatus {
    guard(|| {
        let c = context(ctx)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let syn = Synthesizer::new(c).map_err(lib)?;
        let inner = syn.enumerate_structurally(cap, cap).map_err(lib)?;
        *out = Box::into_raw(Box::new(VcLattice { inner }));
        Ok(())
    })
}

/// # Safety
/// `lat` must come from [`vc_lattice_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn vc_lattice_free(lat: *mut VcLattice) {
    if !lat.is_null() {
        drop(Box::from_raw(lat));
    }
}

/// Number of congruences and the height of the lattice.
///
/// # Safety
/// `lat` must be a live handle; out-pointers may be null to skip a value.
#[no_mangle]
pub unsafe extern "C" fn vc_lattice_stats(lat: *const VcLattice, len: *mut usize, height: *mut usize) -> VcStatus {
    guard(|| {
        let l = lat.as_ref().ok_or_else(|| null("lattice"))?;
        if let Some(n) = len.as_mut() {
            *n = l.inner.len();
        }
        if let Some(h) = height.as_mut() {
            *h = l.inner.lattice.height().0;
        }
        Ok(())
    })
}

/// Lattice as JSON (`as_dot == false`) or Graphviz DOT.
///
/// # Safety
/// `lat` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_lattice_export(lat: *const VcLattice, as_dot: bool, out: *mut *mut c_char) -> VcStatus {
    guard(|| {
        let l = lat.as_ref().ok_or_else(|| null("lattice"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = if as_dot {
            l.inner.to_dot("cong")
        } else {
            l.inner.to_json().to_string()
        };
        write_string(out, s)
    })
}

/// Decomposes a congruence of the regular part given as a JSON list of
/// blocks (zero-based indices or transformation strings) and writes the
/// decomposition as JSON.
///
/// # Safety
/// `ctx` must be a live handle, `blocks_json` a valid C string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_classify(
    ctx: *const VcContext,
    blocks_json: *const c_char,
    out: *mut *mut c_char,
) -> VcStatus {
    guard(|| {
        let c = context(ctx)?;
        let text = read_str(blocks_json, "blocks_json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sigma: EquivalenceRelation = varcong::cli::read_congruence(c, text).map_err(lib)?;
        if let Some(v) = find_violation(&sigma, &c.p) {
            return Err(lib(v.into()));
        }
        let syn = Synthesizer::new(c).map_err(lib)?;
        let d = syn.classify(&sigma).map_err(lib)?;
        write_string(out, syn.decomposition_json(&d).to_string())
    })
}

/// Closed-form lattice height for degree `n` and kernel block sizes
/// `blocks[0..len]`, written as a decimal string.
///
/// # Safety
/// `blocks` must point to `len` readable values and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vc_height_formula(
    n: usize,
    blocks: *const usize,
    len: usize,
    out: *mut *mut c_char,
) -> VcStatus {
    guard(|| {
        if blocks.is_null() && len > 0 {
            return Err(null("blocks"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let b = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(blocks, len)
        };
        let h = height_formula(n, b).map_err(lib)?;
        write_string(out, h.to_string())
    })
}
