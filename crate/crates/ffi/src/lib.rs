//! C ABI over the mlq library.
//!
//! Every function returns an `int32_t` status and writes results through out
//! pointers. Handles are opaque and must be released with the matching
//! `*_free`. Panics are caught at the boundary and reported as `MLQ_ERR_PANIC`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mlq::beta_arith::BetaContext;
use mlq::fixtures::random_element;
use mlq::formal_cas::{formal_commutator, formal_star, parse, DerivationPair};
use mlq::sampling::AngleGrid;
use mlq::star_algebra::AlgebraElement;
use mlq::states::{position_eigenvector, MlState};

pub const MLQ_OK: i32 = 0;
pub const MLQ_ERR_NULL: i32 = 1;
pub const MLQ_ERR_INVALID: i32 = 2;
/// Operands live on different grids, contexts or lattice sectors.
pub const MLQ_ERR_MISMATCH: i32 = 3;
pub const MLQ_ERR_PARSE: i32 = 4;
/// The caller's buffer is too small; the required size was written.
pub const MLQ_ERR_BUFFER: i32 = 5;
pub const MLQ_ERR_PANIC: i32 = 6;

pub const MLQ_PAIR_MAIN: i32 = 0;
pub const MLQ_PAIR_ALT: i32 = 1;

/// Physical parameters plus the angle grid.
pub struct MlqContext {
    ctx: BetaContext,
    grid: AngleGrid,
}

/// An element of the star algebra.
pub struct MlqElement {
    el: AlgebraElement,
}

fn guard(f: impl FnOnce() -> i32) -> i32 {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(MLQ_ERR_PANIC)
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> i32 {
    *out = Box::into_raw(Box::new(value));
    MLQ_OK
}

/// Creates a context. Even `grid_n` is bumped to the next odd size.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlq_context_new(beta: f64, hbar: f64, lambda: f64, grid_n: usize, out: *mut *mut MlqContext) -> i32 {
    guard(|| {
        if out.is_null() {
            return MLQ_ERR_NULL;
        }
        *out = ptr::null_mut();
        if grid_n < 3 {
            return MLQ_ERR_INVALID;
        }
        match BetaContext::new(beta, hbar, lambda) {
            Ok(ctx) => give(out, MlqContext { ctx, grid: AngleGrid::at_least(grid_n) }),
            Err(_) => MLQ_ERR_INVALID,
        }
    })
}

/// # Safety
/// `c` must be null or a pointer from `mlq_context_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mlq_context_free(c: *mut MlqContext) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a live context and `n` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlq_context_grid_size(c: *const MlqContext, n: *mut usize) -> i32 {
    if c.is_null() || n.is_null() {
        return MLQ_ERR_NULL;
    }
    *n = (*c).grid.n();
    MLQ_OK
}

unsafe fn make_element(c: *const MlqContext, out: *mut *mut MlqElement, f: impl FnOnce(&MlqContext) -> AlgebraElement) -> i32 {
    guard(|| {
        if c.is_null() || out.is_null() {
            return MLQ_ERR_NULL;
        }
        *out = ptr::null_mut();
        give(out, MlqElement { el: f(&*c) })
    })
}

/// Position eigenvector ρ_ξ.
///
/// # Safety
/// `c` must be a live context and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlq_element_position_eigenvector(c: *const MlqContext, xi: f64, out: *mut *mut MlqElement) -> i32 {
    if !xi.is_finite() {
        return MLQ_ERR_INVALID;
    }
    make_element(c, out, |c| position_eigenvector(&c.ctx, c.grid, xi).rho)
}

/// Maximal-localization state centred at ξ.
///
/// # Safety
/// `c` must be a live context and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlq_element_ml_state(c: *const MlqContext, xi: f64, out: *mut *mut MlqElement) -> i32 {
    if !xi.is_finite() {
        return MLQ_ERR_INVALID;
    }
    make_element(c, out, |c| MlState::new(c.ctx, xi).element(c.grid))
}

/// Seeded random band-limited element with modes |k| ≤ band.
///
/// # Safety
/// `c` must be a live context and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlq_element_random(c: *const MlqContext, seed: u64, band: u32, out: *mut *mut MlqElement) -> i32 {
    make_element(c, out, |c| random_element(c.ctx, c.grid, seed, band.max(1) as i64))
}

/// # Safety
/// `e` must be null or a pointer returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mlq_element_free(e: *mut MlqElement) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// out = a ⋆ b.
///
/// # Safety
/// `a`, `b` must be live elements and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlq_star(a: *const MlqElement, b: *const MlqElement, out: *mut *mut MlqElement) -> i32 {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return MLQ_ERR_NULL;
        }
        *out = ptr::null_mut();
        match (*a).el.star(&(*b).el) {
            Ok(el) => give(out, MlqElement { el }),
            Err(_) => MLQ_ERR_MISMATCH,
        }
    })
}

/// out = a*.
///
/// # Safety
/// `a` must be a live element and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlq_involution(a: *const MlqElement, out: *mut *mut MlqElement) -> i32 {
    guard(|| {
        if a.is_null() || out.is_null() {
            return MLQ_ERR_NULL;
        }
        give(out, MlqElement { el: (*a).el.involution() })
    })
}

/// # Safety
/// `e` must be a live element; `re`, `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mlq_element_trace(e: *const MlqElement, re: *mut f64, im: *mut f64) -> i32 {
    if e.is_null() || re.is_null() || im.is_null() {
        return MLQ_ERR_NULL;
    }
    let t = (*e).el.trace();
    *re = t.re;
    *im = t.im;
    MLQ_OK
}

/// # Safety
/// `e` must be a live element and `norm` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mlq_element_norm2(e: *const MlqElement, norm: *mut f64) -> i32 {
    if e.is_null() || norm.is_null() {
        return MLQ_ERR_NULL;
    }
    *norm = (*e).el.norm_2();
    MLQ_OK
}

/// Copies the n×n torus samples f̃(u_i, α_k), row-major in i, into `re` and `im`.
/// `len` is the capacity of each buffer; on `MLQ_ERR_BUFFER` it holds n² on return.
///
/// # Safety
/// `e` must be a live element, `len` valid, and `re`, `im` hold `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mlq_element_samples(e: *const MlqElement, re: *mut f64, im: *mut f64, len: *mut usize) -> i32 {
    guard(|| {
        if e.is_null() || len.is_null() {
            return MLQ_ERR_NULL;
        }
        let field = (*e).el.to_field();
        let data = field.data();
        if *len < data.len() {
            *len = data.len();
            return MLQ_ERR_BUFFER;
        }
        if re.is_null() || im.is_null() {
            return MLQ_ERR_NULL;
        }
        for (k, z) in data.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        *len = data.len();
        MLQ_OK
    })
}

/// Exact formal product (or commutator when `commutator` ≠ 0) of two
/// polynomial expressions, written as NUL-terminated canonical text.
///
/// `cap` is the buffer capacity in bytes. `needed` always receives the size
/// including the terminator; `terminated` receives 1 when the series stopped
/// before `order`. On `MLQ_ERR_PARSE`, `needed` holds the character offset.
///
/// # Safety
/// `f`, `g` must be NUL-terminated strings; `buf` must hold `cap` bytes or be
/// null with `cap` = 0; `needed` and `terminated` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mlq_formal(
    pair: i32,
    f: *const c_char,
    g: *const c_char,
    order: u32,
    commutator: i32,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
    terminated: *mut i32,
) -> i32 {
    guard(|| {
        if f.is_null() || g.is_null() || needed.is_null() || terminated.is_null() {
            return MLQ_ERR_NULL;
        }
        let pair = match pair {
            MLQ_PAIR_MAIN => DerivationPair::Main,
            MLQ_PAIR_ALT => DerivationPair::Alt,
            _ => return MLQ_ERR_INVALID,
        };
        let (Ok(fs), Ok(gs)) = (CStr::from_ptr(f).to_str(), CStr::from_ptr(g).to_str()) else {
            return MLQ_ERR_INVALID;
        };
        let (pf, pg) = match (parse(fs), parse(gs)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                *needed = e.pos;
                return MLQ_ERR_PARSE;
            }
        };
        let order = order as usize;
        let res = if commutator != 0 { formal_commutator(pair, &pf, &pg, order) } else { formal_star(pair, &pf, &pg, order) };
        let text = res.value.to_string();
        *needed = text.len() + 1;
        *terminated = res.terminated as i32;
        if cap < text.len() + 1 {
            return MLQ_ERR_BUFFER;
        }
        if buf.is_null() {
            return MLQ_ERR_NULL;
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
        *buf.add(text.len()) = 0;
        MLQ_OK
    })
}
