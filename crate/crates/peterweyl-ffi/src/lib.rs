//! C ABI for the peterweyl crate.
//!
//! Conventions (mirrored in `include/peterweyl.h`):
//! - Contexts are opaque handles created by `pw_context_new_*` and released
//!   by `pw_context_free`. A context is cheap; it only names the backend.
//! - Every fallible call returns an `int32_t` status: `PW_OK` (0) on
//!   success, otherwise a `PW_ERR_*` code. The most recent failure message
//!   for the calling thread is readable via `pw_last_error`.
//! - Result payloads are UTF-8 JSON strings allocated by this library;
//!   release them with `pw_string_free` (never with `free`).
//! - All functions catch panics and convert them to `PW_ERR_PANIC`; nothing
//!   unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use peterweyl::error::Error;
use peterweyl::session::{solve_with_synthetic_source, Backend};
use peterweyl::verify::solve::SubellipticOperator;
use peterweyl::verify::{run_check, CheckConfig};

pub const PW_OK: i32 = 0;
/// Runtime failure (I/O, numerical domain, serialization).
pub const PW_ERR_RUNTIME: i32 = 1;
/// Misuse: unknown names, infeasible configurations, wrong backend.
pub const PW_ERR_USAGE: i32 = 2;
/// A required pointer argument was null.
pub const PW_ERR_NULL: i32 = 3;
/// A string argument was not valid UTF-8.
pub const PW_ERR_UTF8: i32 = 4;
/// A panic was caught at the boundary; state may be stale but the process
/// is intact.
pub const PW_ERR_PANIC: i32 = 5;
/// An output buffer had the wrong length.
pub const PW_ERR_BUFFER: i32 = 6;

/// Bump on any breaking change to this surface.
const ABI_VERSION: u32 = 1;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(cleaned).unwrap_or_default());
    });
}

fn status_of(err: &Error) -> i32 {
    match err.exit_code() {
        2 => PW_ERR_USAGE,
        _ => PW_ERR_RUNTIME,
    }
}

/// Runs `body` with panic containment and last-error bookkeeping.
fn guarded(body: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("panic: {msg}"));
            PW_ERR_PANIC
        }
    }
}

/// Opaque context: a named backend.
pub struct PwContext {
    backend: Backend,
}

/// ABI version of this library; compare against PW_ABI_VERSION from the
/// header before using anything else.
#[no_mangle]
pub extern "C" fn pw_abi_version() -> u32 {
    ABI_VERSION
}

#[no_mangle]
pub extern "C" fn pw_context_new_su2() -> *mut PwContext {
    Box::into_raw(Box::new(PwContext {
        backend: Backend::parse("su2").expect("su2 backend"),
    }))
}

#[no_mangle]
pub extern "C" fn pw_context_new_torus() -> *mut PwContext {
    Box::into_raw(Box::new(PwContext {
        backend: Backend::parse("torus").expect("torus backend"),
    }))
}

/// Releases a context. Null is tolerated.
///
/// # Safety
/// `ctx` must be a pointer returned by `pw_context_new_*` that has not
/// already been freed.
#[no_mangle]
pub unsafe extern "C" fn pw_context_free(ctx: *mut PwContext) {
    if !ctx.is_null() {
        drop(unsafe { Box::from_raw(ctx) });
    }
}

/// Most recent error message on this thread, or null if none. The pointer
/// is owned by the library and valid until the next failing call on the
/// same thread; do not free it.
#[no_mangle]
pub extern "C" fn pw_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Frees a string returned by this library. Null is tolerated.
///
/// # Safety
/// `s` must be a pointer returned by a `pw_*` call that documents
/// `pw_string_free` ownership, and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

unsafe fn ctx_ref<'a>(ctx: *const PwContext) -> Result<&'a PwContext, i32> {
    if ctx.is_null() {
        set_last_error("null context");
        return Err(PW_ERR_NULL);
    }
    Ok(unsafe { &*ctx })
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, i32> {
    if s.is_null() {
        set_last_error(&format!("null {what}"));
        return Err(PW_ERR_NULL);
    }
    match unsafe { CStr::from_ptr(s) }.to_str() {
        Ok(v) => Ok(v),
        Err(_) => {
            set_last_error(&format!("{what} is not valid UTF-8"));
            Err(PW_ERR_UTF8)
        }
    }
}

fn emit_string(out: *mut *mut c_char, content: String) -> i32 {
    if out.is_null() {
        set_last_error("null output pointer");
        return PW_ERR_NULL;
    }
    let cleaned: String = content.chars().filter(|&c| c != '\0').collect();
    match CString::new(cleaned) {
        Ok(cs) => {
            unsafe { *out = cs.into_raw() };
            PW_OK
        }
        Err(_) => {
            set_last_error("result contained interior NUL");
            PW_ERR_RUNTIME
        }
    }
}

/// Number of quadrature nodes of the backend's grid at `resolution`.
///
/// # Safety
/// `ctx` must be a live context; `out_len` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn pw_grid_len(
    ctx: *const PwContext,
    resolution: usize,
    out_len: *mut usize,
) -> i32 {
    guarded(|| {
        let ctx = match unsafe { ctx_ref(ctx) } {
            Ok(c) => c,
            Err(code) => return code,
        };
        if out_len.is_null() {
            set_last_error("null output pointer");
            return PW_ERR_NULL;
        }
        let config = CheckConfig {
            cutoff: 1.0,
            resolution,
            seed: 0,
        };
        match ctx.backend.grid_info(&config) {
            Ok(report) => {
                let nodes = report.get_scalar("nodes").unwrap_or(0.0) as usize;
                unsafe { *out_len = nodes };
                PW_OK
            }
            Err(err) => {
                set_last_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Coordinates of grid node `index` (4 for su2 quaternions, 1 for the
/// torus angle), written into `out_coords[0..coords_len]`; `coords_len`
/// must match the backend's coordinate count exactly.
///
/// # Safety
/// `ctx` must be a live context; `out_coords` must point to at least
/// `coords_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pw_grid_node(
    ctx: *const PwContext,
    resolution: usize,
    index: usize,
    out_coords: *mut f64,
    coords_len: usize,
) -> i32 {
    guarded(|| {
        let ctx = match unsafe { ctx_ref(ctx) } {
            Ok(c) => c,
            Err(code) => return code,
        };
        if out_coords.is_null() {
            set_last_error("null output pointer");
            return PW_ERR_NULL;
        }
        let coords = match node_coords(&ctx.backend, resolution, index) {
            Ok(c) => c,
            Err(err) => {
                set_last_error(&err.to_string());
                return status_of(&err);
            }
        };
        if coords.len() != coords_len {
            set_last_error(&format!(
                "coords buffer length {coords_len} does not match coordinate count {}",
                coords.len()
            ));
            return PW_ERR_BUFFER;
        }
        let out = unsafe { std::slice::from_raw_parts_mut(out_coords, coords_len) };
        out.copy_from_slice(&coords);
        PW_OK
    })
}

fn node_coords(
    backend: &Backend,
    resolution: usize,
    index: usize,
) -> peterweyl::error::Result<Vec<f64>> {
    use peterweyl::group::CompactGroup;
    fn pick<G: CompactGroup>(
        group: &G,
        resolution: usize,
        index: usize,
    ) -> peterweyl::error::Result<Vec<f64>> {
        let grid = group.haar_grid(resolution)?;
        let node = grid.nodes.get(index).ok_or_else(|| {
            Error::usage(format!(
                "node index {index} out of range for {} nodes",
                grid.nodes.len()
            ))
        })?;
        Ok(group.point_coords(node))
    }
    match backend {
        Backend::Su2(g) => pick(g.as_ref(), resolution, index),
        Backend::Torus(g) => pick(g.as_ref(), resolution, index),
    }
}

/// Runs a named verification check; on success `*out_json` holds the full
/// report (release with `pw_string_free`). Returns PW_ERR_USAGE for
/// unknown names, infeasible configurations, or a torus context.
///
/// # Safety
/// `ctx` must be a live context; `name` must be a NUL-terminated string;
/// `out_json` must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn pw_run_check(
    ctx: *const PwContext,
    name: *const c_char,
    cutoff: f64,
    resolution: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let ctx = match unsafe { ctx_ref(ctx) } {
            Ok(c) => c,
            Err(code) => return code,
        };
        let name = match unsafe { str_arg(name, "check name") } {
            Ok(n) => n,
            Err(code) => return code,
        };
        if matches!(ctx.backend, Backend::Torus(_)) {
            set_last_error("checks require an su2 context");
            return PW_ERR_USAGE;
        }
        let config = CheckConfig {
            cutoff,
            resolution,
            seed,
        };
        match run_check(name, &config).and_then(|r| r.to_json()) {
            Ok(json) => emit_string(out_json, json),
            Err(err) => {
                set_last_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Solves a model operator (`"sub_laplacian"` or `"heat"`) for a seeded
/// synthetic source; on success `*out_json` holds the solve report
/// (release with `pw_string_free`).
///
/// # Safety
/// Same contract as `pw_run_check`.
#[no_mangle]
pub unsafe extern "C" fn pw_solve(
    ctx: *const PwContext,
    operator: *const c_char,
    cutoff: f64,
    resolution: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let ctx = match unsafe { ctx_ref(ctx) } {
            Ok(c) => c,
            Err(code) => return code,
        };
        let operator = match unsafe { str_arg(operator, "operator name") } {
            Ok(n) => n,
            Err(code) => return code,
        };
        if matches!(ctx.backend, Backend::Torus(_)) {
            set_last_error("solve requires an su2 context");
            return PW_ERR_USAGE;
        }
        let config = CheckConfig {
            cutoff,
            resolution,
            seed,
        };
        let result = SubellipticOperator::parse(operator)
            .and_then(|op| solve_with_synthetic_source(op, &config))
            .and_then(|report| report.to_json());
        match result {
            Ok(json) => emit_string(out_json, json),
            Err(err) => {
                set_last_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Forward transform of caller-sampled values on the backend's grid at
/// `resolution`, truncated at `cutoff`. `values_re`/`values_im` must hold
/// one entry per grid node (`pw_grid_len` tells you how many; `values_im`
/// may be null for real input). On success `*out_json` holds one record
/// per representation: label text, dimension, and the coefficient matrix
/// as row-major re/im arrays.
///
/// # Safety
/// `ctx` must be a live context; array pointers must reference `len`
/// readable doubles; `out_json` must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn pw_forward(
    ctx: *const PwContext,
    cutoff: f64,
    resolution: usize,
    values_re: *const f64,
    values_im: *const f64,
    len: usize,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let ctx = match unsafe { ctx_ref(ctx) } {
            Ok(c) => c,
            Err(code) => return code,
        };
        if values_re.is_null() {
            set_last_error("null values_re");
            return PW_ERR_NULL;
        }
        let re = unsafe { std::slice::from_raw_parts(values_re, len) };
        let im = if values_im.is_null() {
            None
        } else {
            Some(unsafe { std::slice::from_raw_parts(values_im, len) })
        };
        match forward_json(&ctx.backend, cutoff, resolution, re, im) {
            Ok(json) => emit_string(out_json, json),
            Err(err) => {
                set_last_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

fn forward_json(
    backend: &Backend,
    cutoff: f64,
    resolution: usize,
    re: &[f64],
    im: Option<&[f64]>,
) -> peterweyl::error::Result<String> {
    use num_complex::Complex64;
    use peterweyl::fourier::GridFunction;
    use peterweyl::group::CompactGroup;
    use std::sync::Arc;

    fn go<G: CompactGroup>(
        group: &G,
        cutoff: f64,
        resolution: usize,
        re: &[f64],
        im: Option<&[f64]>,
    ) -> peterweyl::error::Result<String> {
        let grid = Arc::new(group.haar_grid(resolution)?);
        if re.len() != grid.len() {
            return Err(Error::usage(format!(
                "value count {} does not match grid size {}",
                re.len(),
                grid.len()
            )));
        }
        let values: Vec<Complex64> = match im {
            Some(im) => re
                .iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
            None => re.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        };
        let f = GridFunction::new(grid, values);
        let duals = group.enumerate_dual(cutoff);
        if duals.is_empty() {
            return Err(Error::usage("cutoff admits no representations"));
        }
        let coeffs = group.forward(&f, &duals);
        let records: Vec<serde_json::Value> = duals
            .iter()
            .map(|irrep| {
                let mat = &coeffs.matrices[&irrep.label];
                serde_json::json!({
                    "label": group.label_text(irrep.label),
                    "dim": irrep.dim,
                    "re": mat.iter().map(|z| z.re).collect::<Vec<f64>>(),
                    "im": mat.iter().map(|z| z.im).collect::<Vec<f64>>(),
                })
            })
            .collect();
        let mut json = serde_json::to_string_pretty(&serde_json::json!({
            "cutoff": cutoff,
            "resolution": resolution,
            "coefficients": records,
        }))?;
        json.push('\n');
        Ok(json)
    }

    match backend {
        Backend::Su2(g) => go(g.as_ref(), cutoff, resolution, re, im),
        Backend::Torus(g) => go(g.as_ref(), cutoff, resolution, re, im),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn take_string(ptr: *mut c_char) -> String {
        assert!(!ptr.is_null());
        let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
        unsafe { pw_string_free(ptr) };
        s
    }

    fn last_error_text() -> String {
        let ptr = pw_last_error();
        assert!(!ptr.is_null(), "expected an error message");
        unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string()
    }

    #[test]
    fn check_roundtrip_through_the_c_surface() {
        let ctx = pw_context_new_su2();
        let mut out: *mut c_char = std::ptr::null_mut();
        let name = CString::new("weyl").unwrap();
        let status = unsafe { pw_run_check(ctx, name.as_ptr(), 32.0, 4, 7, &mut out) };
        assert_eq!(status, PW_OK);
        let json: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(json["pass"], serde_json::Value::Bool(true));
        assert_eq!(json["name"], "weyl");
        unsafe { pw_context_free(ctx) };
    }

    #[test]
    fn misuse_maps_to_usage_code_with_message() {
        let ctx = pw_context_new_su2();
        let mut out: *mut c_char = std::ptr::null_mut();
        let name = CString::new("nosuch").unwrap();
        let status = unsafe { pw_run_check(ctx, name.as_ptr(), 16.0, 16, 7, &mut out) };
        assert_eq!(status, PW_ERR_USAGE);
        assert!(last_error_text().contains("unknown check"));
        assert!(out.is_null(), "no payload on failure");
        unsafe { pw_context_free(ctx) };
    }

    #[test]
    fn torus_context_rejects_checks_and_solves() {
        let ctx = pw_context_new_torus();
        let mut out: *mut c_char = std::ptr::null_mut();
        let name = CString::new("weyl").unwrap();
        assert_eq!(
            unsafe { pw_run_check(ctx, name.as_ptr(), 16.0, 16, 7, &mut out) },
            PW_ERR_USAGE
        );
        let op = CString::new("heat").unwrap();
        assert_eq!(
            unsafe { pw_solve(ctx, op.as_ptr(), 8.0, 12, 7, &mut out) },
            PW_ERR_USAGE
        );
        unsafe { pw_context_free(ctx) };
    }

    #[test]
    fn null_arguments_are_rejected_not_dereferenced() {
        let mut out: *mut c_char = std::ptr::null_mut();
        let name = CString::new("weyl").unwrap();
        assert_eq!(
            unsafe { pw_run_check(std::ptr::null(), name.as_ptr(), 16.0, 16, 7, &mut out) },
            PW_ERR_NULL
        );
        let ctx = pw_context_new_su2();
        assert_eq!(
            unsafe { pw_run_check(ctx, std::ptr::null(), 16.0, 16, 7, &mut out) },
            PW_ERR_NULL
        );
        let mut len = 0usize;
        assert_eq!(
            unsafe { pw_grid_len(std::ptr::null(), 4, &mut len) },
            PW_ERR_NULL
        );
        unsafe { pw_context_free(ctx) };
    }

    #[test]
    fn grid_queries_and_buffer_contract() {
        let ctx = pw_context_new_torus();
        let mut len = 0usize;
        assert_eq!(unsafe { pw_grid_len(ctx, 8, &mut len) }, PW_OK);
        assert_eq!(len, 16);

        let mut coord = [0.0_f64; 1];
        assert_eq!(
            unsafe { pw_grid_node(ctx, 8, 3, coord.as_mut_ptr(), 1) },
            PW_OK
        );
        assert!(coord[0].is_finite());

        // Wrong buffer length and out-of-range index are both rejected.
        let mut wrong = [0.0_f64; 2];
        assert_eq!(
            unsafe { pw_grid_node(ctx, 8, 3, wrong.as_mut_ptr(), 2) },
            PW_ERR_BUFFER
        );
        assert_eq!(
            unsafe { pw_grid_node(ctx, 8, 99, coord.as_mut_ptr(), 1) },
            PW_ERR_USAGE
        );
        unsafe { pw_context_free(ctx) };

        let su2 = pw_context_new_su2();
        let mut quat = [0.0_f64; 4];
        assert_eq!(
            unsafe { pw_grid_node(su2, 4, 0, quat.as_mut_ptr(), 4) },
            PW_OK
        );
        let norm: f64 = quat.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(
            (norm - 1.0).abs() <= 1e-12,
            "grid nodes are unit quaternions"
        );
        unsafe { pw_context_free(su2) };
    }

    #[test]
    fn forward_transform_recovers_known_coefficients() {
        let ctx = pw_context_new_torus();
        let mut len = 0usize;
        assert_eq!(unsafe { pw_grid_len(ctx, 16, &mut len) }, PW_OK);

        // Sample cos(theta): coefficients 1/2 at labels +/-1, 0 elsewhere.
        let theta = |i: usize| 2.0 * std::f64::consts::PI * i as f64 / len as f64;
        let re: Vec<f64> = (0..len).map(|i| theta(i).cos()).collect();
        let mut out: *mut c_char = std::ptr::null_mut();
        let status =
            unsafe { pw_forward(ctx, 4.0, 16, re.as_ptr(), std::ptr::null(), len, &mut out) };
        assert_eq!(status, PW_OK);
        let json: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        for record in json["coefficients"].as_array().unwrap() {
            let label: i64 = record["label"].as_str().unwrap().parse().unwrap();
            let re0 = record["re"][0].as_f64().unwrap();
            let expected = if label.abs() == 1 { 0.5 } else { 0.0 };
            assert!(
                (re0 - expected).abs() <= 1e-12,
                "label {label}: coefficient {re0}"
            );
        }
        unsafe { pw_context_free(ctx) };
    }

    #[test]
    fn forward_rejects_mismatched_value_count() {
        let ctx = pw_context_new_su2();
        let re = [0.0_f64; 7];
        let mut out: *mut c_char = std::ptr::null_mut();
        let status = unsafe { pw_forward(ctx, 4.0, 4, re.as_ptr(), std::ptr::null(), 7, &mut out) };
        assert_eq!(status, PW_ERR_USAGE);
        assert!(last_error_text().contains("does not match grid size"));
        unsafe { pw_context_free(ctx) };
    }

    #[test]
    fn solve_reports_come_back_as_json() {
        let ctx = pw_context_new_su2();
        let mut out: *mut c_char = std::ptr::null_mut();
        let op = CString::new("sub_laplacian").unwrap();
        let status = unsafe { pw_solve(ctx, op.as_ptr(), 8.0, 12, 7, &mut out) };
        assert_eq!(status, PW_OK);
        let json: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(json["operator"], "sub_laplacian");
        assert!(json["ratio"].as_f64().unwrap() > 0.0);
        unsafe { pw_context_free(ctx) };
    }

    #[test]
    fn abi_version_is_stable() {
        assert_eq!(pw_abi_version(), 1);
    }
}
