//! C ABI for the annulus construction pipeline.
//!
//! All functions return a status code (`CMCAF_OK` = 0); constructed models
//! are opaque handles freed with `cmcaf_model_free`. The last error message
//! is thread local and read with `cmcaf_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use cmcaf::family::{find_beta_star_tol, match_residual, assemble_annulus_tol, AnnulusModel};
use cmcaf::mesh::TriMesh;
use cmcaf::param::ParamPoint;
use cmcaf::period::{gamma_level_tol, per_map, sigma_period};
use cmcaf::report::AnnulusReport;
use cmcaf::surface::SurfaceTols;
use cmcaf::verify::{run_all, GeomTols, Verdict};
use cmcaf::Error;

pub const CMCAF_OK: i32 = 0;
pub const CMCAF_ERR_NUMERIC: i32 = 1;
pub const CMCAF_ERR_DOMAIN: i32 = 2;
pub const CMCAF_ERR_CONSISTENCY: i32 = 3;
pub const CMCAF_ERR_IO: i32 = 4;
pub const CMCAF_ERR_ARGUMENT: i32 = 5;
pub const CMCAF_ERR_PANIC: i32 = 6;

const PROBE_SEED: u64 = 0xC31C;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Numeric { .. } => CMCAF_ERR_NUMERIC,
        Error::Domain(_) => CMCAF_ERR_DOMAIN,
        Error::Consistency(_) => CMCAF_ERR_CONSISTENCY,
        Error::Io(_) | Error::Parse(_) | Error::Mesh(_) => CMCAF_ERR_IO,
    }
}

fn guarded<F: FnOnce() -> i32>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            CMCAF_ERR_PANIC
        }
    }
}

fn fail(e: Error) -> i32 {
    set_error(&e.to_string());
    code_for(&e)
}

/// Opaque constructed annulus: model, triangulated mesh, verdicts.
pub struct CmcafModel {
    model: AnnulusModel,
    mesh: TriMesh,
    verdicts: Vec<Verdict>,
}

/// Message of the most recent error on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn cmcaf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Period map Per(α, β, γ).
#[no_mangle]
pub extern "C" fn cmcaf_per(alpha: f64, beta: f64, gamma: f64, out: *mut f64) -> i32 {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return CMCAF_ERR_ARGUMENT;
        }
        match ParamPoint::new(alpha, beta, gamma).and_then(|p| per_map(&p)) {
            Ok(v) => {
                unsafe { *out = v };
                CMCAF_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Half-period σ(α, β, γ).
#[no_mangle]
pub extern "C" fn cmcaf_sigma(alpha: f64, beta: f64, gamma: f64, out: *mut f64) -> i32 {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return CMCAF_ERR_ARGUMENT;
        }
        match ParamPoint::new(alpha, beta, gamma).and_then(|p| sigma_period(&p)) {
            Ok(v) => {
                unsafe { *out = v };
                CMCAF_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Solve Per(α, β, γ) = c for γ, with c in (-1, 0].
#[no_mangle]
pub extern "C" fn cmcaf_gamma_level(c: f64, alpha: f64, beta: f64, out: *mut f64) -> i32 {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return CMCAF_ERR_ARGUMENT;
        }
        match gamma_level_tol(c, alpha, beta, 1e-12) {
            Ok(v) => {
                unsafe { *out = v };
                CMCAF_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Build and verify the annulus with n lobes at family parameter μ ≥ 0.
/// `u_samples`/`v_samples` of 0 select the default resolution.
#[no_mangle]
pub extern "C" fn cmcaf_construct(
    n: u32,
    mu: f64,
    u_samples: usize,
    v_samples: usize,
    out: *mut *mut CmcafModel,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return CMCAF_ERR_ARGUMENT;
        }
        let stols = SurfaceTols::default();
        let build = || -> cmcaf::Result<CmcafModel> {
            let fp = if mu == 0.0 {
                let beta_star = find_beta_star_tol(n, stols)?;
                match_residual(n, 1.0, beta_star, stols)?.1
            } else {
                let steps = (mu / 0.004).ceil().max(1.0) as usize;
                let mu_list: Vec<f64> =
                    (0..=steps).map(|i| mu * i as f64 / steps as f64).collect();
                let res = cmcaf::family::continue_family(n, &mu_list, stols)?;
                match res.truncated {
                    None => *res.points.last().unwrap(),
                    Some(note) => {
                        return Err(Error::numeric(
                            format!("continuation stopped: {note}"),
                            res.points.last().map(|p| p.mu).unwrap_or(0.0),
                        ))
                    }
                }
            };
            let nu = if u_samples == 0 {
                cmcaf::surface::DEFAULT_U_SAMPLES
            } else {
                u_samples
            };
            let nv = if v_samples == 0 {
                cmcaf::surface::DEFAULT_V_SAMPLES_PER_N * n as usize
            } else {
                v_samples
            };
            let model = assemble_annulus_tol(&fp, nu, nv, stols)?;
            let mesh = TriMesh::from_patch(&model.patch)?;
            let verdicts = run_all(&model, &mesh, GeomTols::default(), PROBE_SEED);
            Ok(CmcafModel {
                model,
                mesh,
                verdicts,
            })
        };
        match build() {
            Ok(m) => {
                unsafe { *out = Box::into_raw(Box::new(m)) };
                CMCAF_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// 1 if every verdict passed, else 0.
#[no_mangle]
pub extern "C" fn cmcaf_model_all_pass(model: *const CmcafModel, out: *mut i32) -> i32 {
    guarded(|| {
        if model.is_null() || out.is_null() {
            set_error("null pointer");
            return CMCAF_ERR_ARGUMENT;
        }
        let m = unsafe { &*model };
        unsafe { *out = m.verdicts.iter().all(|v| v.pass) as i32 };
        CMCAF_OK
    })
}

/// Rescaled mean curvature of the model.
#[no_mangle]
pub extern "C" fn cmcaf_model_mean_curvature(model: *const CmcafModel, out: *mut f64) -> i32 {
    guarded(|| {
        if model.is_null() || out.is_null() {
            set_error("null pointer");
            return CMCAF_ERR_ARGUMENT;
        }
        unsafe { *out = (*model).model.h_rescaled };
        CMCAF_OK
    })
}

/// Full report as a JSON string; free it with `cmcaf_string_free`.
#[no_mangle]
pub extern "C" fn cmcaf_model_report_json(model: *const CmcafModel, out: *mut *mut c_char) -> i32 {
    guarded(|| {
        if model.is_null() || out.is_null() {
            set_error("null pointer");
            return CMCAF_ERR_ARGUMENT;
        }
        let m = unsafe { &*model };
        let rep = AnnulusReport::from_model(&m.model, m.verdicts.clone());
        match rep.to_json() {
            Ok(json) => match CString::new(json) {
                Ok(s) => {
                    unsafe { *out = s.into_raw() };
                    CMCAF_OK
                }
                Err(_) => {
                    set_error("report contained interior NUL");
                    CMCAF_ERR_IO
                }
            },
            Err(e) => fail(e),
        }
    })
}

/// Write the triangulated mesh as ASCII OBJ.
#[no_mangle]
pub extern "C" fn cmcaf_model_export_obj(model: *const CmcafModel, path: *const c_char) -> i32 {
    guarded(|| {
        if model.is_null() || path.is_null() {
            set_error("null pointer");
            return CMCAF_ERR_ARGUMENT;
        }
        let m = unsafe { &*model };
        let p = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("path is not valid UTF-8");
                return CMCAF_ERR_ARGUMENT;
            }
        };
        match m.mesh.write_obj(Path::new(p)) {
            Ok(()) => CMCAF_OK,
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub extern "C" fn cmcaf_model_free(model: *mut CmcafModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

#[no_mangle]
pub extern "C" fn cmcaf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
