//! C interface to `cellfree-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_load`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`CfStatus`]; on failure a message is available from
//! [`cf_last_error`] until the next failing call on the same thread.
//! Panics never unwind into C and are reported as `CF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cellfree_core::channel::LargeScaleFading;
use cellfree_core::config::{load_config, SystemConfig};
use cellfree_core::energy::{ee_symmetric, evaluate_plan, SymmetricModel};
use cellfree_core::experiments::drop_fading;
use cellfree_core::fronthaul::FronthaulPlan;
use cellfree_core::optimizer::{
    alternating_optimize, grid_search, optimal_m_of_closed_form, optimal_n_closed_form, Method, NRange,
    NSolveOptions, PlanOptimum,
};
use cellfree_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Panic = 5,
}

/// Opaque system configuration.
pub struct CfConfig(SystemConfig);

/// Opaque equal-fading model.
pub struct CfModel(SymmetricModel);

/// Opaque per-drop large-scale fading matrix.
pub struct CfFading(LargeScaleFading);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfMethod {
    ClosedForm = 0,
    Grid = 1,
    Alternating = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfPlanOptimum {
    pub n_star: f64,
    pub m_of_star: usize,
    pub ee_star: f64,
    pub method: CfMethod,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfNOptimum {
    /// `false` when no fiber links are present and `N` is irrelevant.
    pub has_value: bool,
    pub n_star: f64,
    pub fallback_used: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfEvaluation {
    pub sum_rate: f64,
    pub p_net: f64,
    pub omega: f64,
    pub ee: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CfStatus {
    match e {
        Error::InvalidArgument(_) => CfStatus::InvalidArgument,
        Error::Config { .. } | Error::ConfigParse { .. } => CfStatus::Config,
        Error::Io { .. } => CfStatus::Io,
    }
}

fn guard<F>(f: F) -> CfStatus
where
    F: FnOnce() -> Result<(), CfFailure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfStatus::Ok,
        Ok(Err(CfFailure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            CfStatus::NullPointer
        }
        Ok(Err(CfFailure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(CfFailure::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            CfStatus::InvalidArgument
        }
        Err(_) => {
            set_error("internal panic".into());
            CfStatus::Panic
        }
    }
}

enum CfFailure {
    Null(&'static str),
    Core(Error),
    Utf8,
}

impl From<Error> for CfFailure {
    fn from(e: Error) -> Self {
        CfFailure::Core(e)
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, CfFailure> {
    p.as_ref().ok_or(CfFailure::Null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &'static str) -> Result<(), CfFailure> {
    if p.is_null() {
        return Err(CfFailure::Null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, CfFailure> {
    if p.is_null() {
        return Err(CfFailure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| CfFailure::Utf8)
}

fn plan_optimum(o: PlanOptimum) -> CfPlanOptimum {
    CfPlanOptimum {
        n_star: o.n_star,
        m_of_star: o.m_of_star,
        ee_star: o.ee_star,
        method: match o.method {
            Method::ClosedForm => CfMethod::ClosedForm,
            Method::Grid => CfMethod::Grid,
            Method::Alternating => CfMethod::Alternating,
        },
    }
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn cf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default (table) configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cf_config_default(out: *mut *mut CfConfig) -> CfStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(CfConfig(SystemConfig::default()))), "out"))
}

/// Load a TOML configuration file; `"default"` gives the defaults.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_config_load(path: *const c_char, out: *mut *mut CfConfig) -> CfStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let cfg = load_config(Path::new(path))?;
        write_out(out, Box::into_raw(Box::new(CfConfig(cfg))), "out")
    })
}

/// Parse a configuration from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_config_from_toml(text: *const c_char, out: *mut *mut CfConfig) -> CfStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let cfg = SystemConfig::from_toml_str(text, Path::new("<memory>"))?;
        write_out(out, Box::into_raw(Box::new(CfConfig(cfg))), "out")
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_config_free(cfg: *mut CfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Noise power `δ²` in Watt.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_config_noise_power(cfg: *const CfConfig, out: *mut f64) -> CfStatus {
    guard(|| write_out(out, borrow(cfg, "cfg")?.0.delta_sq(), "out"))
}

/// Equal-fading model; `β` is resolved with `seed` when not configured.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_model_new(cfg: *const CfConfig, seed: u64, out: *mut *mut CfModel) -> CfStatus {
    guard(|| {
        let model = borrow(cfg, "cfg")?.0.symmetric_model(seed)?;
        write_out(out, Box::into_raw(Box::new(CfModel(model))), "out")
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_model_free(model: *mut CfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Energy efficiency in bits/Joule with `m_of` fiber links of coefficient `n`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_ee_symmetric(model: *const CfModel, n: f64, m_of: usize, out: *mut f64) -> CfStatus {
    guard(|| write_out(out, ee_symmetric(n, m_of, &borrow(model, "model")?.0)?, "out"))
}

/// Exhaustive search over `N ∈ lo:hi:step` and every fiber count.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_grid_search(
    model: *const CfModel,
    n_lo: f64,
    n_hi: f64,
    n_step: f64,
    out: *mut CfPlanOptimum,
) -> CfStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let r = grid_search(&m.0, &NRange::new(n_lo, n_hi, n_step)?)?;
        write_out(out, plan_optimum(r), "out")
    })
}

/// Closed-form optimal fiber count at coefficient `n`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_optimal_m_of(model: *const CfModel, n: f64, out: *mut usize) -> CfStatus {
    guard(|| {
        let r = optimal_m_of_closed_form(n, &borrow(model, "model")?.0)?;
        write_out(out, r.m_of_star, "out")
    })
}

/// Closed-form optimal coefficient for `m_of` fiber links, `N >= 1`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_optimal_n(model: *const CfModel, m_of: usize, out: *mut CfNOptimum) -> CfStatus {
    guard(|| {
        let r = optimal_n_closed_form(m_of, &borrow(model, "model")?.0, &NSolveOptions::default())?;
        let v = match r {
            Some(o) => CfNOptimum {
                has_value: true,
                n_star: o.n_star,
                fallback_used: o.fallback_used,
            },
            None => CfNOptimum {
                has_value: false,
                n_star: f64::NAN,
                fallback_used: false,
            },
        };
        write_out(out, v, "out")
    })
}

/// Alternate the two closed forms from `(init_n, init_m_of)`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_alternating_optimize(
    model: *const CfModel,
    init_n: f64,
    init_m_of: usize,
    max_iters: usize,
    out: *mut CfPlanOptimum,
) -> CfStatus {
    guard(|| {
        let m = borrow(model, "model")?;
        let r = alternating_optimize(&m.0, init_n, init_m_of, max_iters, 1e-6, &NSolveOptions::default())?;
        write_out(out, plan_optimum(r.optimum), "out")
    })
}

/// Large-scale fading of random drop `drop_index` under `seed`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_fading_drop(
    cfg: *const CfConfig,
    seed: u64,
    drop_index: usize,
    out: *mut *mut CfFading,
) -> CfStatus {
    guard(|| {
        let f = drop_fading(&borrow(cfg, "cfg")?.0, seed, drop_index)?;
        write_out(out, Box::into_raw(Box::new(CfFading(f))), "out")
    })
}

/// # Safety
/// `fading` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_fading_free(fading: *mut CfFading) {
    if !fading.is_null() {
        drop(Box::from_raw(fading));
    }
}

/// `β` between AP `ap` and UE `ue`.
///
/// # Safety
/// `fading` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_fading_get(fading: *const CfFading, ap: usize, ue: usize, out: *mut f64) -> CfStatus {
    guard(|| {
        let f = &borrow(fading, "fading")?.0;
        if ap >= f.num_aps() || ue >= f.num_ues() {
            return Err(Error::InvalidArgument(format!(
                "index ({ap}, {ue}) outside {}x{}",
                f.num_aps(),
                f.num_ues()
            ))
            .into());
        }
        write_out(out, f.get(ap, ue), "out")
    })
}

/// Rates, power and EE of a drop with the last `m_of` APs on fiber.
///
/// # Safety
/// `cfg` and `fading` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cf_evaluate_plan(
    cfg: *const CfConfig,
    fading: *const CfFading,
    n: f64,
    m_of: usize,
    out: *mut CfEvaluation,
) -> CfStatus {
    guard(|| {
        let c = &borrow(cfg, "cfg")?.0;
        let f = &borrow(fading, "fading")?.0;
        let plan = FronthaulPlan::fso_first(f.num_aps(), m_of, c.c_fso, n)?;
        let sig = cellfree_core::fronthaul::UplinkSignalParams::uniform(
            c.rho_u(),
            c.eta,
            c.delta_sq(),
            f.num_aps(),
            f.num_ues(),
        )?;
        let r = evaluate_plan(f, &sig, &c.power_cost(), &plan)?;
        write_out(
            out,
            CfEvaluation {
                sum_rate: r.rates.sum_rate,
                p_net: r.p_net,
                omega: r.omega,
                ee: r.ee,
            },
            "out",
        )
    })
}
