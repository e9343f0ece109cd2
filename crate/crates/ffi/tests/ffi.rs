use std::ffi::{CStr, CString};
use std::ptr;

use cellfree_ffi::*;

fn last_error() -> String {
    let p = cf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn config_round_trip_and_noise() {
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(cf_config_default(&mut cfg), CfStatus::Ok);
        let mut d = 0.0;
        assert_eq!(cf_config_noise_power(cfg, &mut d), CfStatus::Ok);
        assert!((d - 6.362_410_294_494_55e-13).abs() < 1e-24);
        cf_config_free(cfg);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let text = CString::new("eta = 1.5").unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(cf_config_from_toml(text.as_ptr(), &mut cfg), CfStatus::Config);
        assert!(cfg.is_null());
        assert!(last_error().contains("eta"));

        assert_eq!(cf_config_default(ptr::null_mut()), CfStatus::NullPointer);
        assert!(last_error().contains("out"));

        let path = CString::new("/nonexistent/cellfree.toml").unwrap();
        assert_eq!(cf_config_load(path.as_ptr(), &mut cfg), CfStatus::Io);

        let mut v = 0.0;
        assert_eq!(cf_ee_symmetric(ptr::null(), 2.0, 1, &mut v), CfStatus::NullPointer);
    }
}

#[test]
fn model_queries_agree() {
    let text = CString::new("beta = 1e-13").unwrap();
    let (mut cfg, mut model) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(cf_config_from_toml(text.as_ptr(), &mut cfg), CfStatus::Ok);
        assert_eq!(cf_model_new(cfg, 42, &mut model), CfStatus::Ok);

        let mut grid = CfPlanOptimum {
            n_star: 0.0,
            m_of_star: 0,
            ee_star: 0.0,
            method: CfMethod::ClosedForm,
        };
        assert_eq!(cf_grid_search(model, 1.0, 10.0, 0.1, &mut grid), CfStatus::Ok);
        assert_eq!(grid.method, CfMethod::Grid);
        let mut ee = 0.0;
        assert_eq!(cf_ee_symmetric(model, grid.n_star, grid.m_of_star, &mut ee), CfStatus::Ok);
        assert_eq!(ee, grid.ee_star);

        let mut m_of = usize::MAX;
        assert_eq!(cf_optimal_m_of(model, 8.0, &mut m_of), CfStatus::Ok);
        assert_eq!(m_of, 0);

        let mut n = CfNOptimum {
            has_value: true,
            n_star: 0.0,
            fallback_used: false,
        };
        assert_eq!(cf_optimal_n(model, 0, &mut n), CfStatus::Ok);
        assert!(!n.has_value);
        assert_eq!(cf_optimal_n(model, 100, &mut n), CfStatus::Ok);
        assert!(n.has_value && n.n_star >= 1.0);

        let mut alt = grid;
        assert_eq!(cf_alternating_optimize(model, 5.0, 10, 50, &mut alt), CfStatus::Ok);
        assert_eq!(alt.method, CfMethod::Alternating);
        assert!(alt.ee_star <= grid.ee_star * (1.0 + 1e-3));

        assert_eq!(cf_ee_symmetric(model, 0.0, 5, &mut ee), CfStatus::InvalidArgument);
        cf_model_free(model);
        cf_config_free(cfg);
    }
}

#[test]
fn fading_and_evaluation() {
    let text = CString::new("m = 12\nk = 3").unwrap();
    let (mut cfg, mut fading) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(cf_config_from_toml(text.as_ptr(), &mut cfg), CfStatus::Ok);
        assert_eq!(cf_fading_drop(cfg, 7, 0, &mut fading), CfStatus::Ok);
        let mut b = 0.0;
        assert_eq!(cf_fading_get(fading, 11, 2, &mut b), CfStatus::Ok);
        assert!(b > 0.0);
        assert_eq!(cf_fading_get(fading, 12, 0, &mut b), CfStatus::InvalidArgument);

        let mut e = CfEvaluation {
            sum_rate: 0.0,
            p_net: 0.0,
            omega: 0.0,
            ee: 0.0,
        };
        assert_eq!(cf_evaluate_plan(cfg, fading, 2.0, 4, &mut e), CfStatus::Ok);
        assert!(e.sum_rate > 0.0 && e.p_net > 0.0 && e.omega > 0.0);
        assert!((e.ee - 20e6 * e.sum_rate / (e.p_net + e.omega)).abs() <= 1e-9 * e.ee);
        cf_fading_free(fading);
        cf_config_free(cfg);
    }
}

#[test]
fn free_accepts_null() {
    unsafe {
        cf_config_free(ptr::null_mut());
        cf_model_free(ptr::null_mut());
        cf_fading_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(cf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_exports_every_entry_point() {
    let header = include_str!("../include/cellfree.h");
    for sym in [
        "cf_last_error",
        "cf_config_default",
        "cf_config_load",
        "cf_config_from_toml",
        "cf_config_free",
        "cf_model_new",
        "cf_ee_symmetric",
        "cf_grid_search",
        "cf_optimal_m_of",
        "cf_optimal_n",
        "cf_alternating_optimize",
        "cf_fading_drop",
        "cf_evaluate_plan",
        "CF_STATUS_NULL_POINTER",
        "typedef struct CfModel CfModel;",
    ] {
        assert!(header.contains(sym), "missing {sym}");
    }
}
