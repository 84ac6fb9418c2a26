use std::ffi::{CStr, CString};
use std::f64::consts::PI;
use std::ptr;

use poscomm_ffi::*;

fn last_error() -> String {
    let p = pc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn tanh(c: f64, a: f64) -> *mut PcFunction {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { pc_function_tanh(c, a, 0.0, 0.0, &mut f) }, PcStatus::Ok);
    f
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(pc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn kato_pair_spectrum_through_handles() {
    unsafe {
        let f = tanh(1.0, PI / 2.0);
        let g = tanh(1.0, 1.0);
        let mut grid = ptr::null_mut();
        assert_eq!(pc_grid_new(24.0, 512, &mut grid), PcStatus::Ok);
        let mut op = ptr::null_mut();
        assert_eq!(pc_operator_build(f, g, grid, PcRoute::NystromX, &mut op), PcStatus::Ok);
        let n = pc_operator_dim(op);
        assert_eq!(n, 512);

        let mut s = PcSpectrum::default();
        let mut ev = vec![0.0; n];
        assert_eq!(pc_operator_spectrum(op, 1e-6, &mut s, ev.as_mut_ptr(), n), PcStatus::Ok);
        assert_eq!(s.numerical_rank, 1);
        assert!(s.positive);
        assert!((s.max_eig - 2.0 / PI).abs() < 1e-4);
        assert_eq!(ev[0], s.max_eig);

        let (mut l, mut r, mut e) = (0.0, 0.0, 0.0);
        assert_eq!(pc_operator_trace_identity(op, &mut l, &mut r, &mut e), PcStatus::Ok);
        assert!((r - 2.0 / PI).abs() < 1e-12);
        assert!(e < 1e-4);

        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        assert_eq!(pc_operator_matrix(op, re.as_mut_ptr(), im.as_mut_ptr(), n * n - 1), PcStatus::BufferTooSmall);
        assert_eq!(pc_operator_matrix(op, re.as_mut_ptr(), im.as_mut_ptr(), n * n), PcStatus::Ok);
        let tr: f64 = (0..n).map(|i| re[i * n + i]).sum();
        assert!((tr - s.trace).abs() < 1e-10);
        for i in 0..n {
            for j in 0..i {
                assert!((re[i * n + j] - re[j * n + i]).abs() < 1e-12);
                assert!((im[i * n + j] + im[j * n + i]).abs() < 1e-12);
            }
        }

        pc_operator_free(op);
        pc_grid_free(grid);
        pc_function_free(f);
        pc_function_free(g);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut grid = ptr::null_mut();
        assert_eq!(pc_grid_new(10.0, 100, &mut grid), PcStatus::InvalidArgument);
        assert!(grid.is_null());
        assert!(last_error().contains("100"));

        assert_eq!(pc_grid_new(10.0, 64, ptr::null_mut()), PcStatus::NullPointer);
        assert!(last_error().contains("out_grid"));

        let f = tanh(1.0, 1.0);
        let (mut re, mut im) = (0.0, 0.0);
        let s = pc_function_eval_complex(f, 0.0, PI / 2.0, &mut re, &mut im);
        assert_eq!(s, PcStatus::Domain, "{}", last_error());

        let g = tanh(1.0, 1.0);
        let mut grid = ptr::null_mut();
        assert_eq!(pc_grid_new(24.0, 64, &mut grid), PcStatus::Ok);
        let mut op = ptr::null_mut();
        assert_eq!(pc_operator_build(f, g, grid, PcRoute::Direct, &mut op), PcStatus::Ok);
        let mut x = 0.0;
        assert_eq!(pc_operator_trace_identity(op, &mut x, &mut x, &mut x), PcStatus::Domain);
        pc_operator_free(op);
        pc_grid_free(grid);
        pc_function_free(f);
        pc_function_free(g);

        let mut f = ptr::null_mut();
        let bad = CString::new(r#"{"name": "tanh", "speed": 2}"#).unwrap();
        assert_eq!(pc_function_from_json(bad.as_ptr(), ptr::null(), &mut f), PcStatus::Config);
        assert!(last_error().contains("speed"));
    }
}

#[test]
fn function_evaluation_and_fit() {
    unsafe {
        let spec = CString::new(r#"{"name": "arctan", "scale": 2.0}"#).unwrap();
        let mut f = ptr::null_mut();
        assert_eq!(pc_function_from_json(spec.as_ptr(), ptr::null(), &mut f), PcStatus::Ok);
        let mut v = 0.0;
        assert_eq!(pc_function_eval(f, 2.0, &mut v), PcStatus::Ok);
        assert!((v - 1.0f64.atan()).abs() < 1e-15);
        assert_eq!(pc_function_derivative(f, 0.0, &mut v), PcStatus::Ok);
        assert!((v - 0.5).abs() < 1e-14);
        assert_eq!(pc_function_strip(f, &mut v), PcStatus::Ok);
        assert!((v - 2.0).abs() < 1e-15);
        pc_function_free(f);

        let locs = [-1.0, 1.0];
        let wts = [0.5, 0.5];
        let mut m = ptr::null_mut();
        assert_eq!(pc_function_tanh_measure(locs.as_ptr(), wts.as_ptr(), 2, 0.0, PI / 2.0, &mut m), PcStatus::Ok);
        let (mut min_im, mut pass) = (0.0, false);
        assert_eq!(pc_herglotz_check(m, PI / 2.0, 64, &mut min_im, &mut pass), PcStatus::Ok);
        assert!(pass, "{min_im}");
        assert_eq!(pc_averaged_quotient(m, 0.3, 1e-3, &mut v), PcStatus::Ok);
        let mut d = 0.0;
        pc_function_derivative(m, 0.3, &mut d);
        assert!((v - d).abs() < 1e-6);

        let ts: Vec<f64> = (0..481).map(|i| -12.0 + 0.05 * i as f64).collect();
        let vs: Vec<f64> = ts.iter().map(|&t| { let mut y = 0.0; pc_function_eval(m, t, &mut y); y }).collect();
        let atoms: Vec<f64> = (0..81).map(|i| -4.0 + 0.1 * i as f64).collect();
        let (mut fit, mut res, mut member) = (ptr::null_mut(), 0.0, false);
        let s = pc_fit_tanh_measure(ts.as_ptr(), vs.as_ptr(), ts.len(), PI / 2.0, atoms.as_ptr(), atoms.len(), &mut fit, &mut res, &mut member);
        assert_eq!(s, PcStatus::Ok, "{}", last_error());
        assert!(member && res < 1e-6, "{res}");
        let mut y = 0.0;
        pc_function_eval(fit, 0.7, &mut y);
        pc_function_eval(m, 0.7, &mut v);
        assert!((y - v).abs() < 1e-6);
        pc_function_free(fit);
        pc_function_free(m);
    }
}

#[test]
fn run_config_returns_report() {
    let cfg = CString::new(
        r#"{"schema": "poscomm.experiment/1", "kind": "rank3", "beta": 0.5, "grid": {"L": 24, "N": 256}}"#,
    )
    .unwrap();
    unsafe {
        let mut rep = ptr::null_mut();
        assert_eq!(pc_run_config(cfg.as_ptr(), ptr::null(), &mut rep), PcStatus::Ok, "{}", last_error());
        let text = CStr::from_ptr(rep).to_str().unwrap().to_owned();
        pc_string_free(rep);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verdict"], "pass");

        let bad = CString::new(r#"{"kind": "rank3"}"#).unwrap();
        let mut rep = ptr::null_mut();
        assert_eq!(pc_run_config(bad.as_ptr(), ptr::null(), &mut rep), PcStatus::Config);
        assert!(rep.is_null());
        assert!(last_error().contains("schema"));
    }
}

#[test]
fn free_accepts_null() {
    unsafe {
        pc_function_free(ptr::null_mut());
        pc_grid_free(ptr::null_mut());
        pc_operator_free(ptr::null_mut());
        pc_string_free(ptr::null_mut());
        assert_eq!(pc_operator_dim(ptr::null()), 0);
    }
}
