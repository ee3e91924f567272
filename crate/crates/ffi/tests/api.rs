use std::ffi::{CStr, CString};
use std::ptr;

use bubblestab_ffi::*;

fn last_error() -> String {
    let p = bs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn disk_round_trip() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(bs_domain_disk(1.0, &mut d), BsStatus::Ok);
        assert!(bs_last_error_message().is_null());
        let mut g = BsGeometry::default();
        assert_eq!(bs_domain_geometry(d, &mut g), BsStatus::Ok);
        assert!((g.area - std::f64::consts::PI).abs() < 1e-6);
        assert!((g.h0 - 1.0).abs() < 1e-6);

        let mut f = ptr::null_mut();
        assert_eq!(bs_solve(d, 16, 64, &mut f), BsStatus::Ok);
        let (mut u, mut grad) = (0.0, [0.0; 2]);
        assert_eq!(bs_field_evaluate(f, 0.3, 0.4, &mut u, grad.as_mut_ptr()), BsStatus::Ok);
        assert!((u - (0.25 - 1.0) / 2.0).abs() < 1e-5);
        assert!((grad[0] - 0.3).abs() < 1e-3 && (grad[1] - 0.4).abs() < 1e-3);

        let mut err = 0.0;
        assert_eq!(bs_field_nodal_error(f, &mut err), BsStatus::Ok);
        assert!(err < 1e-4);
        let mut m = 0.0;
        assert_eq!(bs_field_max_gradient(f, &mut m), BsStatus::Ok);
        assert!((m - 1.0).abs() < 1e-2);

        let mut n = 0usize;
        assert_eq!(bs_field_min_point_count(f, &mut n), BsStatus::Ok);
        assert_eq!(n, 1);
        let mut xy = [1.0; 2];
        assert_eq!(bs_field_min_point(f, 0, xy.as_mut_ptr()), BsStatus::Ok);
        assert!(xy[0].hypot(xy[1]) < 1e-3);
        assert_eq!(bs_field_min_point(f, 5, xy.as_mut_ptr()), BsStatus::InvalidArgument);

        let mut r = BsIdentityResult::default();
        assert_eq!(bs_field_identity(f, BsIdentity::Sbt as i32, &mut r), BsStatus::Ok);
        assert_eq!(r.applicable, 1);
        assert!(r.residual_rel < 1e-3);
        assert_eq!(bs_field_identity(f, 99, &mut r), BsStatus::InvalidArgument);
        assert!(last_error().contains("99"));

        bs_field_free(f);
        bs_domain_free(d);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(bs_domain_ellipse(-1.0, 1.0, &mut d), BsStatus::InvalidDomain);
        assert!(d.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(bs_domain_disk(1.0, ptr::null_mut()), BsStatus::NullPointer);
        assert!(last_error().contains("out"));
        let mut g = BsGeometry::default();
        assert_eq!(bs_domain_geometry(ptr::null(), &mut g), BsStatus::NullPointer);

        let coeffs = [0.1];
        assert_eq!(bs_domain_fourier(1.0, coeffs.as_ptr(), 1, ptr::null(), 0, 0.0, 0.0, &mut d), BsStatus::Ok);
        let mut f = ptr::null_mut();
        assert_eq!(bs_solve(d, 8, 32, &mut f), BsStatus::Ok);
        let mut u = 0.0;
        assert_eq!(bs_field_evaluate(f, 3.0, 0.0, &mut u, ptr::null_mut()), BsStatus::PointOutside);
        let mut err = 0.0;
        assert_eq!(bs_field_nodal_error(f, &mut err), BsStatus::NotAvailable);
        bs_field_free(f);
        bs_domain_free(d);

        assert_eq!(bs_domain_fourier(1.0, ptr::null(), 2, ptr::null(), 0, 0.0, 0.0, &mut d), BsStatus::NullPointer);
        bs_domain_free(ptr::null_mut());
        bs_field_free(ptr::null_mut());
        bs_string_free(ptr::null_mut());
    }
}

#[test]
fn f_sup_flags_planar_discrepancy() {
    unsafe {
        let (mut v, mut flag) = (0.0, -1);
        assert_eq!(bs_f_sup(3, 1, &mut v, &mut flag), BsStatus::Ok);
        assert!((v - 1.5).abs() < 1e-6);
        assert_eq!(flag, 0);
        assert_eq!(bs_f_sup(2, 1, &mut v, &mut flag), BsStatus::Ok);
        assert_eq!(flag, 1);
        assert_eq!(bs_f_sup(1, 1, &mut v, ptr::null_mut()), BsStatus::InvalidArgument);
    }
}

#[test]
fn analysis_json_parses() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(bs_domain_perturbed_disk(0.05, 3, &mut d), BsStatus::Ok);
        let id = CString::new("p3").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(bs_analyze_json(d, id.as_ptr(), 8, 32, &mut s), BsStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        bs_string_free(s);
        bs_domain_free(d);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["domain_id"], "p3");
        assert_eq!(v["n_radial"], 8);
        assert!(v["stability"].as_array().unwrap().len() >= 5);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(bs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
