use std::ffi::CStr;
use std::ptr;

use behavior_metrics_ffi::*;

fn last_error() -> String {
    let p = bm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn subspace(cols: &[f64], rows: usize) -> *mut BmSubspace {
    let mut out = ptr::null_mut();
    let status = unsafe { bm_subspace_from_columns(cols.as_ptr(), rows, cols.len() / rows, -1.0, &mut out) };
    assert_eq!(status, BmStatus::Ok);
    out
}

fn sine(freq: f64, len: usize) -> Vec<f64> {
    (0..len).map(|t| (2.0 * std::f64::consts::PI * freq * t as f64).sin()).collect()
}

#[test]
fn line_and_plane() {
    let line = subspace(&[1.0, 0.0, 0.0], 3);
    let plane = subspace(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0], 3);
    unsafe {
        assert_eq!((bm_subspace_dim(line), bm_subspace_ambient_dim(line)), (1, 3));
        assert_eq!(bm_subspace_dim(plane), 2);

        let mut d = f64::NAN;
        assert_eq!(bm_distance(BmMetric::Chordal, line, plane, &mut d), BmStatus::Ok);
        assert_eq!(d, 1.0);
        assert_eq!(bm_premetric(BmMetric::Grassmann, line, plane, &mut d), BmStatus::Ok);
        assert_eq!(d, 0.0);
        assert_eq!(bm_distance(BmMetric::Grassmann, line, plane, &mut d), BmStatus::Ok);
        assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(bm_l_gap(line, plane, &mut d), BmStatus::Ok);
        assert_eq!(d, 1.0);

        let mut angles = [f64::NAN; 4];
        let mut len = 99;
        assert_eq!(bm_principal_angles(line, plane, angles.as_mut_ptr(), 4, &mut len), BmStatus::Ok);
        assert_eq!((len, angles[0]), (1, 0.0));

        let mut basis = [0.0; 6];
        assert_eq!(bm_subspace_basis(plane, basis.as_mut_ptr(), 6), BmStatus::Ok);
        let norms: Vec<f64> = basis.chunks(3).map(|c| c.iter().map(|x| x * x).sum::<f64>()).collect();
        assert!(norms.iter().all(|n| (n - 1.0).abs() < 1e-14));

        bm_subspace_free(line);
        bm_subspace_free(plane);
    }
}

#[test]
fn errors_set_status_and_message() {
    let a = subspace(&[1.0, 0.0], 2);
    let b = subspace(&[1.0, 0.0, 0.0], 3);
    unsafe {
        let mut d = 0.0;
        assert_eq!(bm_distance(BmMetric::Chordal, a, b, &mut d), BmStatus::DimensionMismatch);
        assert!(last_error().contains('2') && last_error().contains('3'));

        assert_eq!(bm_distance(BmMetric::Chordal, a, ptr::null(), &mut d), BmStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(bm_distance(BmMetric::Chordal, a, a, ptr::null_mut()), BmStatus::NullPointer);

        let mut small = [0.0; 1];
        let mut len = 0;
        assert_eq!(bm_principal_angles(a, a, small.as_mut_ptr(), 0, &mut len), BmStatus::BufferTooSmall);
        assert_eq!(len, 1);
        let mut basis = [0.0; 1];
        assert_eq!(bm_subspace_basis(b, basis.as_mut_ptr(), 2), BmStatus::BufferTooSmall);

        let nan = [f64::NAN, 1.0];
        let mut out = ptr::null_mut();
        assert_eq!(bm_subspace_from_columns(nan.as_ptr(), 2, 1, -1.0, &mut out), BmStatus::InvalidInput);
        assert!(out.is_null());
        assert_eq!(bm_subspace_from_columns(ptr::null(), 2, 1, -1.0, &mut out), BmStatus::NullPointer);

        let mut padded = ptr::null_mut();
        assert_eq!(bm_subspace_embed(a, 3, &mut padded), BmStatus::Ok);
        assert_eq!(bm_distance(BmMetric::Chordal, padded, b, &mut d), BmStatus::Ok);
        assert_eq!(d, 0.0);
        assert_eq!(bm_subspace_embed(b, 2, &mut out), BmStatus::InvalidInput);

        assert_eq!(bm_subspace_dim(ptr::null()), 0);
        bm_subspace_free(ptr::null_mut());
        for s in [a, b, padded] {
            bm_subspace_free(s);
        }
    }
}

#[test]
fn behaviors_from_data_and_kernels() {
    unsafe {
        let y = sine(0.2, 25);
        let mut b = ptr::null_mut();
        assert_eq!(bm_behavior_from_data(y.as_ptr(), 25, 1, 10, -1.0, &mut b), BmStatus::Ok);
        assert_eq!(bm_behavior_dim(b), 2);
        let mut c = 0.0;
        assert_eq!(bm_behavior_complexity(b, &mut c), BmStatus::Ok);
        assert!((c - 0.2).abs() < 1e-15);

        let mut misfit = f64::NAN;
        let mut utility = f64::NAN;
        assert_eq!(bm_misfit(y.as_ptr(), 25, 1, b, BmMetric::Chordal, &mut misfit), BmStatus::Ok);
        assert_eq!(bm_utility(y.as_ptr(), 25, 1, b, BmMetric::Chordal, &mut utility), BmStatus::Ok);
        assert!(misfit.abs() < 1e-20 && utility.abs() < 1e-20);

        // [z² − 1.5z + 0.7, −1], blocks R_0, R_1, R_2
        let coeffs = [0.7, -1.0, -1.5, 0.0, 1.0, 0.0];
        let (mut m, mut lag, mut n) = (0, 0, 0);
        assert_eq!(bm_kernel_invariants(coeffs.as_ptr(), 1, 2, 2, &mut m, &mut lag, &mut n), BmStatus::Ok);
        assert_eq!((m, lag, n), (1, 2, 2));
        let mut k = ptr::null_mut();
        assert_eq!(bm_behavior_from_kernel(coeffs.as_ptr(), 1, 2, 2, 5, &mut k), BmStatus::Ok);
        assert_eq!(bm_behavior_dim(k), 7);

        let mut s = ptr::null_mut();
        assert_eq!(bm_behavior_subspace(k, &mut s), BmStatus::Ok);
        assert_eq!(bm_subspace_ambient_dim(s), 10);

        // zero leading coefficient is not a valid kernel
        let bad = [1.0, 0.0];
        assert_eq!(bm_behavior_from_kernel(bad.as_ptr(), 1, 1, 1, 3, &mut k), BmStatus::InvalidInput);
        assert!(!last_error().is_empty());

        // horizon longer than the data
        let mut none = ptr::null_mut();
        let status = bm_behavior_from_data(y.as_ptr(), 5, 1, 10, -1.0, &mut none);
        assert_ne!(status, BmStatus::Ok);
        assert!(none.is_null());

        bm_subspace_free(s);
        bm_behavior_free(k);
        bm_behavior_free(b);
        bm_behavior_free(ptr::null_mut());
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(bm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn errors_are_per_thread() {
    let a = subspace(&[1.0, 0.0], 2);
    let mut d = 0.0;
    assert_eq!(unsafe { bm_l_gap(a, ptr::null(), &mut d) }, BmStatus::NullPointer);
    let other = std::thread::spawn(|| bm_last_error().is_null()).join().unwrap();
    assert!(other);
    assert!(last_error().contains("null"));
    unsafe { bm_subspace_free(a) };
}
