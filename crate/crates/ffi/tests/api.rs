use std::ffi::CStr;
use std::ptr;

use spinor_qcrb_ffi::*;

fn last_error() -> String {
    let p = sq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(sq_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn uniform_bound_matches_closed_form() {
    let mut b = SqBound::default();
    assert_eq!(
        unsafe { sq_uniform_bound(1, 100, SQ_ENSEMBLE_PRODUCT, &mut b) },
        SqStatus::Ok
    );
    // F = 1: Var(m) = 2/3, Var(m^2) = 2/9.
    assert!((b.delta_p - 1.0 / (2.0 * (100.0f64 * 2.0 / 3.0).sqrt())).abs() < 1e-14);
    assert!((b.delta_q - 1.0 / (2.0 * (100.0f64 * 2.0 / 9.0).sqrt())).abs() < 1e-14);
    let mut g = SqBound::default();
    assert_eq!(
        unsafe { sq_uniform_bound(1, 100, SQ_ENSEMBLE_GHZ, &mut g) },
        SqStatus::Ok
    );
    assert!((g.delta_p * 10.0 - b.delta_p).abs() < 1e-14);
}

#[test]
fn argument_errors_have_codes_and_messages() {
    let mut b = SqBound::default();
    assert_eq!(
        unsafe { sq_uniform_bound(0, 10, SQ_ENSEMBLE_PRODUCT, &mut b) },
        SqStatus::Domain
    );
    assert!(last_error().contains("spin"), "{}", last_error());
    assert_eq!(unsafe { sq_uniform_bound(1, 10, 7, &mut b) }, SqStatus::InvalidArgument);
    assert!(last_error().contains("ensemble"));
    assert_eq!(
        unsafe { sq_uniform_bound(1, 10, SQ_ENSEMBLE_PRODUCT, ptr::null_mut()) },
        SqStatus::NullPointer
    );
    assert_eq!(
        unsafe { sq_coherent_bound(1, 10, SQ_ENSEMBLE_PRODUCT, 4.0, &mut b) },
        SqStatus::Domain
    );
}

#[test]
fn coherent_bound_at_pole_is_unresolved() {
    let mut b = SqBound::default();
    let status = unsafe { sq_coherent_bound(2, 10, SQ_ENSEMBLE_PRODUCT, 0.0, &mut b) };
    assert!(status != SqStatus::Ok || !b.delta_p.is_finite());
}

#[test]
fn optimization_handle_round_trip() {
    let mut h = ptr::null_mut();
    let status = unsafe { sq_optimize(3, 1, SQ_ENSEMBLE_PRODUCT, SQ_FAMILY_THREE_AMPLITUDE, &mut h) };
    assert_eq!(status, SqStatus::Ok);
    assert!(!h.is_null());
    let mut n = 0usize;
    unsafe {
        assert_eq!(sq_optimization_populations(h, ptr::null_mut(), 0, &mut n), SqStatus::Ok);
        assert_eq!(n, 7);
        let mut small = [0.0; 3];
        assert_eq!(
            sq_optimization_populations(h, small.as_mut_ptr(), 3, &mut n),
            SqStatus::BufferTooSmall
        );
        let mut pops = vec![0.0; n];
        assert_eq!(
            sq_optimization_populations(h, pops.as_mut_ptr(), n, &mut n),
            SqStatus::Ok
        );
        assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut b = SqBound::default();
        assert_eq!(sq_optimization_bound(h, &mut b), SqStatus::Ok);
        let ratio = b.delta_q / b.delta_p;
        assert!((ratio - 1.0 / (3.0 * pops[3].sqrt())).abs() < 1e-9);
        sq_optimization_free(h);
        sq_optimization_free(ptr::null_mut());
    }
}

#[test]
fn optimize_rejects_unknown_family() {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { sq_optimize(1, 1, SQ_ENSEMBLE_PRODUCT, 9, &mut h) },
        SqStatus::InvalidArgument
    );
    assert!(h.is_null());
}

#[test]
fn pair_state_from_amplitudes() {
    let re = [1.0 / 3f64.sqrt(), (2.0f64 / 3.0).sqrt()];
    let im = [0.0, 0.0];
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(sq_pair_state_new(2, re.as_ptr(), im.as_ptr(), 2, &mut h), SqStatus::Ok);
        let mut control = 0.0;
        assert_eq!(sq_pair_state_control(h, &mut control), SqStatus::Ok);
        assert!(control.is_nan());
        let mut b = SqBound::default();
        assert_eq!(sq_pair_state_bound(h, &mut b), SqStatus::Ok);
        // F_pp = 16 w, F_qq = 16 w (1 - w), no cross term for real two-level states.
        assert!((b.delta_p - 1.0 / (16.0f64 * 2.0 / 3.0).sqrt()).abs() < 1e-12);
        assert!((b.delta_q - 1.0 / (16.0f64 * 2.0 / 9.0).sqrt()).abs() < 1e-12);
        sq_pair_state_free(h);
        let bad = [1.0, 1.0];
        assert_eq!(
            sq_pair_state_new(2, bad.as_ptr(), im.as_ptr(), 2, &mut h),
            SqStatus::Validation
        );
        assert!(h.is_null());
        assert_eq!(
            sq_pair_state_new(3, re.as_ptr(), im.as_ptr(), 2, &mut h),
            SqStatus::Domain
        );
        assert_eq!(
            sq_pair_state_new(2, ptr::null(), im.as_ptr(), 2, &mut h),
            SqStatus::NullPointer
        );
    }
}

#[test]
fn prepared_state_signals_and_estimate() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(sq_prepare(20, SQ_METHOD_SMD, &mut h), SqStatus::Ok);
        let mut n = 0usize;
        assert_eq!(
            sq_pair_state_alphas(h, ptr::null_mut(), ptr::null_mut(), 0, &mut n),
            SqStatus::Ok
        );
        assert_eq!(n, 11);
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(
            sq_pair_state_alphas(h, re.as_mut_ptr(), im.as_mut_ptr(), n, &mut n),
            SqStatus::Ok
        );
        let norm: f64 = re.iter().zip(&im).map(|(a, b)| a * a + b * b).sum();
        assert!((norm - 1.0).abs() < 1e-12);

        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(sq_signal(h, 10.0, 1.0, 0.3, &mut a, &mut b), SqStatus::Ok);
        assert!(a >= 0.0 && b >= 0.0 && a <= 400.0 && b <= 400.0);

        let mut est = SqEstimate::default();
        assert_eq!(sq_estimate(h, 10.0, 1.0, 0.0, 1024, false, &mut est), SqStatus::Ok);
        assert!((est.p_hat - 10.0).abs() <= est.resolution);
        assert!((est.q_hat - 1.0).abs() <= est.resolution);
        assert_eq!(est.flags, 0);

        assert_eq!(sq_estimate(h, 10.0, 1.0, 0.0, 16, false, &mut est), SqStatus::Domain);
        sq_pair_state_free(h);
    }
}

#[test]
fn prepare_rejects_odd_atom_numbers() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sq_prepare(7, SQ_METHOD_QPT, &mut h) }, SqStatus::Domain);
    assert!(last_error().contains("even"), "{}", last_error());
    assert_eq!(unsafe { sq_prepare(8, 5, &mut h) }, SqStatus::InvalidArgument);
}

#[test]
fn errors_are_per_thread() {
    let mut b = SqBound::default();
    assert_eq!(
        unsafe { sq_uniform_bound(0, 1, SQ_ENSEMBLE_PRODUCT, &mut b) },
        SqStatus::Domain
    );
    std::thread::spawn(|| assert!(sq_last_error_message().is_null()))
        .join()
        .unwrap();
    assert!(!last_error().is_empty());
}
