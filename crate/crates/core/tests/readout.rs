mod common;

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use spinor_qcrb::fock3::{
    analytic_output_state, fock_occupations, optimal_prepared_state, BeamSplitter, PairState, PreparationMethod,
};
use spinor_qcrb::random::{pair_state, rng};
use spinor_qcrb::readout::{
    analytic_coefficients, analytic_expectations, analytic_final_state, expectation_and_std, fft_estimate, final_state,
    find_peaks, signal_sweep, term_comparison, Observable, SignalSeries, Spectrum, SpectrumOptions, TimeGrid,
    DEFAULT_PEAK_THRESHOLD, TERM_NAMES,
};
use spinor_qcrb::C64;

/// Whole interferometer as one dense matrix product.
fn dense_final(prepared: &PairState, p: f64, q: f64, t: f64) -> Vec<C64> {
    let n = prepared.atoms();
    let input = spinor_qcrb::fock3::embed_pair_state(prepared);
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        input.amplitudes().len(),
        fock_occupations(n).iter().map(|o| {
            let (n1, nm) = (o[0] as f64, o[2] as f64);
            C64::from_polar(1.0, -t * (p * (n1 - nm) + q * (n1 + nm)))
        }),
    ));
    let u = common::dense_pulse(n, BeamSplitter::MinusZero, FRAC_PI_4)
        * common::dense_pulse(n, BeamSplitter::PlusZero, FRAC_PI_4)
        * phases
        * common::dense_pulse(n, BeamSplitter::PlusMinus, FRAC_PI_4);
    common::apply_dense(&u, &input)
}

fn dense_expectation(atoms: usize, amps: &[C64], observable: Observable) -> f64 {
    fock_occupations(atoms)
        .iter()
        .zip(amps)
        .map(|(o, a)| {
            let d = match observable {
                Observable::SqP0 => o[0] as f64 - o[1] as f64,
                Observable::SqM0 => o[2] as f64 - o[1] as f64,
            };
            a.norm_sqr() * d * d
        })
        .sum()
}

fn prepared(atoms: usize) -> PairState {
    optimal_prepared_state(PreparationMethod::Smd, atoms, &PreparationMethod::Smd.default_grid())
        .unwrap()
        .state
}

#[test]
fn signals_match_dense_evaluation() {
    let mut r = rng(17);
    let mut count = 0;
    for atoms in [2usize, 4, 6, 8, 10] {
        for &(p, q) in &[(1.0, 0.2), (3.0, 1.1), (-0.7, 0.4), (2.2, -1.5)] {
            let s = pair_state(atoms, &mut r).unwrap();
            let t = 0.37 * count as f64 + 0.1;
            let f = final_state(&s, p, q, t).unwrap();
            let d = dense_final(&s, p, q, t);
            assert!(common::overlap(f.amplitudes(), &d) > 1.0 - 1e-10);
            for obs in [Observable::SqP0, Observable::SqM0] {
                let ours = expectation_and_std(&f, obs).0;
                let oracle = dense_expectation(atoms, &d, obs);
                assert!((ours - oracle).abs() < 1e-9 * (1.0 + oracle), "N={atoms} {obs:?}");
            }
            count += 1;
        }
    }
    assert_eq!(count, 20);
}

#[test]
fn final_state_from_closed_form_output() {
    let mut r = rng(18);
    for atoms in [2usize, 4, 6, 8] {
        let s = pair_state(atoms, &mut r).unwrap();
        let (p, q, t) = (1.3, 0.45, 0.8);
        let a = analytic_final_state(&s, p, q, t).unwrap();
        let d = dense_final(&s, p, q, t);
        assert!(common::overlap(a.amplitudes(), &d) > 1.0 - 1e-10);
        let out = analytic_output_state(&s, p, q, t);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn closed_form_expectations_track_simulation() {
    let s = prepared(12);
    for i in 0..40 {
        let t = 0.05 * i as f64;
        let f = final_state(&s, 2.0, 0.5, t).unwrap();
        let (a_p0, a_m0) = analytic_expectations(&s, 2.0, 0.5, t);
        assert!((a_p0 - expectation_and_std(&f, Observable::SqP0).0).abs() < 1e-8);
        assert!((a_m0 - expectation_and_std(&f, Observable::SqM0).0).abs() < 1e-8);
    }
}

#[test]
fn term_fit_reproduces_closed_form() {
    let mut r = rng(19);
    let (p, q) = (3.0, 0.7);
    let grid = TimeGrid::new(0.0, PI / (8.0 * p), 512).unwrap();
    for atoms in [2usize, 6, 10, 14] {
        let s = pair_state(atoms, &mut r).unwrap();
        assert!(analytic_coefficients(&s).c2.im.abs() > 1e-3);
        let pair = signal_sweep(&s, p, q, &grid, p).unwrap();
        for series in [&pair.sq_p0, &pair.sq_m0] {
            let cmp = term_comparison(series, &s, p, q).unwrap();
            assert!(cmp.fit_residual < 1e-8, "{cmp:?}");
            assert!(cmp.max_discrepancy < 1e-8, "{cmp:?} {TERM_NAMES:?}");
        }
    }
}

#[test]
fn basis_state_constants() {
    // Twin pairs |k> give sq_m0 constants (N + 2Nk - 3k^2)/2.
    for atoms in [6usize, 12] {
        for k in 0..=atoms / 2 {
            let s = PairState::basis(atoms, k).unwrap();
            let c = analytic_coefficients(&s);
            let (n, kf) = (atoms as f64, k as f64);
            assert!((c.c02 - 0.5 * (n + 2.0 * n * kf - 3.0 * kf * kf)).abs() < 1e-12);
            assert!(c.c2.norm() == 0.0);
        }
    }
}

#[test]
fn fft_round_trip_over_parameter_grid() {
    let s = prepared(20);
    for p in [5.0, 10.0, 20.0] {
        for q in [0.5, 1.0, 2.0] {
            let grid = TimeGrid::default_for(p).unwrap();
            let pair = signal_sweep(&s, p, q, &grid, p).unwrap();
            let est = fft_estimate(&pair, SpectrumOptions::default()).unwrap();
            let bin = est.resolution;
            assert!((est.p_hat - p).abs() <= bin, "p={p} q={q}: {est:?}");
            assert!((est.q_hat - q).abs() <= bin, "p={p} q={q}: {est:?}");
            assert!(!est.flags.any(), "p={p} q={q}: {:?}", est.flags);
        }
    }
}

#[test]
fn estimates_scale_with_the_fields() {
    let s = prepared(20);
    let run = |p: f64, q: f64| {
        let grid = TimeGrid::default_for(p).unwrap();
        fft_estimate(&signal_sweep(&s, p, q, &grid, p).unwrap(), SpectrumOptions::default()).unwrap()
    };
    let base = run(10.0, 1.0);
    let scaled = run(20.0, 2.0);
    // Scaling both fields and shrinking the step by the same factor maps bins onto bins.
    assert!((scaled.p_hat - 2.0 * base.p_hat).abs() < 1e-9 * scaled.p_hat);
    assert!((scaled.q_hat - 2.0 * base.q_hat).abs() < 1e-9 * scaled.p_hat);
}

#[test]
fn zero_quadratic_shift_is_flagged() {
    let s = prepared(20);
    let grid = TimeGrid::default_for(10.0).unwrap();
    let pair = signal_sweep(&s, 10.0, 0.0, &grid, 10.0).unwrap();
    match fft_estimate(&pair, SpectrumOptions::default()) {
        Ok(est) => assert!(est.flags.degenerate || est.flags.out_of_regime, "{est:?}"),
        Err(e) => assert!(e.to_string().contains("line"), "{e}"),
    }
}

#[test]
fn coarse_grid_flags_nyquist() {
    let s = prepared(10);
    let grid = TimeGrid::new(0.0, PI / (2.0 * 10.0), 512).unwrap();
    let pair = signal_sweep(&s, 10.0, 1.0, &grid, 10.0).unwrap();
    assert!(pair.sq_p0.nyquist_violation && pair.sq_m0.nyquist_violation);
    if let Ok(est) = fft_estimate(&pair, SpectrumOptions::default()) {
        assert!(est.flags.nyquist_violation);
    }
}

#[test]
fn sq_m0_has_no_sum_frequency_line() {
    let s = prepared(20);
    let (p, q) = (10.0, 1.0);
    let grid = TimeGrid::default_for(p).unwrap();
    let pair = signal_sweep(&s, p, q, &grid, p).unwrap();
    let spec = Spectrum::compute(&pair.sq_m0, SpectrumOptions::default());
    let top = spec.magnitudes.iter().cloned().fold(0.0, f64::max);
    let target = 2.0 * p + 2.0 * q;
    let near = spec
        .frequencies
        .iter()
        .zip(&spec.magnitudes)
        .filter(|(f, _)| (*f - target).abs() <= 2.0 * spec.resolution)
        .map(|(_, m)| *m)
        .fold(0.0, f64::max);
    assert!(near < 0.01 * top, "{near} vs {top}");
    // The sq_p0 series does carry it.
    let peaks = find_peaks(
        &Spectrum::compute(&pair.sq_p0, SpectrumOptions::default()),
        DEFAULT_PEAK_THRESHOLD,
    );
    assert!(peaks
        .iter()
        .any(|pk| (pk.frequency - target).abs() <= 2.0 * spec.resolution));
}

#[test]
fn hann_window_still_locates_lines() {
    let s = prepared(20);
    let grid = TimeGrid::default_for(10.0).unwrap();
    let pair = signal_sweep(&s, 10.0, 1.0, &grid, 10.0).unwrap();
    let est = fft_estimate(&pair, SpectrumOptions { hann: true }).unwrap();
    assert!((est.p_hat - 10.0).abs() <= est.resolution);
    assert!((est.q_hat - 1.0).abs() <= est.resolution);
}

#[test]
fn short_series_rejected() {
    let s = prepared(10);
    let grid = TimeGrid::new(0.0, 0.01, 64).unwrap();
    let pair = signal_sweep(&s, 10.0, 1.0, &grid, 10.0).unwrap();
    assert!(fft_estimate(&pair, SpectrumOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_holds(values in proptest::collection::vec(0.0f64..50.0, 256..600)) {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let energy: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let times = (0..n).map(|i| 0.01 * i as f64).collect();
        let series = SignalSeries::new(Observable::SqP0, times, values).unwrap();
        let spec = Spectrum::compute(&series, SpectrumOptions::default());
        prop_assert!((spec.energy() - energy).abs() <= 1e-9 * (1.0 + energy));
    }

    #[test]
    fn expectations_are_bounded(half in 1usize..6, seed in any::<u64>(), p in -3.0f64..3.0, q in -3.0f64..3.0, t in 0.0f64..5.0) {
        let atoms = 2 * half;
        let mut r = rng(seed);
        let s = pair_state(atoms, &mut r).unwrap();
        let f = final_state(&s, p, q, t).unwrap();
        prop_assert!((f.norm_sqr() - 1.0).abs() < 1e-10);
        for obs in [Observable::SqP0, Observable::SqM0] {
            let (mean, std) = expectation_and_std(&f, obs);
            prop_assert!(mean >= -1e-12 && mean <= (atoms * atoms) as f64 + 1e-9);
            prop_assert!(std >= 0.0);
        }
    }
}
