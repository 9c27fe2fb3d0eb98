mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use proptest::prelude::*;
use spinor_qcrb::fock3::{
    analytic_output_state, apply_beam_splitter, apply_phase_evolution, embed_pair_state, evolve_smd, fock_dimension,
    ground_state_and_gap, optimal_prepared_state, pair_qcrb, project_pair_state, qpt_hamiltonian, qpt_sweep,
    smd_hamiltonian, BeamSplitter, ControlGrid, Fock3State, PairState, PreparationMethod, Pulse,
};
use spinor_qcrb::qfim::{brute_force_qfim, qcrb_simultaneous};
use spinor_qcrb::random::{pair_state, rng, unit_vector};
use spinor_qcrb::spin::SpinConfig;
use spinor_qcrb::C64;

const KINDS: [BeamSplitter; 3] = [BeamSplitter::PlusMinus, BeamSplitter::PlusZero, BeamSplitter::MinusZero];

#[test]
fn pulses_match_dense_matrix_exponential() {
    for atoms in [1usize, 2, 3, 5, 8] {
        for which in KINDS {
            for angle in [FRAC_PI_4, 0.37, -1.9] {
                let ours = Pulse::new(atoms, which, angle).unwrap().dense();
                let oracle = common::dense_pulse(atoms, which, angle);
                let diff = (ours - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(diff < 1e-11, "N={atoms} {which:?} angle={angle}: {diff:e}");
            }
        }
    }
}

#[test]
fn pm_quarter_pulse_on_single_pairs() {
    let s = embed_pair_state(&PairState::basis(4, 1).unwrap());
    let out = apply_beam_splitter(&s, BeamSplitter::PlusMinus, FRAC_PI_4).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((out.amplitude(2, 2, 0) - C64::new(h, 0.0)).norm() < 1e-12);
    assert!((out.amplitude(0, 2, 2) + C64::new(h, 0.0)).norm() < 1e-12);
    assert!(out.amplitude(1, 2, 1).norm() < 1e-12);
}

#[test]
fn pm_half_angle_swaps_side_modes() {
    let mut r = rng(21);
    let atoms = 6;
    let s = Fock3State::new(atoms, unit_vector(fock_dimension(atoms), &mut r)).unwrap();
    let out = apply_beam_splitter(&s, BeamSplitter::PlusMinus, FRAC_PI_2).unwrap();
    for n1 in 0..=atoms {
        for nm in 0..=atoms - n1 {
            let n0 = atoms - n1 - nm;
            assert!((out.amplitude(nm, n0, n1).norm() - s.amplitude(n1, n0, nm).norm()).abs() < 1e-12);
        }
    }
}

#[test]
fn embedding_and_projection() {
    let mut r = rng(3);
    for atoms in [2usize, 4, 10] {
        let s = pair_state(atoms, &mut r).unwrap();
        let f = embed_pair_state(&s);
        assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
        let back = project_pair_state(&f).unwrap();
        assert!((back.overlap(&s) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn phase_imprinting_basics() {
    let s = Fock3State::basis(2, 1, 0, 1).unwrap();
    let out = apply_phase_evolution(&s, 0.4, 1.0, 1.0);
    assert!((out.amplitude(1, 0, 1) - C64::from_polar(1.0, -2.0)).norm() < 1e-15);
    let mut r = rng(4);
    let s = Fock3State::new(5, unit_vector(fock_dimension(5), &mut r)).unwrap();
    assert_eq!(apply_phase_evolution(&s, 0.0, 0.0, 3.0), s);
}

#[test]
fn polar_state_passes_through() {
    let polar = PairState::polar(8).unwrap();
    let out = analytic_output_state(&polar, 1.1, 0.3, 2.0);
    assert!((out.inner(&embed_pair_state(&polar)).norm() - 1.0).abs() < 1e-14);
}

#[test]
fn smd_matches_two_level_solution_on_grid() {
    for i in 0..100 {
        let t = 0.031 * i as f64;
        let s = evolve_smd(2, 1.0, t).unwrap();
        let w = (2f64.sqrt() * t).sin().powi(2);
        assert!((s.populations()[1] - w).abs() < 1e-10);
        assert!((s.populations().iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
    let s0 = evolve_smd(12, 1.0, 0.0).unwrap();
    assert_eq!(s0.populations()[0], 1.0);
}

#[test]
fn smd_hamiltonian_is_symmetric_with_mirrored_spectrum() {
    let h = smd_hamiltonian(40, 1.3).unwrap();
    let d = h.dense();
    assert_eq!(d, d.transpose());
    let e = h.eigenvalues().unwrap();
    let top = e[e.len() - 1];
    for (a, b) in e.iter().zip(e.iter().rev()) {
        assert!((a + b).abs() < 1e-10 * top);
    }
}

#[test]
fn qpt_gap_minimum_between_phase_boundaries() {
    let eps: Vec<f64> = (0..=800).map(|i| -4.0 + 0.01 * i as f64).collect();
    for atoms in [10usize, 20, 40] {
        let sweep = qpt_sweep(atoms, -1.0, &eps).unwrap();
        let (i_min, _) = sweep
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.gap.total_cmp(&b.1.gap))
            .unwrap();
        assert!(
            eps[i_min] > -2.0 && eps[i_min] < 2.0,
            "N={atoms}: gap minimum at {}",
            eps[i_min]
        );
        assert!(sweep.iter().all(|g| g.gap >= 0.0));
        // Adjacent ground states stay close away from the gap minimum.
        for (i, w) in sweep.windows(2).enumerate() {
            if (eps[i] - eps[i_min]).abs() > 0.5 {
                assert!(w[0].state.overlap(&w[1].state) >= 0.99, "N={atoms} eps={}", eps[i]);
            }
        }
    }
}

#[test]
fn qpt_hamiltonian_is_symmetric() {
    let h = qpt_hamiltonian(16, -1.0, 0.7).unwrap();
    assert_eq!(h.dense(), h.dense().transpose());
    assert_eq!(h.dim(), 9);
}

#[test]
fn ground_state_dominates_in_extreme_phases() {
    let g = ground_state_and_gap(&qpt_hamiltonian(30, -1.0, 10.0).unwrap()).unwrap();
    assert!(g.state.populations()[0] >= 0.99);
    assert!(!g.degenerate);
    let g = ground_state_and_gap(&qpt_hamiltonian(30, -1.0, -10.0).unwrap()).unwrap();
    assert!(g.state.populations()[15] >= 0.99);
}

#[test]
fn pair_bounds_match_brute_force_pipeline() {
    let mut r = rng(5);
    for atoms in [2usize, 4, 6] {
        let config = SpinConfig::new(1, atoms as u32).unwrap();
        for _ in 0..5 {
            let s = pair_state(atoms, &mut r).unwrap();
            let out = apply_beam_splitter(&embed_pair_state(&s), BeamSplitter::PlusMinus, FRAC_PI_4).unwrap();
            let tensor = common::symmetric_tensor_state(&out);
            let norm: f64 = tensor.iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            let b = qcrb_simultaneous(&brute_force_qfim(&tensor, &config).unwrap(), 1).unwrap();
            let c = pair_qcrb(&s);
            assert!((b.delta_p - c.delta_p).abs() < 1e-8);
            assert!((b.delta_q - c.delta_q).abs() < 1e-8);
        }
    }
}

#[test]
fn smd_two_atom_optimum_is_the_two_level_state() {
    let r = optimal_prepared_state(PreparationMethod::Smd, 2, &PreparationMethod::Smd.default_grid()).unwrap();
    let w = (2f64.sqrt() * r.control).sin().powi(2);
    assert!((r.state.populations()[1] - w).abs() < 1e-10);
    let best_w = (1..100_000)
        .map(|i| i as f64 / 100_000.0)
        .min_by(|&a, &b| two_level_sum(a).total_cmp(&two_level_sum(b)))
        .unwrap();
    assert!((w - best_w).abs() < 1e-4, "{w} vs {best_w}");
    assert!((r.bound.sum_variance() - two_level_sum(best_w)).abs() < 1e-9);
}

fn two_level_sum(w: f64) -> f64 {
    let s = PairState::new(2, vec![C64::new((1.0 - w).sqrt(), 0.0), C64::new(w.sqrt(), 0.0)]).unwrap();
    pair_qcrb(&s).sum_variance()
}

#[test]
fn control_grid_guards() {
    let empty = ControlGrid {
        lo: 0.0,
        hi: 1.0,
        points: 0,
    };
    assert!(optimal_prepared_state(PreparationMethod::Qpt, 10, &empty).is_err());
    let negative = ControlGrid {
        lo: -1.0,
        hi: 1.0,
        points: 10,
    };
    assert!(optimal_prepared_state(PreparationMethod::Smd, 10, &negative).is_err());
    assert!(optimal_prepared_state(PreparationMethod::Smd, 7, &PreparationMethod::Smd.default_grid()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pulses_preserve_norm_and_number(atoms in 1usize..12, kind in 0usize..3, angle in -6.3f64..6.3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = Fock3State::new(atoms, unit_vector(fock_dimension(atoms), &mut r)).unwrap();
        let out = apply_beam_splitter(&s, KINDS[kind], angle).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        let total: f64 = out.mean_occupations().iter().sum();
        prop_assert!((total - atoms as f64).abs() < 1e-10 * atoms as f64);
    }

    #[test]
    fn pulse_preserves_spectator_population(atoms in 1usize..10, kind in 0usize..3, angle in -3.2f64..3.2, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = Fock3State::new(atoms, unit_vector(fock_dimension(atoms), &mut r)).unwrap();
        let out = apply_beam_splitter(&s, KINDS[kind], angle).unwrap();
        let spectator = [1usize, 2, 0][kind];
        let before = s.mean_occupations()[spectator];
        let after = out.mean_occupations()[spectator];
        prop_assert!((before - after).abs() < 1e-10 * atoms as f64);
    }

    #[test]
    fn analytic_output_matches_simulation(half in 1usize..5, seed in any::<u64>(), p in -5.0f64..5.0, q in -5.0f64..5.0, t in 0.0f64..4.0) {
        let mut r = rng(seed);
        let s = pair_state(2 * half, &mut r).unwrap();
        let sim = apply_phase_evolution(
            &apply_beam_splitter(&embed_pair_state(&s), BeamSplitter::PlusMinus, FRAC_PI_4).unwrap(), p, q, t);
        let ana = analytic_output_state(&s, p, q, t);
        prop_assert!(sim.inner(&ana).norm() > 1.0 - 1e-10);
    }

    #[test]
    fn smd_evolution_is_unitary(half in 1usize..40, t in 0.0f64..10.0) {
        let s = evolve_smd(2 * half, 1.0, t).unwrap();
        prop_assert!((s.populations().iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pair_bounds_are_positive(half in 1usize..30, seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = pair_state(2 * half, &mut r).unwrap();
        let b = pair_qcrb(&s);
        prop_assert!(b.delta_p > 0.0 && b.delta_q > 0.0);
        let n = (2 * half) as f64;
        prop_assert!(b.delta_p >= 1.0 / (8.0 * (n / 2.0 + n * n / 4.0)).sqrt() - 1e-12);
    }
}
