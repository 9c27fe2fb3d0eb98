//! Independent reference constructions shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use spinor_qcrb::fock3::{fock_dimension, fock_index, fock_occupations, BeamSplitter, Fock3State};
use spinor_qcrb::C64;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Maps a symmetric three-mode Fock state of spin-1 bosons onto the
/// `3^N` tensor-product basis used by the brute-force QFIM (digit
/// `d` encodes `m = d - 1`, atom 1 most significant).
pub fn symmetric_tensor_state(state: &Fock3State) -> Vec<C64> {
    let n = state.atoms();
    let dim = 3usize.pow(n as u32);
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut rest = idx;
        let mut occ = [0usize; 3]; // (m=+1, m=0, m=-1)
        for _ in 0..n {
            match rest % 3 {
                0 => occ[2] += 1,
                1 => occ[1] += 1,
                _ => occ[0] += 1,
            }
            rest /= 3;
        }
        let multinomial = factorial(n) / (factorial(occ[0]) * factorial(occ[1]) * factorial(occ[2]));
        *slot = state.amplitude(occ[0], occ[1], occ[2]) / multinomial.sqrt();
    }
    out
}

/// Matrix of `a_i^dag a_j` in the fixed-N Fock basis; modes are
/// `0 -> m=+1`, `1 -> m=0`, `2 -> m=-1`.
pub fn hop(atoms: usize, i: usize, j: usize) -> DMatrix<C64> {
    let dim = fock_dimension(atoms);
    let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (col, occ) in fock_occupations(atoms).iter().enumerate() {
        if occ[j] == 0 {
            continue;
        }
        let mut next = *occ;
        let mut amp = (next[j] as f64).sqrt();
        next[j] -= 1;
        amp *= (next[i] as f64 + 1.0).sqrt();
        next[i] += 1;
        let row = fock_index(atoms, next[0], next[1], next[2]).unwrap();
        m[(row, col)] += C64::new(amp, 0.0);
    }
    m
}

/// Anti-Hermitian generator of each pulse at unit angle.
pub fn generator(atoms: usize, which: BeamSplitter) -> DMatrix<C64> {
    let i = C64::new(0.0, 1.0);
    match which {
        BeamSplitter::PlusMinus => hop(atoms, 0, 2) - hop(atoms, 2, 0),
        BeamSplitter::PlusZero => (hop(atoms, 0, 1) + hop(atoms, 1, 0)) * (-i),
        BeamSplitter::MinusZero => (hop(atoms, 2, 1) + hop(atoms, 1, 2)) * (-i),
    }
}

/// Dense `exp(angle * G)` by scaling-and-squaring Padé.
pub fn dense_pulse(atoms: usize, which: BeamSplitter, angle: f64) -> DMatrix<C64> {
    (generator(atoms, which) * C64::new(angle, 0.0)).exp()
}

pub fn apply_dense(m: &DMatrix<C64>, state: &Fock3State) -> Vec<C64> {
    let v = nalgebra::DVector::from_column_slice(state.amplitudes());
    (m * v).iter().copied().collect()
}

/// `|<a|b>|` for raw amplitude vectors.
pub fn overlap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm()
}
