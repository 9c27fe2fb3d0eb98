//! Fixed-N three-mode Fock space `(n1, n0, n-1)` with beam-splitter pulses
//! and Zeeman phase imprinting.
//!
//! Basis order: `n1` descending, then `n0` descending. With `r = N - n1` the
//! state `(n1, n0, n-1)` sits at index `r (r + 1) / 2 + n-1`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, numerical, validation, Result};
use crate::spin::binomial;
use crate::tridiag;
use crate::C64;

use super::pair::PairState;

pub const FOCK_NORM_TOLERANCE: f64 = 1e-10;
/// Largest tolerated `max |U^dag U - I|` for a pulse block.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

pub fn fock_dimension(atoms: usize) -> usize {
    (atoms + 1) * (atoms + 2) / 2
}

/// Index of `(n1, n0, n-1)`; the occupations must sum to the atom number.
pub fn fock_index(atoms: usize, n1: usize, n0: usize, nm: usize) -> Option<usize> {
    if n1 + n0 + nm != atoms {
        return None;
    }
    let r = atoms - n1;
    Some(r * (r + 1) / 2 + nm)
}

/// Occupations `(n1, n0, n-1)` of every basis state, in basis order.
pub fn fock_occupations(atoms: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(fock_dimension(atoms));
    for n1 in (0..=atoms).rev() {
        let r = atoms - n1;
        for n0 in (0..=r).rev() {
            out.push([n1, n0, r - n0]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fock3State {
    atoms: usize,
    amplitudes: Vec<C64>,
}

impl Fock3State {
    pub fn new(atoms: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != fock_dimension(atoms) {
            return Err(validation(format!(
                "N = {atoms} needs {} Fock amplitudes, got {}",
                fock_dimension(atoms),
                amplitudes.len()
            )));
        }
        let s = Fock3State { atoms, amplitudes };
        let norm = s.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > FOCK_NORM_TOLERANCE {
            return Err(validation(format!("Fock state norm {norm} is not 1")));
        }
        Ok(s)
    }

    pub fn basis(atoms: usize, n1: usize, n0: usize, nm: usize) -> Result<Self> {
        let idx = fock_index(atoms, n1, n0, nm)
            .ok_or_else(|| domain(format!("occupations ({n1}, {n0}, {nm}) do not sum to N = {atoms}")))?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); fock_dimension(atoms)];
        amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(Fock3State { atoms, amplitudes })
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n1: usize, n0: usize, nm: usize) -> C64 {
        fock_index(self.atoms, n1, n0, nm)
            .map(|i| self.amplitudes[i])
            .unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Fock3State) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Mean occupation of each mode, `(n1, n0, n-1)`.
    pub fn mean_occupations(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (occ, a) in fock_occupations(self.atoms).iter().zip(&self.amplitudes) {
            let w = a.norm_sqr();
            for (o, n) in out.iter_mut().zip(occ) {
                *o += w * *n as f64;
            }
        }
        out
    }
}

pub fn embed_pair_state(state: &PairState) -> Fock3State {
    let atoms = state.atoms();
    let mut amplitudes = vec![C64::new(0.0, 0.0); fock_dimension(atoms)];
    for (k, a) in state.alphas().iter().enumerate() {
        amplitudes[fock_index(atoms, k, atoms - 2 * k, k).expect("pair occupation")] = *a;
    }
    Fock3State { atoms, amplitudes }
}

/// Inverse of [`embed_pair_state`]; fails when more than `1e-10` of the
/// weight lies outside the pair subspace.
pub fn project_pair_state(state: &Fock3State) -> Result<PairState> {
    let atoms = state.atoms;
    let alphas: Vec<C64> = (0..=atoms / 2).map(|k| state.amplitude(k, atoms - 2 * k, k)).collect();
    let inside: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
    if (state.norm_sqr() - inside).abs() > FOCK_NORM_TOLERANCE {
        return Err(validation("state has weight outside the pair subspace"));
    }
    PairState::new(atoms, alphas)
}

/// Two-mode couplings between the three Zeeman modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeamSplitter {
    /// `exp[theta (a1^dag a-1 - a-1^dag a1)]`
    #[serde(rename = "pm")]
    PlusMinus,
    /// `exp[-i theta (a1^dag a0 + a0^dag a1)]`
    #[serde(rename = "p0")]
    PlusZero,
    /// `exp[-i theta (a-1^dag a0 + a0^dag a-1)]`
    #[serde(rename = "m0")]
    MinusZero,
}

impl BeamSplitter {
    /// Maps (spectator occupation, first-mode occupation, block size) to
    /// full occupations.
    fn occupations(self, spectator: usize, j: usize, m: usize) -> (usize, usize, usize) {
        match self {
            BeamSplitter::PlusMinus => (j, spectator, m - j),
            BeamSplitter::PlusZero => (j, m - j, spectator),
            BeamSplitter::MinusZero => (spectator, m - j, j),
        }
    }
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    /// Row-major unitary on the block.
    unitary: Vec<C64>,
}

/// Precomputed beam-splitter unitary for one atom number.
///
/// The generator conserves the spectator occupation, so the unitary is a
/// direct sum of two-mode blocks. Each block comes from the eigenbasis of
/// the real tridiagonal `a^dag b + b^dag a`.
#[derive(Debug, Clone)]
pub struct Pulse {
    atoms: usize,
    which: BeamSplitter,
    angle: f64,
    blocks: Vec<Block>,
}

impl Pulse {
    pub fn new(atoms: usize, which: BeamSplitter, angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(domain("pulse angle must be finite"));
        }
        let mut blocks = Vec::with_capacity(atoms + 1);
        for spectator in 0..=atoms {
            let m = atoms - spectator;
            let unitary = two_mode_unitary(m, which, angle)?;
            let indices = (0..=m)
                .map(|j| {
                    let (a, b, c) = which.occupations(spectator, j, m);
                    fock_index(atoms, a, b, c).expect("block occupation")
                })
                .collect();
            blocks.push(Block { indices, unitary });
        }
        Ok(Pulse {
            atoms,
            which,
            angle,
            blocks,
        })
    }

    /// The `pi/4` pulse used by the interferometer.
    pub fn half(atoms: usize, which: BeamSplitter) -> Result<Self> {
        Self::new(atoms, which, std::f64::consts::FRAC_PI_4)
    }

    pub fn which(&self) -> BeamSplitter {
        self.which
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn apply(&self, state: &Fock3State) -> Result<Fock3State> {
        if state.atoms != self.atoms {
            return Err(domain(format!(
                "pulse built for N = {} applied to N = {}",
                self.atoms, state.atoms
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
        for block in &self.blocks {
            let n = block.indices.len();
            for (r, &row) in block.indices.iter().enumerate() {
                let u = &block.unitary[r * n..(r + 1) * n];
                out[row] = u
                    .iter()
                    .zip(&block.indices)
                    .map(|(x, &col)| x * state.amplitudes[col])
                    .sum();
            }
        }
        Ok(Fock3State {
            atoms: self.atoms,
            amplitudes: out,
        })
    }

    /// Dense matrix of the pulse in the Fock basis.
    pub fn dense(&self) -> nalgebra::DMatrix<C64> {
        let dim = fock_dimension(self.atoms);
        let mut m = nalgebra::DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for block in &self.blocks {
            let n = block.indices.len();
            for (r, &row) in block.indices.iter().enumerate() {
                for (c, &col) in block.indices.iter().enumerate() {
                    m[(row, col)] = block.unitary[r * n + c];
                }
            }
        }
        m
    }
}

/// Unitary on `|j, m - j>`, `j = 0..=m`.
fn two_mode_unitary(m: usize, which: BeamSplitter, angle: f64) -> Result<Vec<C64>> {
    let n = m + 1;
    let diag = vec![0.0; n];
    let off: Vec<f64> = (0..m).map(|j| (((j + 1) * (m - j)) as f64).sqrt()).collect();
    let eig = tridiag::eigen(&diag, &off, true)?;
    let v = eig.vectors.as_ref().expect("vectors requested");
    // pm: exp(theta A) with A = i D^dag H D, D = diag(i^j), so the block is
    // D^dag exp(i theta H) D. p0/m0: exp(-i theta H).
    let sign = match which {
        BeamSplitter::PlusMinus => 1.0,
        _ => -1.0,
    };
    let phases: Vec<C64> = eig
        .values
        .iter()
        .map(|e| C64::from_polar(1.0, sign * angle * e))
        .collect();
    let i_pow = |j: usize| match j % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    let mut u = vec![C64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (l, ph) in phases.iter().enumerate() {
                acc += ph * (v[l * n + r] * v[l * n + c]);
            }
            if which == BeamSplitter::PlusMinus {
                acc *= i_pow(r).conj() * i_pow(c);
            }
            u[r * n + c] = acc;
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let dot: C64 = (0..n).map(|r| u[r * n + a].conj() * u[r * n + b]).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    if worst > UNITARITY_TOLERANCE {
        return Err(numerical(format!(
            "beam-splitter block for {m} atoms deviates from unitarity by {worst:e}"
        )));
    }
    Ok(u)
}

pub fn apply_beam_splitter(state: &Fock3State, which: BeamSplitter, angle: f64) -> Result<Fock3State> {
    Pulse::new(state.atoms, which, angle)?.apply(state)
}

/// Multiplies `(n1, n0, n-1)` by `exp(-i [(n1 - n-1) p + (n1 + n-1) q] t)`.
pub fn apply_phase_evolution(state: &Fock3State, p: f64, q: f64, t: f64) -> Fock3State {
    let amplitudes = fock_occupations(state.atoms)
        .iter()
        .zip(&state.amplitudes)
        .map(|([n1, _, nm], a)| {
            let (n1, nm) = (*n1 as f64, *nm as f64);
            a * C64::from_polar(1.0, -((n1 - nm) * p + (n1 + nm) * q) * t)
        })
        .collect();
    Fock3State {
        atoms: state.atoms,
        amplitudes,
    }
}

/// Coefficient of `|2m, ., 2k - 2m>` produced by the `pm` half pulse acting
/// on `|k, ., k>`, up to the sign `(-1)^(k - m)`.
pub fn pulse_coefficient(k: usize, m: usize) -> f64 {
    assert!(m <= k, "m must not exceed k");
    let (k32, m32) = (k as u32, m as u32);
    (binomial(2 * m32, m32) * binomial(2 * (k32 - m32), k32 - m32)).sqrt() / 2f64.powi(k as i32)
}

/// Closed form of `phase(p, q, t) . pm(pi/4) . embed(prepared)`.
pub fn analytic_output_state(prepared: &PairState, p: f64, q: f64, t: f64) -> Fock3State {
    let atoms = prepared.atoms();
    let mut amplitudes = vec![C64::new(0.0, 0.0); fock_dimension(atoms)];
    for (k, a) in prepared.alphas().iter().enumerate() {
        for m in 0..=k {
            let sign = if (k - m) % 2 == 0 { 1.0 } else { -1.0 };
            let phase = ((4.0 * m as f64 - 2.0 * k as f64) * p + 2.0 * k as f64 * q) * t;
            let idx = fock_index(atoms, 2 * m, atoms - 2 * k, 2 * k - 2 * m).expect("output occupation");
            amplitudes[idx] += a * sign * pulse_coefficient(k, m) * C64::from_polar(1.0, -phase);
        }
    }
    Fock3State { atoms, amplitudes }
}
