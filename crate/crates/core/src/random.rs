//! Seeded random states for oracle tests and CLI runs.
//!
//! Amplitude vectors are drawn uniformly on the unit sphere of `C^d` by
//! normalizing i.i.d. complex Gaussians. All generators are `ChaCha8Rng`
//! seeded from a `u64`, so every draw is reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::fock3::PairState;
use crate::spin::SingleAtomState;
use crate::C64;

/// Default seed used by tests and the CLI when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_2019;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

pub fn single_atom_state<R: Rng + ?Sized>(spin: u32, rng: &mut R) -> Result<SingleAtomState> {
    SingleAtomState::new(spin, unit_vector(2 * spin as usize + 1, rng))
}

pub fn pair_state<R: Rng + ?Sized>(atoms: usize, rng: &mut R) -> Result<PairState> {
    PairState::new(atoms, unit_vector(atoms / 2 + 1, rng))
}
