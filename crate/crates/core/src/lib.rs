//! Precision bounds and interferometer simulation for simultaneous estimation
//! of the linear (`p`) and quadratic (`q`) Zeeman coefficients with ensembles
//! of spin-F atoms.
//!
//! The crate is organised bottom-up:
//!
//! - [`spin`]: single-atom Zeeman-basis algebra and the standard input-state
//!   families (uniform, spin-coherent, three-amplitude).
//! - [`qfim`]: 2x2 quantum Fisher information matrices, Cramér-Rao bounds,
//!   and an exponential-cost brute-force evaluator used as an oracle.
//! - [`optimize`]: deterministic searches over input states and the parameter
//!   scans behind the angle, hyperfine-spin and atom-number sweeps.
//! - [`fock3`]: exact three-mode bosonic simulation of the spin-1
//!   interferometer (spin-mixing and ground-state preparation, pulses, phase
//!   imprinting).
//! - [`readout`]: population-difference-squared observables and FFT-based
//!   recovery of `p` and `q`.
//! - [`cli`]: the command implementations behind the `spinor-qcrb` binary.
//!
//! Units: `hbar = 1`; `p` and `q` are energies, times are in inverse energy.

pub mod cli;
pub mod error;
pub mod fit;
pub mod fock3;
pub mod optimize;
pub mod qfim;
pub mod random;
pub mod readout;
pub mod spin;
pub mod tridiag;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use fock3::{Fock3State, PairState};
pub use optimize::{Ensemble, OptimizationResult, StateFamily};
pub use qfim::{EstimationMode, PrecisionBound, Qfim2x2};
pub use spin::{MomentSet, SingleAtomState, SpinConfig};
