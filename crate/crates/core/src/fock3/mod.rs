//! Exact simulation of a spin-1 condensate in three bosonic modes.
//!
//! [`pair`] works in the zero-magnetization pair basis where preparation
//! happens; [`modes`] holds the full fixed-N Fock space where the pulses and
//! phase imprinting act.

pub mod modes;
pub mod pair;

pub use modes::{
    analytic_output_state, apply_beam_splitter, apply_phase_evolution, embed_pair_state, fock_dimension, fock_index,
    fock_occupations, project_pair_state, BeamSplitter, Fock3State, Pulse,
};
pub use pair::{
    evolve_smd, ground_state_and_gap, optimal_prepared_state, pair_qcrb, qpt_hamiltonian, qpt_ramp, qpt_sweep,
    smd_hamiltonian, ControlGrid, GroundState, HamiltonianKind, PairState, PreparationMethod, PreparedState,
    Propagator, RampResult, SmdEvolution, TridiagonalHamiltonian, QPT_C2,
};
