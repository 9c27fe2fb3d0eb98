//! Zero-magnetization pair basis `|k, N-2k, k>`: spin-mixing evolution,
//! ground states of the spin-1 Hamiltonian, and the closed-form bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, numerical, validation, Result};
use crate::fit::grid_then_golden;
use crate::qfim::{EstimationMode, PrecisionBound};
use crate::tridiag;
use crate::C64;

pub const PAIR_NORM_TOLERANCE: f64 = 1e-12;
/// Norm drift tolerated in computed states before they are renormalized.
pub const EVOLUTION_NORM_TOLERANCE: f64 = 1e-10;
/// Ground states with `E1 - E0` below this are reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-12;
/// Interaction constant used for ground-state preparation; `|c2| = 1` sets
/// the energy unit and the negative sign gives the polar/twin-Fock phases.
pub const QPT_C2: f64 = -1.0;

pub(crate) fn check_even_atoms(atoms: usize) -> Result<()> {
    if atoms < 2 || atoms % 2 != 0 {
        return Err(domain(format!(
            "pair-basis operations need an even atom number N >= 2, got {atoms}"
        )));
    }
    Ok(())
}

/// `sum_k alpha_k |k, N-2k, k>` for `k = 0..=N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    atoms: usize,
    alphas: Vec<C64>,
}

impl PairState {
    pub fn new(atoms: usize, alphas: Vec<C64>) -> Result<Self> {
        check_even_atoms(atoms)?;
        if alphas.len() != atoms / 2 + 1 {
            return Err(validation(format!(
                "N = {atoms} needs {} pair amplitudes, got {}",
                atoms / 2 + 1,
                alphas.len()
            )));
        }
        let norm: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > PAIR_NORM_TOLERANCE {
            return Err(validation(format!("pair state norm {norm} is not 1")));
        }
        Ok(PairState { atoms, alphas })
    }

    /// Renormalizes a computed vector after checking its drift.
    pub(crate) fn from_computed(atoms: usize, mut alphas: Vec<C64>) -> Result<Self> {
        let norm: f64 = alphas.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > EVOLUTION_NORM_TOLERANCE {
            return Err(numerical(format!("computed pair state drifted to norm {norm}")));
        }
        let s = norm.sqrt();
        alphas.iter_mut().for_each(|a| *a /= s);
        PairState::new(atoms, alphas)
    }

    /// All atoms in `m = 0`.
    pub fn polar(atoms: usize) -> Result<Self> {
        Self::basis(atoms, 0)
    }

    /// `N/2` atoms in each of `m = +1` and `m = -1`.
    pub fn twin_fock(atoms: usize) -> Result<Self> {
        Self::basis(atoms, atoms / 2)
    }

    pub fn basis(atoms: usize, k: usize) -> Result<Self> {
        check_even_atoms(atoms)?;
        if k > atoms / 2 {
            return Err(domain(format!("pair index {k} exceeds N/2 = {}", atoms / 2)));
        }
        let mut alphas = vec![C64::new(0.0, 0.0); atoms / 2 + 1];
        alphas[k] = C64::new(1.0, 0.0);
        Ok(PairState { atoms, alphas })
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn alphas(&self) -> &[C64] {
        &self.alphas
    }

    pub fn populations(&self) -> Vec<f64> {
        self.alphas.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|<self|other>|`.
    pub fn overlap(&self, other: &PairState) -> f64 {
        self.alphas
            .iter()
            .zip(&other.alphas)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianKind {
    Smd { kappa: f64 },
    Qpt { c2: f64, epsilon: f64 },
}

/// Real symmetric tridiagonal Hamiltonian in the pair basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    pub atoms: usize,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub kind: HamiltonianKind,
}

impl TridiagonalHamiltonian {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        nalgebra::DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.offdiag[i.min(j)],
            _ => 0.0,
        })
    }

    /// Spectrum in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(tridiag::eigen(&self.diag, &self.offdiag, false)?.values)
    }
}

/// `<k-1| a0^dag a0^dag a1 a-1 |k>` in the pair basis.
fn pair_hopping(atoms: usize, k: usize) -> f64 {
    let n0 = (atoms - 2 * k) as f64;
    k as f64 * ((n0 + 1.0) * (n0 + 2.0)).sqrt()
}

pub fn smd_hamiltonian(atoms: usize, kappa: f64) -> Result<TridiagonalHamiltonian> {
    check_even_atoms(atoms)?;
    if !kappa.is_finite() {
        return Err(domain("kappa must be finite"));
    }
    let dim = atoms / 2 + 1;
    Ok(TridiagonalHamiltonian {
        atoms,
        diag: vec![0.0; dim],
        offdiag: (1..dim).map(|k| kappa * pair_hopping(atoms, k)).collect(),
        kind: HamiltonianKind::Smd { kappa },
    })
}

pub fn qpt_hamiltonian(atoms: usize, c2: f64, epsilon: f64) -> Result<TridiagonalHamiltonian> {
    check_even_atoms(atoms)?;
    if c2 == 0.0 || !c2.is_finite() {
        return Err(domain("c2 must be finite and nonzero"));
    }
    if !epsilon.is_finite() {
        return Err(domain("epsilon must be finite"));
    }
    let dim = atoms / 2 + 1;
    let n = atoms as f64;
    let g = c2 / (2.0 * n);
    let diag = (0..dim)
        .map(|k| {
            let n0 = n - 2.0 * k as f64;
            g * (2.0 * n0 - 1.0) * (2.0 * k as f64) - epsilon * n0
        })
        .collect();
    let offdiag = (1..dim).map(|k| 2.0 * g * pair_hopping(atoms, k)).collect();
    Ok(TridiagonalHamiltonian {
        atoms,
        diag,
        offdiag,
        kind: HamiltonianKind::Qpt { c2, epsilon },
    })
}

/// Eigendecomposition of a pair Hamiltonian, reusable for many times.
#[derive(Debug, Clone)]
pub struct Propagator {
    atoms: usize,
    energies: Vec<f64>,
    vectors: Vec<f64>,
}

impl Propagator {
    pub fn new(h: &TridiagonalHamiltonian) -> Result<Self> {
        let e = tridiag::eigen(&h.diag, &h.offdiag, true)?;
        Ok(Propagator {
            atoms: h.atoms,
            vectors: e.vectors.expect("vectors requested"),
            energies: e.values,
        })
    }

    fn apply(&self, alphas: &[C64], t: f64) -> Vec<C64> {
        let n = self.energies.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, e) in self.energies.iter().enumerate() {
            let col = &self.vectors[j * n..(j + 1) * n];
            let c: C64 = col.iter().zip(alphas).map(|(v, a)| a * v).sum();
            let c = c * C64::from_polar(1.0, -e * t);
            for (o, v) in out.iter_mut().zip(col) {
                *o += c * v;
            }
        }
        out
    }

    /// `exp(-i H t) |state>`.
    pub fn evolve(&self, state: &PairState, t: f64) -> Result<PairState> {
        if state.atoms != self.atoms {
            return Err(domain("state and Hamiltonian have different N"));
        }
        PairState::from_computed(self.atoms, self.apply(&state.alphas, t))
    }
}

/// `exp(-i H_SMD t)` applied to the polar state, for many `t`.
#[derive(Debug, Clone)]
pub struct SmdEvolution {
    propagator: Propagator,
    polar: PairState,
}

impl SmdEvolution {
    pub fn new(atoms: usize, kappa: f64) -> Result<Self> {
        Ok(SmdEvolution {
            propagator: Propagator::new(&smd_hamiltonian(atoms, kappa)?)?,
            polar: PairState::polar(atoms)?,
        })
    }

    pub fn state_at(&self, t: f64) -> Result<PairState> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(domain("evolution time must be finite and nonnegative"));
        }
        self.propagator.evolve(&self.polar, t)
    }
}

pub fn evolve_smd(atoms: usize, kappa: f64, t: f64) -> Result<PairState> {
    SmdEvolution::new(atoms, kappa)?.state_at(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub state: PairState,
    pub energy: f64,
    /// `E1 - E0`.
    pub gap: f64,
    pub degenerate: bool,
}

pub fn ground_state_and_gap(h: &TridiagonalHamiltonian) -> Result<GroundState> {
    let (energy, vector, gap) = tridiag::lowest_eigenpair(&h.diag, &h.offdiag)?;
    let degenerate = gap < DEGENERACY_GAP;
    if degenerate {
        log::warn!("degenerate ground state (gap {gap:e}) for N = {}", h.atoms);
    }
    let state = PairState::from_computed(h.atoms, vector.into_iter().map(|v| C64::new(v, 0.0)).collect())?;
    Ok(GroundState {
        state,
        energy,
        gap: gap.max(0.0),
        degenerate,
    })
}

/// Ground states along an `epsilon` sweep, in input order.
pub fn qpt_sweep(atoms: usize, c2: f64, epsilons: &[f64]) -> Result<Vec<GroundState>> {
    epsilons
        .par_iter()
        .map(|&eps| ground_state_and_gap(&qpt_hamiltonian(atoms, c2, eps)?))
        .collect()
}

/// Simultaneous bounds for the pair state after the `pm` pulse and phase
/// imprinting for unit time and one trial.
pub fn pair_qcrb(state: &PairState) -> PrecisionBound {
    let (mut s1, mut s2, mut sp) = (0.0, 0.0, 0.0);
    for (k, a) in state.alphas.iter().enumerate() {
        let w = a.norm_sqr();
        let k = k as f64;
        s1 += w * k;
        s2 += w * k * k;
        sp += w * (k + k * k);
    }
    let fp = 8.0 * sp;
    let fq = 16.0 * (s2 - s1 * s1);
    let bound = |f: f64| if f > 1e-12 { 1.0 / f.sqrt() } else { f64::INFINITY };
    PrecisionBound {
        delta_p: bound(fp),
        delta_q: bound(fq),
        mode: EstimationMode::Simultaneous,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreparationMethod {
    /// Spin-mixing from the polar state at `kappa = 1`; control is `t`.
    Smd,
    /// Adiabatic ground state at `c2 = -1`; control is `epsilon / |c2|`.
    Qpt,
}

impl PreparationMethod {
    pub fn name(self) -> &'static str {
        match self {
            PreparationMethod::Smd => "smd",
            PreparationMethod::Qpt => "qpt",
        }
    }

    pub fn default_grid(self) -> ControlGrid {
        match self {
            PreparationMethod::Smd => ControlGrid {
                lo: 0.0,
                hi: 5.0,
                points: 2000,
            },
            PreparationMethod::Qpt => ControlGrid {
                lo: -4.0,
                hi: 4.0,
                points: 801,
            },
        }
    }
}

/// Equally spaced control values, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedState {
    pub method: PreparationMethod,
    pub state: PairState,
    /// Optimal `t` (SMD) or `epsilon / |c2|` (QPT).
    pub control: f64,
    pub bound: PrecisionBound,
}

const CONTROL_TOLERANCE: f64 = 1e-10;

/// Minimizes `Delta^2 p + Delta^2 q` of [`pair_qcrb`] over the control grid,
/// then refines between the neighbours of the best grid point.
pub fn optimal_prepared_state(method: PreparationMethod, atoms: usize, grid: &ControlGrid) -> Result<PreparedState> {
    check_even_atoms(atoms)?;
    if grid.points == 0 {
        return Err(domain("control grid is empty"));
    }
    if method == PreparationMethod::Smd && grid.lo < 0.0 {
        return Err(domain("spin-mixing times must be nonnegative"));
    }
    let state_at: Box<dyn Fn(f64) -> Result<PairState> + Sync> = match method {
        PreparationMethod::Smd => {
            let evo = SmdEvolution::new(atoms, 1.0)?;
            Box::new(move |t| evo.state_at(t))
        }
        PreparationMethod::Qpt => Box::new(move |eps| {
            ground_state_and_gap(&qpt_hamiltonian(atoms, QPT_C2, eps * QPT_C2.abs())?).map(|g| g.state)
        }),
    };
    let objective = |x: f64| {
        state_at(x)
            .map(|s| pair_qcrb(&s).sum_variance())
            .unwrap_or(f64::INFINITY)
    };
    let min = if grid.points == 1 {
        crate::fit::Minimum {
            x: grid.lo,
            value: objective(grid.lo),
            evaluations: 1,
        }
    } else {
        grid_then_golden(objective, grid.lo, grid.hi, grid.points, CONTROL_TOLERANCE)?
    };
    if !min.value.is_finite() {
        return Err(numerical(format!(
            "no control value in [{}, {}] gives finite bounds",
            grid.lo, grid.hi
        )));
    }
    let state = state_at(min.x)?;
    Ok(PreparedState {
        method,
        bound: pair_qcrb(&state),
        state,
        control: min.x,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RampResult {
    pub state: PairState,
    /// Ground state at the final `epsilon`, for adiabaticity checks.
    pub final_ground_state: PairState,
    /// Largest `| |psi|^2 - 1 |` seen during stepping.
    pub norm_drift: f64,
}

/// Finite-rate preparation: start in the ground state at `eps_start`, then
/// step `epsilon` linearly to `eps_end` over `duration` with `steps`
/// piecewise-constant exact propagators.
pub fn qpt_ramp(
    atoms: usize,
    c2: f64,
    eps_start: f64,
    eps_end: f64,
    duration: f64,
    steps: usize,
) -> Result<RampResult> {
    if steps == 0 || !(duration.is_finite() && duration > 0.0) {
        return Err(domain("ramp needs a positive duration and at least one step"));
    }
    let mut state = ground_state_and_gap(&qpt_hamiltonian(atoms, c2, eps_start)?)?.state;
    let dt = duration / steps as f64;
    let mut drift: f64 = 0.0;
    for i in 0..steps {
        let eps = eps_start + (eps_end - eps_start) * (i as f64 + 0.5) / steps as f64;
        let prop = Propagator::new(&qpt_hamiltonian(atoms, c2, eps)?)?;
        let raw = prop.apply(&state.alphas, dt);
        let norm: f64 = raw.iter().map(|a| a.norm_sqr()).sum();
        drift = drift.max((norm - 1.0).abs());
        if drift > 1e-8 {
            return Err(numerical(format!("ramp norm drift {drift:e} exceeds 1e-8")));
        }
        state = PairState::from_computed(atoms, raw)?;
    }
    let final_ground_state = ground_state_and_gap(&qpt_hamiltonian(atoms, c2, eps_end)?)?.state;
    Ok(RampResult {
        state,
        final_ground_state,
        norm_drift: drift,
    })
}
