//! Quantum Fisher information for the parameter pair `(p, q)` and the
//! corresponding Cramér-Rao bounds.
//!
//! Both parameters enter through diagonal generators (`s_z` and `s_z^2`
//! summed over atoms), so for pure states every QFIM entry is four times a
//! covariance of generator eigenvalues under the basis populations. The
//! closed forms for product and GHZ inputs live here next to a brute-force
//! evaluator over the full `(2F+1)^N` tensor-product basis.

use serde::{Deserialize, Serialize};

use crate::error::{domain, numerical, validation, Error, Result};
use crate::spin::{magnetic_numbers, SingleAtomState, SpinConfig};
use crate::C64;

/// Largest tensor-product dimension the brute-force evaluator accepts.
pub const MAX_BRUTE_FORCE_DIM: usize = 1_000_000;

/// Norm tolerance for full N-atom state vectors.
pub const FULL_STATE_NORM_TOLERANCE: f64 = 1e-10;

/// Determinants below `-NEGATIVE_DET_TOLERANCE` are reported as errors.
pub const NEGATIVE_DET_TOLERANCE: f64 = 1e-10;

/// Relative singularity threshold: a QFIM with
/// `det <= SINGULAR_RELATIVE * max(f11 f22, 1)` has no finite joint bound.
pub const SINGULAR_RELATIVE: f64 = 1e-12;

/// Real symmetric 2x2 QFIM for `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qfim2x2 {
    pub f11: f64,
    pub f12: f64,
    pub f22: f64,
}

impl Qfim2x2 {
    pub fn det(&self) -> f64 {
        self.f11 * self.f22 - self.f12 * self.f12
    }

    pub fn scaled(&self, factor: f64) -> Qfim2x2 {
        Qfim2x2 {
            f11: self.f11 * factor,
            f12: self.f12 * factor,
            f22: self.f22 * factor,
        }
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.f11 >= -tol && self.f22 >= -tol && self.det() >= -tol
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Qfim2x2) -> f64 {
        (self.f11 - other.f11)
            .abs()
            .max((self.f12 - other.f12).abs())
            .max((self.f22 - other.f22).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    Simultaneous,
    Individual,
}

/// Root-variance bounds `(Delta p, Delta q)`. An infinite entry marks a
/// direction the QFIM does not resolve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBound {
    pub delta_p: f64,
    pub delta_q: f64,
    pub mode: EstimationMode,
}

impl PrecisionBound {
    /// `Delta^2 p + Delta^2 q`.
    pub fn sum_variance(&self) -> f64 {
        self.delta_p * self.delta_p + self.delta_q * self.delta_q
    }

    pub fn weighted_variance(&self, weight_p: f64, weight_q: f64) -> f64 {
        weight_p * self.delta_p * self.delta_p + weight_q * self.delta_q * self.delta_q
    }

    pub fn is_finite(&self) -> bool {
        self.delta_p.is_finite() && self.delta_q.is_finite()
    }
}

/// QFIM of a single atom: `4T^2` times the covariance matrix of `(m, m^2)`
/// under the populations `|alpha_m|^2`.
///
/// Entries are accumulated as centred sums, which equal
/// `4T^2 (M2 - M1^2)`, `4T^2 (M3 - M1 M2)` and `4T^2 (M4 - M2^2)` but stay
/// exactly zero for single-sublevel states.
pub fn single_atom_qfim(state: &SingleAtomState, config: &SpinConfig) -> Qfim2x2 {
    let pops = state.populations();
    let ms: Vec<f64> = magnetic_numbers(state.spin()).into_iter().map(f64::from).collect();
    let g2: Vec<f64> = ms.iter().map(|m| m * m).collect();
    covariance_qfim(&pops, &ms, &g2).scaled(config.duration * config.duration)
}

/// QFIM of the N-fold product state: `N` times the single-atom QFIM.
pub fn product_qfim(state: &SingleAtomState, config: &SpinConfig) -> Qfim2x2 {
    single_atom_qfim(state, config).scaled(f64::from(config.atoms))
}

/// QFIM of the multimode GHZ state `sum_m alpha_m |F,m>^(x)N`.
///
/// On `|F,m>^(x)N` the collective generators take the values `N m` and
/// `N m^2`, so every covariance picks up a factor `N^2`.
pub fn ghz_qfim(state: &SingleAtomState, config: &SpinConfig) -> Qfim2x2 {
    let n = f64::from(config.atoms);
    single_atom_qfim(state, config).scaled(n * n)
}

/// Joint bound from the inverse QFIM, divided by the number of trials.
pub fn qcrb_simultaneous(qfim: &Qfim2x2, trials: u32) -> Result<PrecisionBound> {
    check_trials(trials)?;
    check_diagonal(qfim)?;
    let det = qfim.det();
    if det < -NEGATIVE_DET_TOLERANCE {
        return Err(numerical(format!("QFIM is not positive semidefinite (det = {det})")));
    }
    let threshold = SINGULAR_RELATIVE * (qfim.f11 * qfim.f22).max(1.0);
    let mu = f64::from(trials);
    if det <= threshold {
        return Ok(PrecisionBound {
            delta_p: f64::INFINITY,
            delta_q: f64::INFINITY,
            mode: EstimationMode::Simultaneous,
        });
    }
    Ok(PrecisionBound {
        delta_p: (qfim.f22 / (mu * det)).sqrt(),
        delta_q: (qfim.f11 / (mu * det)).sqrt(),
        mode: EstimationMode::Simultaneous,
    })
}

/// Single-parameter bounds `1/sqrt(mu F_kk)`, treating the other parameter
/// as known.
pub fn qcrb_individual(qfim: &Qfim2x2, trials: u32) -> Result<PrecisionBound> {
    check_trials(trials)?;
    check_diagonal(qfim)?;
    let mu = f64::from(trials);
    let bound = |f: f64| {
        if f <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / (mu * f).sqrt()
        }
    };
    Ok(PrecisionBound {
        delta_p: bound(qfim.f11),
        delta_q: bound(qfim.f22),
        mode: EstimationMode::Individual,
    })
}

fn check_trials(trials: u32) -> Result<()> {
    if trials < 1 {
        return Err(domain("number of trials must be at least 1"));
    }
    Ok(())
}

fn check_diagonal(qfim: &Qfim2x2) -> Result<()> {
    if !(qfim.f11.is_finite() && qfim.f12.is_finite() && qfim.f22.is_finite()) {
        return Err(numerical("QFIM has non-finite entries"));
    }
    if qfim.f11 < -NEGATIVE_DET_TOLERANCE || qfim.f22 < -NEGATIVE_DET_TOLERANCE {
        return Err(numerical(format!(
            "QFIM has negative diagonal entries ({}, {})",
            qfim.f11, qfim.f22
        )));
    }
    Ok(())
}

/// Pure-state QFIM for two commuting generators diagonal in the basis of
/// `state`: `F_kl = 4 Re(<G_k G_l> - <G_k><G_l>)`.
///
/// `gen_p[i]`, `gen_q[i]` are the generator eigenvalues on basis vector `i`.
pub fn diagonal_generator_qfim(state: &[C64], gen_p: &[f64], gen_q: &[f64]) -> Result<Qfim2x2> {
    if gen_p.len() != state.len() || gen_q.len() != state.len() {
        return Err(validation(format!(
            "generator lengths ({}, {}) do not match state dimension {}",
            gen_p.len(),
            gen_q.len(),
            state.len()
        )));
    }
    let pops: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
    let norm: f64 = pops.iter().sum();
    if (norm - 1.0).abs() > FULL_STATE_NORM_TOLERANCE {
        return Err(validation(format!("state is not normalized: <psi|psi> = {norm}")));
    }
    Ok(covariance_qfim(&pops, gen_p, gen_q))
}

/// `4 Cov` of two diagonal observables under a probability vector.
fn covariance_qfim(pops: &[f64], g1: &[f64], g2: &[f64]) -> Qfim2x2 {
    let mean = |g: &[f64]| pops.iter().zip(g).map(|(w, x)| w * x).sum::<f64>();
    let (mu1, mu2) = (mean(g1), mean(g2));
    let mut out = Qfim2x2 {
        f11: 0.0,
        f12: 0.0,
        f22: 0.0,
    };
    for ((w, x1), x2) in pops.iter().zip(g1).zip(g2) {
        let (d1, d2) = (x1 - mu1, x2 - mu2);
        out.f11 += w * d1 * d1;
        out.f12 += w * d1 * d2;
        out.f22 += w * d2 * d2;
    }
    out.scaled(4.0)
}

/// Dimension `(2F+1)^N` of the tensor-product basis, checked against
/// [`MAX_BRUTE_FORCE_DIM`].
pub fn tensor_dimension(spin: u32, atoms: u32) -> Result<usize> {
    let local = 2 * spin as usize + 1;
    let mut dim = 1usize;
    for _ in 0..atoms {
        dim = dim
            .checked_mul(local)
            .filter(|d| *d <= MAX_BRUTE_FORCE_DIM)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "(2F+1)^N = {local}^{atoms} exceeds the brute-force cap of {MAX_BRUTE_FORCE_DIM}"
                ))
            })?;
    }
    Ok(dim)
}

/// Collective generator eigenvalues `T sum_n m_n` and `T sum_n m_n^2` over
/// the tensor-product basis. Atom 1 is the most significant digit; each
/// digit `d` encodes `m = d - F`.
pub fn collective_generators(config: &SpinConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = tensor_dimension(config.spin, config.atoms)?;
    let local = 2 * config.spin as usize + 1;
    let f = config.spin as i64;
    let t = config.duration;
    let mut g1 = Vec::with_capacity(dim);
    let mut g2 = Vec::with_capacity(dim);
    for idx in 0..dim {
        let (mut rest, mut s1, mut s2) = (idx, 0i64, 0i64);
        for _ in 0..config.atoms {
            let m = (rest % local) as i64 - f;
            rest /= local;
            s1 += m;
            s2 += m * m;
        }
        g1.push(t * s1 as f64);
        g2.push(t * s2 as f64);
    }
    Ok((g1, g2))
}

/// QFIM of an arbitrary pure N-atom state in the tensor-product Zeeman
/// basis, by direct evaluation of generator covariances. Cost is
/// exponential in N; this is the reference the closed forms are checked
/// against.
pub fn brute_force_qfim(full_state: &[C64], config: &SpinConfig) -> Result<Qfim2x2> {
    config.validate()?;
    let dim = tensor_dimension(config.spin, config.atoms)?;
    if full_state.len() != dim {
        return Err(validation(format!(
            "state has {} amplitudes, expected (2F+1)^N = {dim}",
            full_state.len()
        )));
    }
    let (g1, g2) = collective_generators(config)?;
    diagonal_generator_qfim(full_state, &g1, &g2)
}

/// `(sum_m alpha_m |m>)^(x)N` as a tensor-product state vector.
pub fn product_state_vector(state: &SingleAtomState, atoms: u32) -> Result<Vec<C64>> {
    tensor_dimension(state.spin(), atoms)?;
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..atoms {
        out = out
            .iter()
            .flat_map(|a| state.amplitudes().iter().map(move |b| a * b))
            .collect();
    }
    Ok(out)
}

/// `sum_m alpha_m |F,m>^(x)N` as a tensor-product state vector.
pub fn ghz_state_vector(state: &SingleAtomState, atoms: u32) -> Result<Vec<C64>> {
    let dim = tensor_dimension(state.spin(), atoms)?;
    let local = 2 * state.spin() as usize + 1;
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (d, a) in state.amplitudes().iter().enumerate() {
        // index of d repeated in every digit
        let idx = (0..atoms).fold(0usize, |acc, _| acc * local + d);
        out[idx] += a;
    }
    Ok(out)
}

/// One- and two-particle covariance terms of a permutation-symmetric state.
///
/// For such states `F = T^2 [4N I1 + 4N(N-1) I2]` where
/// `I1_kl = <a_k a_l>_1 - <a_k>_1 <a_l>_1` over the one-particle reduced
/// state and `I2_kl = <a_k (x) a_l>_2 - <a_k>_1 <a_l>_1` over the
/// two-particle reduced state, with `a_1 = s_z` and `a_2 = s_z^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleCorrelations {
    pub one_body: Qfim2x2,
    pub two_body: Qfim2x2,
}

impl ParticleCorrelations {
    /// Recombine into a QFIM for `atoms` particles and interrogation time
    /// `duration`.
    pub fn qfim(&self, atoms: u32, duration: f64) -> Qfim2x2 {
        let n = f64::from(atoms);
        let t2 = duration * duration;
        Qfim2x2 {
            f11: t2 * 4.0 * (n * self.one_body.f11 + n * (n - 1.0) * self.two_body.f11),
            f12: t2 * 4.0 * (n * self.one_body.f12 + n * (n - 1.0) * self.two_body.f12),
            f22: t2 * 4.0 * (n * self.one_body.f22 + n * (n - 1.0) * self.two_body.f22),
        }
    }
}

/// Reduced one- and two-particle covariance terms of a tensor-product state,
/// read off atoms 1 and 2. Only the diagonals of the reduced density
/// matrices enter because both generators are diagonal.
pub fn particle_correlations(full_state: &[C64], spin: u32, atoms: u32) -> Result<ParticleCorrelations> {
    let dim = tensor_dimension(spin, atoms)?;
    if full_state.len() != dim {
        return Err(validation(format!(
            "state has {} amplitudes, expected {dim}",
            full_state.len()
        )));
    }
    let local = 2 * spin as usize + 1;
    let ms: Vec<f64> = magnetic_numbers(spin).into_iter().map(f64::from).collect();
    let mut p1 = vec![0.0; local];
    let mut p12 = vec![0.0; local * local];
    let stride1 = dim / local;
    for (idx, a) in full_state.iter().enumerate() {
        let w = a.norm_sqr();
        let d1 = idx / stride1;
        p1[d1] += w;
        if atoms >= 2 {
            let d2 = (idx / (stride1 / local)) % local;
            p12[d1 * local + d2] += w;
        }
    }
    let a = |k: usize, m: f64| if k == 0 { m } else { m * m };
    let mean = |k: usize| p1.iter().zip(&ms).map(|(w, m)| w * a(k, *m)).sum::<f64>();
    let means = [mean(0), mean(1)];
    let mut one = [[0.0; 2]; 2];
    let mut two = [[0.0; 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            let second: f64 = p1.iter().zip(&ms).map(|(w, m)| w * a(k, *m) * a(l, *m)).sum();
            one[k][l] = second - means[k] * means[l];
            if atoms >= 2 {
                let mut joint = 0.0;
                for (i, mi) in ms.iter().enumerate() {
                    for (j, mj) in ms.iter().enumerate() {
                        joint += p12[i * local + j] * a(k, *mi) * a(l, *mj);
                    }
                }
                two[k][l] = joint - means[k] * means[l];
            }
        }
    }
    let pack = |m: [[f64; 2]; 2]| Qfim2x2 {
        f11: m[0][0],
        f12: m[0][1],
        f22: m[1][1],
    };
    Ok(ParticleCorrelations {
        one_body: pack(one),
        two_body: pack(two),
    })
}
