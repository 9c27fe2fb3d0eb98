//! Single-atom spin-F algebra in the Zeeman basis.
//!
//! Basis order is ascending magnetic quantum number: index `i` holds
//! `m = i - F`, so `m = -F` comes first and `s_z` is monotone along the
//! diagonal.

use nalgebra::DMatrix;

use crate::error::{domain, validation, Result};
use crate::C64;

/// Tolerance on `sum |alpha_m|^2 = 1` for user-supplied states.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Experiment-level parameters shared by the bound computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinConfig {
    /// Hyperfine spin F (integer, at least 1).
    pub spin: u32,
    /// Total atom number N.
    pub atoms: u32,
    /// Interrogation time T.
    pub duration: f64,
    /// Number of repetitions mu entering the bound as `(mu F_Q)^-1`.
    pub trials: u32,
}

impl SpinConfig {
    pub fn new(spin: u32, atoms: u32) -> Result<Self> {
        let cfg = SpinConfig {
            spin,
            atoms,
            duration: 1.0,
            trials: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_duration(mut self, duration: f64) -> Result<Self> {
        self.duration = duration;
        self.validate()?;
        Ok(self)
    }

    pub fn with_trials(mut self, trials: u32) -> Result<Self> {
        self.trials = trials;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_spin(self.spin)?;
        if self.atoms < 1 {
            return Err(domain("atom number N must be at least 1"));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(domain(format!(
                "evolution duration T must be finite and positive, got {}",
                self.duration
            )));
        }
        if self.trials < 1 {
            return Err(domain("number of trials must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn check_spin(spin: u32) -> Result<()> {
    if spin < 1 {
        return Err(domain("hyperfine spin F must be at least 1"));
    }
    Ok(())
}

/// Magnetic quantum numbers `-F..=F` in basis order.
pub fn magnetic_numbers(spin: u32) -> Vec<i32> {
    let f = spin as i32;
    (-f..=f).collect()
}

/// The diagonal operators `(s_z, s_z^2)` in the ascending-m Zeeman basis.
pub fn spin_operators(spin: u32) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_spin(spin)?;
    let ms: Vec<f64> = magnetic_numbers(spin).into_iter().map(f64::from).collect();
    let sz = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(ms.len(), ms.iter().copied()));
    let sz2 = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(ms.len(), ms.iter().map(|m| m * m)));
    Ok((sz, sz2))
}

/// Normalized amplitude vector of one spin-F atom over `m = -F..=F`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleAtomState {
    spin: u32,
    amplitudes: Vec<C64>,
}

impl SingleAtomState {
    /// Validates length `2F + 1` and unit norm.
    pub fn new(spin: u32, amplitudes: Vec<C64>) -> Result<Self> {
        check_spin(spin)?;
        let dim = 2 * spin as usize + 1;
        if amplitudes.len() != dim {
            return Err(validation(format!(
                "spin-{spin} state needs {dim} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(validation("amplitudes must be finite"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(validation(format!("state is not normalized: sum |alpha|^2 = {norm}")));
        }
        Ok(SingleAtomState { spin, amplitudes })
    }

    /// Builds a state from populations `|alpha_m|^2` with real nonnegative
    /// amplitudes.
    pub fn from_populations(spin: u32, populations: &[f64]) -> Result<Self> {
        if populations.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(validation("populations must be finite and nonnegative"));
        }
        let amps = populations.iter().map(|w| C64::new(w.sqrt(), 0.0)).collect();
        Self::new(spin, amps)
    }

    pub fn spin(&self) -> u32 {
        self.spin
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Amplitude of sublevel `m`, or `None` when `|m| > F`.
    pub fn amplitude(&self, m: i32) -> Option<C64> {
        let idx = m + self.spin as i32;
        if idx < 0 {
            return None;
        }
        self.amplitudes.get(idx as usize).copied()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn moments(&self) -> MomentSet {
        moments(self)
    }
}

/// Population-weighted moments `M_j = sum |alpha_m|^2 m^j`, j = 1..4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

pub fn moments(state: &SingleAtomState) -> MomentSet {
    let mut out = MomentSet {
        m1: 0.0,
        m2: 0.0,
        m3: 0.0,
        m4: 0.0,
    };
    for (m, a) in magnetic_numbers(state.spin).into_iter().zip(&state.amplitudes) {
        let w = a.norm_sqr();
        let m = f64::from(m);
        out.m1 += w * m;
        out.m2 += w * m * m;
        out.m3 += w * m * m * m;
        out.m4 += w * m * m * m * m;
    }
    out
}

/// Equal weight `1/(2F+1)` on every sublevel.
pub fn uniform_state(spin: u32) -> Result<SingleAtomState> {
    check_spin(spin)?;
    let dim = 2 * spin as usize + 1;
    let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    SingleAtomState::new(spin, vec![a; dim])
}

/// Spin-coherent state with binomial populations, pointing along polar angle
/// `theta` and azimuth `phi`.
///
/// Written as `sqrt(C(2F, F-m)) cos(theta/2)^(F+m) sin(theta/2)^(F-m)
/// e^{i(F-m)phi}`, which equals the `epsilon = tan(theta/2) e^{i phi}` form
/// with its `(1 + |epsilon|^2)^-F` normalization and stays finite at the
/// `theta = pi` pole.
pub fn coherent_state(spin: u32, theta: f64, phi: f64) -> Result<SingleAtomState> {
    check_spin(spin)?;
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(domain(format!("theta must lie in [0, pi], got {theta}")));
    }
    if !phi.is_finite() {
        return Err(domain("phi must be finite"));
    }
    let two_f = 2 * spin;
    let (s, c) = (theta / 2.0).sin_cos();
    let amps = magnetic_numbers(spin)
        .into_iter()
        .map(|m| {
            let down = (spin as i32 - m) as u32; // F - m
            let up = two_f - down; // F + m
            let mag = binomial(two_f, down).sqrt() * c.powi(up as i32) * s.powi(down as i32);
            C64::from_polar(mag, f64::from(down) * phi)
        })
        .collect();
    SingleAtomState::new(spin, amps)
}

/// State supported on `m in {-F, 0, F}` with `alpha_{-F} = alpha_F`.
pub fn three_amp_state(spin: u32, a_f: C64, a_0: C64) -> Result<SingleAtomState> {
    three_amp_state_with_phase(spin, a_f, a_0, 0.0)
}

/// As [`three_amp_state`] with `alpha_{-F} = alpha_F e^{i relative_phase}`.
pub fn three_amp_state_with_phase(spin: u32, a_f: C64, a_0: C64, relative_phase: f64) -> Result<SingleAtomState> {
    check_spin(spin)?;
    let norm = 2.0 * a_f.norm_sqr() + a_0.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(validation(format!(
            "three-amplitude state needs 2|aF|^2 + |a0|^2 = 1, got {norm}"
        )));
    }
    let dim = 2 * spin as usize + 1;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = a_f * C64::from_polar(1.0, relative_phase);
    amps[spin as usize] = a_0;
    amps[dim - 1] = a_f;
    SingleAtomState::new(spin, amps)
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn operators_for_spin_one() {
        let (sz, sz2) = spin_operators(1).unwrap();
        assert_eq!(sz.diagonal().as_slice(), &[-1.0, 0.0, 1.0]);
        assert_eq!(sz2.diagonal().as_slice(), &[1.0, 0.0, 1.0]);
        assert_eq!(&sz * &sz2, &sz2 * &sz);
    }

    #[test]
    fn trace_of_sz_squared_spin_two() {
        let (_, sz2) = spin_operators(2).unwrap();
        assert_eq!(sz2.trace(), 10.0);
    }

    #[test]
    fn zero_spin_rejected() {
        assert!(matches!(spin_operators(0), Err(crate::Error::Domain(_))));
        assert!(uniform_state(0).is_err());
    }

    #[test]
    fn uniform_moments_spin_one() {
        let m = uniform_state(1).unwrap().moments();
        assert!(m.m1.abs() < 1e-15 && m.m3.abs() < 1e-15);
        assert!((m.m2 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.m4 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_moments_closed_form() {
        for f in 1..=5u32 {
            let m = uniform_state(f).unwrap().moments();
            let ff = f64::from(f);
            let m2 = ff * (ff + 1.0) / 3.0;
            let m4 = ff * (ff + 1.0) * (3.0 * ff * ff + 3.0 * ff - 1.0) / 15.0;
            assert!((m.m2 - m2).abs() < 1e-12, "F={f}");
            assert!((m.m4 - m4).abs() < 1e-10, "F={f}");
            let pops = uniform_state(f).unwrap().populations();
            assert!(pops.iter().all(|w| (w - 1.0 / (2.0 * ff + 1.0)).abs() < 1e-15));
        }
    }

    #[test]
    fn concentrated_state_moments() {
        for f in 1..=4u32 {
            let s = coherent_state(f, 0.0, 0.0).unwrap();
            let m = s.moments();
            let ff = f64::from(f);
            assert_eq!((m.m1, m.m2, m.m3, m.m4), (ff, ff.powi(2), ff.powi(3), ff.powi(4)));
        }
    }

    #[test]
    fn coherent_poles() {
        let north = coherent_state(3, 0.0, 0.4).unwrap();
        assert_eq!(north.amplitude(3).unwrap().norm(), 1.0);
        let south = coherent_state(3, PI, 0.0).unwrap();
        assert!((south.amplitude(-3).unwrap().norm() - 1.0).abs() < 1e-15);
        assert!(south.populations()[1..].iter().all(|w| *w < 1e-30));
    }

    #[test]
    fn coherent_equator_spin_one() {
        let s = coherent_state(1, PI / 2.0, 0.0).unwrap();
        // m = +1, 0, -1
        let expect = [0.5, FRAC_1_SQRT_2, 0.5];
        for (m, e) in [1, 0, -1].into_iter().zip(expect) {
            assert!((s.amplitude(m).unwrap() - c(e)).norm() < 1e-15);
        }
        let mo = s.moments();
        assert!(mo.m1.abs() < 1e-15);
        assert!((mo.m2 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coherent_theta_out_of_range() {
        assert!(coherent_state(1, -0.1, 0.0).is_err());
        assert!(coherent_state(1, PI + 1e-9, 0.0).is_err());
    }

    #[test]
    fn three_amp_layout() {
        let s = three_amp_state(2, c(0.5), c(FRAC_1_SQRT_2)).unwrap();
        assert_eq!(s.amplitudes().len(), 5);
        assert_eq!(s.amplitude(2), Some(c(0.5)));
        assert_eq!(s.amplitude(-2), Some(c(0.5)));
        assert_eq!(s.amplitude(0), Some(c(FRAC_1_SQRT_2)));
        assert_eq!(s.amplitude(1), Some(c(0.0)));

        let err = three_amp_state(2, c(0.6), c(0.6)).unwrap_err();
        assert!(matches!(err, crate::Error::Validation(_)));
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(SingleAtomState::new(1, vec![c(1.0), c(1.0), c(0.0)]).is_err());
        assert!(SingleAtomState::new(1, vec![c(1.0)]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SpinConfig::new(1, 0).is_err());
        assert!(SpinConfig::new(1, 1).unwrap().with_duration(0.0).is_err());
        assert!(SpinConfig::new(1, 1).unwrap().with_trials(0).is_err());
        let cfg = SpinConfig::new(2, 10).unwrap();
        assert_eq!(cfg.duration, 1.0);
        assert_eq!(cfg.trials, 1);
    }
}
