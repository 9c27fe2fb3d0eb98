//! Population-difference-squared readout of the three-mode interferometer
//! and spectral recovery of `(p, q)` from the resulting time series.
//!
//! The series oscillate at `|4p|`, `|2p - 2q|` and `|2p + 2q|` only. The
//! estimator takes `4p` from the strongest line of `(N-1 - N0)^2`, the
//! difference line from its next line, and checks the sum line in
//! `(N1 - N0)^2`. Inputs are assumed to satisfy `p > q > 0`; anything else is
//! flagged rather than silently mis-assigned.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Error, Result};
use crate::fock3::modes::analytic_output_state;
use crate::fock3::{embed_pair_state, fock_occupations, BeamSplitter, Fock3State, PairState, Pulse};
use crate::C64;

/// Minimum series length accepted by [`fft_estimate`].
pub const MIN_SERIES_LENGTH: usize = 256;
pub const DEFAULT_SAMPLES: usize = 1024;
/// Peaks must exceed this multiple of the median spectral magnitude.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 5.0;
/// Half-width, in bins, of the local-maximum window.
const PEAK_WINDOW: usize = 2;
/// Bins within which the consistency line must be found.
const CONSISTENCY_BINS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    /// `(N1 - N0)^2`
    #[serde(rename = "sq_p0")]
    SqP0,
    /// `(N-1 - N0)^2`
    #[serde(rename = "sq_m0")]
    SqM0,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::SqP0 => "sq_p0",
            Observable::SqM0 => "sq_m0",
        }
    }

    pub fn eigenvalue(self, [n1, n0, nm]: [usize; 3]) -> f64 {
        let other = match self {
            Observable::SqP0 => n1,
            Observable::SqM0 => nm,
        };
        let d = other as f64 - n0 as f64;
        d * d
    }
}

/// The three pulses of the interferometer, built once per atom number.
#[derive(Debug, Clone)]
pub struct Interferometer {
    atoms: usize,
    u1: Pulse,
    u21: Pulse,
    u22: Pulse,
}

impl Interferometer {
    pub fn new(atoms: usize) -> Result<Self> {
        Ok(Interferometer {
            atoms,
            u1: Pulse::half(atoms, BeamSplitter::PlusMinus)?,
            u21: Pulse::half(atoms, BeamSplitter::PlusZero)?,
            u22: Pulse::half(atoms, BeamSplitter::MinusZero)?,
        })
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    /// State after the `pm` pulse and phase imprinting.
    pub fn output_state(&self, prepared: &PairState, p: f64, q: f64, t: f64) -> Result<Fock3State> {
        let split = self.u1.apply(&embed_pair_state(prepared))?;
        Ok(crate::fock3::apply_phase_evolution(&split, p, q, t))
    }

    /// `U22 U21 phase(p, q, t) U1 |prepared>`.
    pub fn final_state(&self, prepared: &PairState, p: f64, q: f64, t: f64) -> Result<Fock3State> {
        self.recombine(&self.output_state(prepared, p, q, t)?)
    }

    /// Applies `U22 U21` to an arbitrary output state.
    pub fn recombine(&self, output: &Fock3State) -> Result<Fock3State> {
        self.u22.apply(&self.u21.apply(output)?)
    }
}

pub fn final_state(prepared: &PairState, p: f64, q: f64, t: f64) -> Result<Fock3State> {
    Interferometer::new(prepared.atoms())?.final_state(prepared, p, q, t)
}

/// Mean and standard deviation of a diagonal observable.
pub fn expectation_and_std(state: &Fock3State, observable: Observable) -> (f64, f64) {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (occ, a) in fock_occupations(state.atoms()).into_iter().zip(state.amplitudes()) {
        let w = a.norm_sqr();
        let v = observable.eigenvalue(occ);
        m1 += w * v;
        m2 += w * v * v;
    }
    (m1, (m2 - m1 * m1).max(0.0).sqrt())
}

/// Uniform sampling times `start + i * step`, `i = 0..samples`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(start: f64, step: f64, samples: usize) -> Result<Self> {
        if !(start.is_finite() && step.is_finite() && step > 0.0) {
            return Err(domain("time grid needs a finite start and a positive step"));
        }
        if samples < 2 {
            return Err(domain("time grid needs at least two samples"));
        }
        Ok(TimeGrid { start, step, samples })
    }

    /// 1024 samples from `t = 0` with the largest step that still samples
    /// `4 |p_guess|` twice per Nyquist interval.
    pub fn default_for(p_guess: f64) -> Result<Self> {
        Self::new(0.0, max_step(p_guess)?, DEFAULT_SAMPLES)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.start + self.step * i as f64).collect()
    }

    /// Bin width `2 pi / (samples * step)` of the angular-frequency axis.
    pub fn resolution(&self) -> f64 {
        2.0 * PI / (self.samples as f64 * self.step)
    }

    pub fn satisfies_nyquist(&self, p_guess: f64) -> Result<bool> {
        Ok(self.step <= max_step(p_guess)? * (1.0 + 1e-12))
    }
}

/// `pi / (2 * 4 |p|)`.
fn max_step(p_guess: f64) -> Result<f64> {
    if !(p_guess.is_finite() && p_guess != 0.0) {
        return Err(domain("a finite nonzero p guess is needed to size the time grid"));
    }
    Ok(PI / (8.0 * p_guess.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSeries {
    pub observable: Observable,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Set when the grid step exceeds the guard for the supplied `p` guess.
    pub nyquist_violation: bool,
}

impl SignalSeries {
    pub fn new(observable: Observable, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(validation("times and values differ in length"));
        }
        if times.len() < 2 {
            return Err(validation("a series needs at least two samples"));
        }
        let step = times[1] - times[0];
        if step.is_nan() || step <= 0.0 {
            return Err(validation("times must be strictly increasing"));
        }
        let scale = times.iter().fold(1.0f64, |a, t| a.max(t.abs()));
        if times.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-12 * scale) {
            return Err(validation("times are not uniformly spaced"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < -1e-9) {
            return Err(validation("series values must be finite and nonnegative"));
        }
        Ok(SignalSeries {
            observable,
            times,
            values,
            nyquist_violation: false,
        })
    }

    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Both observables on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPair {
    pub sq_p0: SignalSeries,
    pub sq_m0: SignalSeries,
}

/// Expectation values of both observables on [`final_state`] at every grid
/// time. `p_guess` sizes the Nyquist check only.
pub fn signal_sweep(prepared: &PairState, p: f64, q: f64, grid: &TimeGrid, p_guess: f64) -> Result<SeriesPair> {
    let nyquist_ok = grid.satisfies_nyquist(p_guess)?;
    if !nyquist_ok {
        log::warn!("time step {} undersamples 4|p| = {}", grid.step, 4.0 * p_guess.abs());
    }
    let device = Interferometer::new(prepared.atoms())?;
    let times = grid.times();
    let values: Vec<(f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let f = device.final_state(prepared, p, q, t)?;
            Ok((
                expectation_and_std(&f, Observable::SqP0).0,
                expectation_and_std(&f, Observable::SqM0).0,
            ))
        })
        .collect::<Result<_>>()?;
    let mut sq_p0 = SignalSeries::new(Observable::SqP0, times.clone(), values.iter().map(|v| v.0).collect())?;
    let mut sq_m0 = SignalSeries::new(Observable::SqM0, times, values.iter().map(|v| v.1).collect())?;
    sq_p0.nyquist_violation = !nyquist_ok;
    sq_m0.nyquist_violation = !nyquist_ok;
    Ok(SeriesPair { sq_p0, sq_m0 })
}

/// Coefficients of the closed-form expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCoefficients {
    pub c01: f64,
    pub c02: f64,
    pub c1: f64,
    pub c2: C64,
}

pub fn analytic_coefficients(prepared: &PairState) -> AnalyticCoefficients {
    let n = prepared.atoms() as f64;
    let a = prepared.alphas();
    let (mut c01, mut c02, mut c1) = (0.0, 0.0, 0.0);
    for (k, alpha) in a.iter().enumerate() {
        let w = alpha.norm_sqr();
        let k = k as f64;
        c01 += w * (-9.0 / 32.0 * k - 57.0 / 32.0 * k * k + n * k + 11.0 / 16.0 * n + n * n / 16.0);
        c02 += w * 0.5 * (n + 2.0 * n * k - 3.0 * k * k);
        c1 += w * (k + k * k);
    }
    let c2 = a
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let kf = k as f64;
            w[1].conj() * w[0] * ((n - 2.0 * kf - 1.0) * (n - 2.0 * kf)).sqrt() * (1.0 + kf)
        })
        .sum();
    AnalyticCoefficients { c01, c02, c1, c2 }
}

/// Amplitudes of the constant and of the cosine/sine at each line, in the
/// order `[1, cos 4pt, sin 4pt, cos(-2p+2q)t, sin(-2p+2q)t, cos(2p+2q)t,
/// sin(2p+2q)t]`.
pub type TermVector = [f64; 7];

pub const TERM_NAMES: [&str; 7] = [
    "constant", "cos_4p", "sin_4p", "cos_diff", "sin_diff", "cos_sum", "sin_sum",
];

fn analytic_terms(c: &AnalyticCoefficients, observable: Observable) -> TermVector {
    match observable {
        Observable::SqP0 => [
            c.c01,
            -c.c1 / 8.0,
            0.0,
            c.c2.re / 4.0,
            -c.c2.im / 4.0,
            -9.0 / 8.0 * c.c2.re,
            9.0 / 8.0 * c.c2.im,
        ],
        Observable::SqM0 => [c.c02, -c.c1 / 2.0, 0.0, c.c2.re, -c.c2.im, 0.0, 0.0],
    }
}

fn term_basis(p: f64, q: f64, t: f64) -> TermVector {
    let (w4, wd, ws) = (4.0 * p * t, (-2.0 * p + 2.0 * q) * t, (2.0 * p + 2.0 * q) * t);
    [1.0, w4.cos(), w4.sin(), wd.cos(), wd.sin(), ws.cos(), ws.sin()]
}

/// Closed-form `(<sq_p0>, <sq_m0>)`. A cross-check only: the exact pipeline
/// is authoritative, see [`term_comparison`].
pub fn analytic_expectations(prepared: &PairState, p: f64, q: f64, t: f64) -> (f64, f64) {
    let c = analytic_coefficients(prepared);
    let b = term_basis(p, q, t);
    let dot = |v: TermVector| v.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
    (
        dot(analytic_terms(&c, Observable::SqP0)),
        dot(analytic_terms(&c, Observable::SqM0)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermComparison {
    pub observable: Observable,
    pub analytic: TermVector,
    /// Least-squares amplitudes of the exact series.
    pub fitted: TermVector,
    /// RMS residual of the least-squares fit; near zero when the three lines
    /// explain the exact series.
    pub fit_residual: f64,
    /// Largest `|analytic - fitted|` over all terms.
    pub max_discrepancy: f64,
}

/// Fits the exact series onto the seven-term basis and reports each term next
/// to its closed-form value.
pub fn term_comparison(series: &SignalSeries, prepared: &PairState, p: f64, q: f64) -> Result<TermComparison> {
    let rows = series.len();
    let design = DMatrix::from_fn(rows, 7, |i, j| term_basis(p, q, series.times[i])[j]);
    let y = DVector::from_column_slice(&series.values);
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&y, 1e-10)
        .map_err(|e| crate::error::numerical(format!("least-squares fit failed: {e}")))?;
    let residual = (&design * &coef - &y).norm() / (rows as f64).sqrt();
    let mut fitted = [0.0; 7];
    fitted.copy_from_slice(coef.as_slice());
    let analytic = analytic_terms(&analytic_coefficients(prepared), series.observable);
    let max_discrepancy = analytic
        .iter()
        .zip(&fitted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(TermComparison {
        observable: series.observable,
        analytic,
        fitted,
        fit_residual: residual,
        max_discrepancy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub hann: bool,
}

/// One-sided magnitude spectrum of a mean-subtracted series. The FFT is
/// scaled by `1/sqrt(L)` so that the two-sided spectrum carries the same
/// energy as the signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub resolution: f64,
    /// Length of the transformed series.
    pub length: usize,
}

impl Spectrum {
    pub fn compute(series: &SignalSeries, options: SpectrumOptions) -> Spectrum {
        let l = series.len();
        let mean = series.values.iter().sum::<f64>() / l as f64;
        let mut buf: Vec<C64> = series
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = if options.hann {
                    0.5 - 0.5 * (2.0 * PI * i as f64 / l as f64).cos()
                } else {
                    1.0
                };
                C64::new((v - mean) * w, 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(l).process(&mut buf);
        let norm = (l as f64).sqrt();
        let resolution = 2.0 * PI / (l as f64 * series.step());
        let half = l / 2;
        Spectrum {
            frequencies: (0..=half).map(|k| k as f64 * resolution).collect(),
            magnitudes: buf[..=half].iter().map(|x| x.norm() / norm).collect(),
            resolution,
            length: l,
        }
    }

    /// Energy of the two-sided spectrum reconstructed from the one-sided half.
    pub fn energy(&self) -> f64 {
        let half = self.length / 2;
        self.magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let mirrored = k != 0 && !(self.length % 2 == 0 && k == half);
                m * m * if mirrored { 2.0 } else { 1.0 }
            })
            .sum()
    }

    fn median_magnitude(&self) -> f64 {
        let mut m = self.magnitudes.clone();
        m.sort_by(f64::total_cmp);
        let n = m.len();
        if n % 2 == 1 {
            m[n / 2]
        } else {
            0.5 * (m[n / 2 - 1] + m[n / 2])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Interpolated angular frequency.
    pub frequency: f64,
    pub magnitude: f64,
    pub bin: usize,
}

/// Local maxima over a +-2 bin window that exceed `threshold` times the
/// median magnitude, refined by a parabola through the three nearest bins.
/// Sorted by magnitude, largest first.
pub fn find_peaks(spectrum: &Spectrum, threshold: f64) -> Vec<Peak> {
    let m = &spectrum.magnitudes;
    let floor = threshold * spectrum.median_magnitude();
    let mut peaks = Vec::new();
    for k in 1..m.len() {
        if m[k] <= floor {
            continue;
        }
        let lo = k.saturating_sub(PEAK_WINDOW);
        let hi = (k + PEAK_WINDOW).min(m.len() - 1);
        let is_max = (lo..=hi).all(|j| j == k || m[j] < m[k] || (m[j] == m[k] && j > k));
        if !is_max {
            continue;
        }
        let (delta, height) = if k + 1 < m.len() {
            let (a, b, c) = (m[k - 1], m[k], m[k + 1]);
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                let d = 0.5 * (a - c) / denom;
                (d, b - 0.25 * (a - c) * d)
            } else {
                (0.0, b)
            }
        } else {
            (0.0, m[k])
        };
        peaks.push(Peak {
            frequency: (k as f64 + delta) * spectrum.resolution,
            magnitude: height,
            bin: k,
        });
    }
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    peaks
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EstimateFlags {
    /// No `sq_p0` line within two bins of `2p + 2q`.
    pub inconsistent: bool,
    /// `|4q|` is within two bins, so the `2p +- 2q` lines are not resolved.
    pub degenerate: bool,
    /// The peaks contradict `p > q > 0`.
    pub out_of_regime: bool,
    pub nyquist_violation: bool,
}

impl EstimateFlags {
    pub fn any(&self) -> bool {
        self.inconsistent || self.degenerate || self.out_of_regime || self.nyquist_violation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FftEstimate {
    /// Significant `sq_m0` lines, highest frequency first.
    pub peak_frequencies: Vec<f64>,
    pub p_hat: f64,
    pub q_hat: f64,
    /// Frequency bin width.
    pub resolution: f64,
    /// The `sq_p0` line matched to `2p + 2q`, if any.
    pub consistency_frequency: Option<f64>,
    pub flags: EstimateFlags,
    pub peaks_sq_p0: Vec<Peak>,
    pub peaks_sq_m0: Vec<Peak>,
}

pub fn fft_estimate(pair: &SeriesPair, options: SpectrumOptions) -> Result<FftEstimate> {
    fft_estimate_with_threshold(pair, options, DEFAULT_PEAK_THRESHOLD)
}

pub fn fft_estimate_with_threshold(pair: &SeriesPair, options: SpectrumOptions, threshold: f64) -> Result<FftEstimate> {
    let (a, b) = (&pair.sq_p0, &pair.sq_m0);
    if a.observable != Observable::SqP0 || b.observable != Observable::SqM0 {
        return Err(domain("series pair must hold sq_p0 and sq_m0 in that order"));
    }
    if a.times != b.times {
        return Err(domain("both series must share one time grid"));
    }
    if a.len() < MIN_SERIES_LENGTH {
        return Err(domain(format!(
            "spectral estimation needs at least {MIN_SERIES_LENGTH} samples, got {}",
            a.len()
        )));
    }
    let spec_p0 = Spectrum::compute(a, options);
    let spec_m0 = Spectrum::compute(b, options);
    let bin = spec_m0.resolution;
    let peaks_sq_p0 = find_peaks(&spec_p0, threshold);
    let peaks_sq_m0 = find_peaks(&spec_m0, threshold);

    let Some(first) = peaks_sq_m0.first().copied() else {
        return Err(Error::Estimation {
            reason: "no significant line in the sq_m0 spectrum".into(),
            peaks: peaks_sq_m0,
        });
    };
    let Some(second) = peaks_sq_m0
        .iter()
        .skip(1)
        .find(|pk| (pk.frequency - first.frequency).abs() > CONSISTENCY_BINS * bin)
        .copied()
    else {
        return Err(Error::Estimation {
            reason: "fewer than two significant lines in the sq_m0 spectrum".into(),
            peaks: peaks_sq_m0,
        });
    };

    let p_hat = first.frequency / 4.0;
    let q_hat = p_hat - second.frequency / 2.0;
    let target = 2.0 * p_hat + 2.0 * q_hat;
    let consistency_frequency = peaks_sq_p0
        .iter()
        .filter(|pk| (pk.frequency - target).abs() <= CONSISTENCY_BINS * bin)
        .min_by(|x, y| (x.frequency - target).abs().total_cmp(&(y.frequency - target).abs()))
        .map(|pk| pk.frequency);

    let flags = EstimateFlags {
        inconsistent: consistency_frequency.is_none(),
        degenerate: 4.0 * q_hat.abs() <= CONSISTENCY_BINS * bin,
        out_of_regime: second.frequency >= first.frequency || q_hat.abs() > p_hat.abs() || q_hat < 0.0,
        nyquist_violation: a.nyquist_violation || b.nyquist_violation,
    };
    if flags.any() {
        log::warn!("FFT estimate flagged: {flags:?}");
    }
    let mut peak_frequencies: Vec<f64> = peaks_sq_m0.iter().map(|p| p.frequency).collect();
    peak_frequencies.sort_by(|x, y| y.total_cmp(x));
    Ok(FftEstimate {
        peak_frequencies,
        p_hat,
        q_hat,
        resolution: bin,
        consistency_frequency,
        flags,
        peaks_sq_p0,
        peaks_sq_m0,
    })
}

/// `U22 U21` applied to the closed-form output state.
pub fn analytic_final_state(prepared: &PairState, p: f64, q: f64, t: f64) -> Result<Fock3State> {
    Interferometer::new(prepared.atoms())?.recombine(&analytic_output_state(prepared, p, q, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock3::{optimal_prepared_state, PreparationMethod};

    #[test]
    fn diagonal_observables() {
        let s = Fock3State::basis(4, 2, 1, 1).unwrap();
        assert_eq!(expectation_and_std(&s, Observable::SqP0), (1.0, 0.0));
        assert_eq!(expectation_and_std(&s, Observable::SqM0), (0.0, 0.0));
        let n = 6usize;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(0.0, 0.0); crate::fock3::fock_dimension(n)];
        amps[crate::fock3::fock_index(n, n, 0, 0).unwrap()] = C64::new(h, 0.0);
        amps[crate::fock3::fock_index(n, 0, n, 0).unwrap()] = C64::new(h, 0.0);
        let s = Fock3State::new(n, amps).unwrap();
        let (m, sd) = expectation_and_std(&s, Observable::SqP0);
        assert!((m - 36.0).abs() < 1e-12 && sd < 1e-6);
    }

    #[test]
    fn polar_state_without_fields() {
        let polar = PairState::polar(6).unwrap();
        let f = final_state(&polar, 0.0, 0.0, 0.0).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
        let occ = f.mean_occupations();
        assert!((occ.iter().sum::<f64>() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn default_grid_is_guarded() {
        let g = TimeGrid::default_for(10.0).unwrap();
        assert_eq!(g.samples, 1024);
        assert!(g.satisfies_nyquist(10.0).unwrap());
        assert!(!g.satisfies_nyquist(10.5).unwrap());
        assert!(TimeGrid::default_for(0.0).is_err());
    }

    #[test]
    fn coefficients_for_equal_superposition() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PairState::new(2, vec![C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        let c = analytic_coefficients(&s);
        assert!((c.c1 - 1.0).abs() < 1e-15);
        let single = PairState::basis(6, 2).unwrap();
        assert_eq!(analytic_coefficients(&single).c2, C64::new(0.0, 0.0));
    }

    #[test]
    fn constant_series_without_fields() {
        let s = optimal_prepared_state(PreparationMethod::Smd, 6, &PreparationMethod::Smd.default_grid())
            .unwrap()
            .state;
        let grid = TimeGrid::new(0.0, 0.1, 16).unwrap();
        let pair = signal_sweep(&s, 0.0, 0.0, &grid, 1.0).unwrap();
        for series in [&pair.sq_p0, &pair.sq_m0] {
            let v0 = series.values[0];
            assert!(series.values.iter().all(|v| (v - v0).abs() < 1e-9));
        }
    }

    #[test]
    fn spectrum_energy_matches_signal() {
        let times: Vec<f64> = (0..300).map(|i| i as f64 * 0.05).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| 3.0 + (2.0 * t).cos() + 0.3 * (5.1 * t).sin())
            .collect();
        let s = SignalSeries::new(Observable::SqP0, times, values.clone()).unwrap();
        let spec = Spectrum::compute(&s, SpectrumOptions::default());
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let energy: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        assert!((spec.energy() - energy).abs() < 1e-8 * energy);
    }

    #[test]
    fn series_validation() {
        assert!(SignalSeries::new(Observable::SqP0, vec![0.0, 1.0, 3.0], vec![1.0; 3]).is_err());
        assert!(SignalSeries::new(Observable::SqP0, vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
    }
}
