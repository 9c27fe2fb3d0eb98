//! Deterministic optimization of single-atom amplitudes for the joint
//! `(p, q)` bound, and the parameter scans built on it.
//!
//! The bound depends on the amplitudes only through the populations
//! `w_m = |alpha_m|^2` (both generators are diagonal), so every search runs
//! over real nonnegative amplitudes. The objective is
//! `weight_p * Delta^2 p + weight_q * Delta^2 q`, by default the plain sum.
//! `p` and `q` carry different units; the unweighted sum is a convention.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, numerical, Error, Result};
use crate::fit::{grid_then_golden, scaling_slope, MIN_SCALING_POINTS};
use crate::qfim::{
    ghz_qfim, product_qfim, qcrb_individual, qcrb_simultaneous, EstimationMode, PrecisionBound, Qfim2x2,
    SINGULAR_RELATIVE,
};
use crate::random::{rng, DEFAULT_SEED};
use crate::spin::{coherent_state, three_amp_state, SingleAtomState, SpinConfig};
use crate::C64;

/// How the single-atom amplitudes are spread over the N atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// `(sum_m alpha_m |m>)^(x)N`
    Product,
    /// `sum_m alpha_m |m>^(x)N`
    Ghz,
}

impl Ensemble {
    pub fn qfim(self, state: &SingleAtomState, config: &SpinConfig) -> Qfim2x2 {
        match self {
            Ensemble::Product => product_qfim(state, config),
            Ensemble::Ghz => ghz_qfim(state, config),
        }
    }

    fn information_scale(self, config: &SpinConfig) -> f64 {
        let n = f64::from(config.atoms);
        let t2 = config.duration * config.duration;
        match self {
            Ensemble::Product => t2 * n,
            Ensemble::Ghz => t2 * n * n,
        }
    }
}

/// Search space for [`optimize_sum_variance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFamily {
    /// Arbitrary populations over all `2F + 1` sublevels.
    General,
    /// `alpha_F |F> + alpha_0 |0> + alpha_F |-F>`, one free parameter.
    ThreeAmplitude,
    /// Spin-coherent states at `phi = 0`, searched over `theta`.
    CoherentTheta,
}

impl StateFamily {
    pub fn name(self) -> &'static str {
        match self {
            StateFamily::General => "general",
            StateFamily::ThreeAmplitude => "three_amplitude",
            StateFamily::CoherentTheta => "coherent_theta",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_state: SingleAtomState,
    /// `weight_p * Delta^2 p + weight_q * Delta^2 q` of `bound`.
    pub objective: f64,
    pub bound: PrecisionBound,
    pub iterations: usize,
    pub family: StateFamily,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    /// Seeded random starts for the general family.
    pub starts: usize,
    /// Bracketing grid size for the one-parameter families.
    pub grid_points: usize,
    /// Target width of the golden-section bracket.
    pub tolerance: f64,
    /// Iteration cap per start of the general-family descent.
    pub max_iterations: usize,
    /// Projected-gradient stationarity threshold for the general family.
    pub stationarity: f64,
    pub seed: u64,
    pub weight_p: f64,
    pub weight_q: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            starts: 32,
            grid_points: 10_000,
            tolerance: 1e-12,
            max_iterations: 200_000,
            stationarity: 1e-13,
            seed: DEFAULT_SEED,
            weight_p: 1.0,
            weight_q: 1.0,
        }
    }
}

/// Minimize `Delta^2 p + Delta^2 q` for spin `F` and `N` atoms with the
/// default settings (`T = 1`, one trial).
pub fn optimize_sum_variance(
    spin: u32,
    atoms: u32,
    ensemble: Ensemble,
    family: StateFamily,
) -> Result<OptimizationResult> {
    let config = SpinConfig::new(spin, atoms)?;
    optimize_sum_variance_with(&config, ensemble, family, &OptimizerSettings::default())
}

pub fn optimize_sum_variance_with(
    config: &SpinConfig,
    ensemble: Ensemble,
    family: StateFamily,
    settings: &OptimizerSettings,
) -> Result<OptimizationResult> {
    config.validate()?;
    if config.spin > 5 {
        log::warn!(
            "F = {} is outside the validated range 1..=5; optimizer settings are untested there",
            config.spin
        );
    }
    if !(settings.weight_p > 0.0 && settings.weight_q > 0.0) {
        return Err(domain("objective weights must be positive"));
    }
    match family {
        StateFamily::ThreeAmplitude => {
            let spin = config.spin;
            let state_at = |x: f64| {
                three_amp_state(
                    spin,
                    C64::new(x.sqrt(), 0.0),
                    C64::new((1.0 - 2.0 * x).max(0.0).sqrt(), 0.0),
                )
            };
            // Interior grid of (0, 1/2): both endpoints are singular.
            let h = 0.5 / (settings.grid_points + 1) as f64;
            one_dimensional(config, ensemble, family, settings, h, 0.5 - h, state_at)
        }
        StateFamily::CoherentTheta => {
            let spin = config.spin;
            let h = std::f64::consts::PI / (settings.grid_points + 1) as f64;
            let state_at = |theta: f64| coherent_state(spin, theta, 0.0);
            one_dimensional(
                config,
                ensemble,
                family,
                settings,
                h,
                std::f64::consts::PI - h,
                state_at,
            )
        }
        StateFamily::General => general(config, ensemble, settings),
    }
}

fn evaluate(
    state: &SingleAtomState,
    config: &SpinConfig,
    ensemble: Ensemble,
    settings: &OptimizerSettings,
) -> Result<(PrecisionBound, f64)> {
    let bound = qcrb_simultaneous(&ensemble.qfim(state, config), config.trials)?;
    let objective = bound.weighted_variance(settings.weight_p, settings.weight_q);
    Ok((bound, objective))
}

fn one_dimensional<S>(
    config: &SpinConfig,
    ensemble: Ensemble,
    family: StateFamily,
    settings: &OptimizerSettings,
    lo: f64,
    hi: f64,
    state_at: S,
) -> Result<OptimizationResult>
where
    S: Fn(f64) -> Result<SingleAtomState>,
{
    let objective = |x: f64| {
        state_at(x)
            .and_then(|s| evaluate(&s, config, ensemble, settings))
            .map(|(_, v)| v)
            .unwrap_or(f64::INFINITY)
    };
    let min = grid_then_golden(objective, lo, hi, settings.grid_points, settings.tolerance)?;
    let best_state = state_at(min.x)?;
    let (bound, objective) = evaluate(&best_state, config, ensemble, settings)?;
    if !objective.is_finite() {
        return Err(numerical("one-dimensional search found no finite bound"));
    }
    Ok(OptimizationResult {
        best_state,
        objective,
        bound,
        iterations: min.evaluations,
        family,
    })
}

/// Objective and gradient over the population simplex.
struct SimplexObjective {
    g1: Vec<f64>,
    g2: Vec<f64>,
    /// Converts the population covariance into QFIM units (`4 T^2 N^k mu`).
    scale: f64,
    weight_p: f64,
    weight_q: f64,
}

impl SimplexObjective {
    fn new(config: &SpinConfig, ensemble: Ensemble, settings: &OptimizerSettings) -> Self {
        let f = config.spin as i32;
        let g1: Vec<f64> = (-f..=f).map(f64::from).collect();
        let g2 = g1.iter().map(|m| m * m).collect();
        SimplexObjective {
            g1,
            g2,
            scale: 4.0 * ensemble.information_scale(config) * f64::from(config.trials),
            weight_p: settings.weight_p,
            weight_q: settings.weight_q,
        }
    }

    fn covariance(&self, w: &[f64]) -> (f64, f64, f64, f64, f64) {
        let mu1: f64 = w.iter().zip(&self.g1).map(|(a, b)| a * b).sum();
        let mu2: f64 = w.iter().zip(&self.g2).map(|(a, b)| a * b).sum();
        let (mut c11, mut c12, mut c22) = (0.0, 0.0, 0.0);
        for ((wi, x1), x2) in w.iter().zip(&self.g1).zip(&self.g2) {
            let (d1, d2) = (x1 - mu1, x2 - mu2);
            c11 += wi * d1 * d1;
            c12 += wi * d1 * d2;
            c22 += wi * d2 * d2;
        }
        (mu1, mu2, c11, c12, c22)
    }

    fn singular(c11: f64, c12: f64, c22: f64) -> bool {
        let det = c11 * c22 - c12 * c12;
        det <= SINGULAR_RELATIVE * (c11 * c22).max(1.0)
    }

    fn value(&self, w: &[f64]) -> f64 {
        let (_, _, c11, c12, c22) = self.covariance(w);
        if Self::singular(c11, c12, c22) {
            return f64::INFINITY;
        }
        let det = c11 * c22 - c12 * c12;
        (self.weight_p * c22 + self.weight_q * c11) / (self.scale * det)
    }

    fn gradient(&self, w: &[f64]) -> Option<Vec<f64>> {
        let (mu1, mu2, c11, c12, c22) = self.covariance(w);
        if Self::singular(c11, c12, c22) {
            return None;
        }
        let det = c11 * c22 - c12 * c12;
        let num = self.weight_p * c22 + self.weight_q * c11;
        let d2 = det * det * self.scale;
        let d_c11 = (self.weight_q * det - num * c22) / d2;
        let d_c22 = (self.weight_p * det - num * c11) / d2;
        let d_c12 = 2.0 * num * c12 / d2;
        Some(
            self.g1
                .iter()
                .zip(&self.g2)
                .map(|(x1, x2)| {
                    // d Cov / d w_i, up to a shift common to all i.
                    let e11 = x1 * x1 - 2.0 * x1 * mu1;
                    let e22 = x2 * x2 - 2.0 * x2 * mu2;
                    let e12 = x1 * x2 - x1 * mu2 - mu1 * x2;
                    d_c11 * e11 + d_c22 * e22 + d_c12 * e12
                })
                .collect(),
        )
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(u: &[f64]) -> Vec<f64> {
    let mut sorted = u.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (j + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    u.iter().map(|v| (v - theta).max(0.0)).collect()
}

fn stationarity(w: &[f64], g: &[f64]) -> f64 {
    let step: Vec<f64> = w.iter().zip(g).map(|(a, b)| a - b).collect();
    project_simplex(&step)
        .iter()
        .zip(w)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

struct Descent {
    weights: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Spectral projected gradient: Barzilai-Borwein trial steps with a
/// non-monotone Armijo test along the projection arc. Near the optimum the
/// objective stops resolving changes in `w` long before the gradient does,
/// so the test allows a few ulps of slack and convergence is judged by
/// projected-gradient stationarity.
fn descend(obj: &SimplexObjective, start: Vec<f64>, settings: &OptimizerSettings) -> Descent {
    let mut w = start;
    let mut value = obj.value(&w);
    let mut grad = match obj.gradient(&w) {
        Some(g) => g,
        None => {
            return Descent {
                weights: w,
                value: f64::INFINITY,
                iterations: 0,
                converged: false,
            }
        }
    };
    let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let mut step = if gmax > 0.0 { 0.1 / gmax } else { 1.0 };
    let mut recent = std::collections::VecDeque::from([value]);
    let mut iterations = 0;
    while iterations < settings.max_iterations {
        iterations += 1;
        if stationarity(&w, &grad) <= settings.stationarity * value.max(1.0) {
            return Descent {
                weights: w,
                value,
                iterations,
                converged: true,
            };
        }
        let reference = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = 8.0 * f64::EPSILON * value.abs();
        let mut accepted = None;
        let mut trial_step = step;
        for _ in 0..80 {
            let trial: Vec<f64> = w.iter().zip(&grad).map(|(a, g)| a - trial_step * g).collect();
            let candidate = project_simplex(&trial);
            let decrease: f64 = grad
                .iter()
                .zip(candidate.iter().zip(&w))
                .map(|(g, (c, x))| g * (x - c))
                .sum();
            let v = obj.value(&candidate);
            if v.is_finite() && v <= reference - 1e-4 * decrease + slack {
                accepted = Some((candidate, v));
                break;
            }
            trial_step *= 0.5;
        }
        let Some((next, next_value)) = accepted else {
            // No descent direction left at machine precision.
            return Descent {
                weights: w,
                value,
                iterations,
                converged: true,
            };
        };
        let Some(next_grad) = obj.gradient(&next) else {
            break;
        };
        let s: Vec<f64> = next.iter().zip(&w).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        step = if sy > 0.0 {
            (ss / sy).clamp(1e-12, 1e12)
        } else {
            trial_step * 2.0
        };
        w = next;
        value = next_value;
        grad = next_grad;
        recent.push_back(value);
        if recent.len() > 10 {
            recent.pop_front();
        }
    }
    Descent {
        weights: w,
        value,
        iterations,
        converged: false,
    }
}

fn general(config: &SpinConfig, ensemble: Ensemble, settings: &OptimizerSettings) -> Result<OptimizationResult> {
    if settings.starts == 0 {
        return Err(domain("general-family search needs at least one start"));
    }
    let obj = SimplexObjective::new(config, ensemble, settings);
    let dim = 2 * config.spin as usize + 1;
    let mut rng = rng(settings.seed);
    let mut best: Option<Descent> = None;
    for _ in 0..settings.starts {
        // Uniform draw on the simplex (flat Dirichlet).
        let raw: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let start = raw.into_iter().map(|x| x / total).collect();
        let run = descend(&obj, start, settings);
        if best.as_ref().map_or(true, |b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let best_state = SingleAtomState::from_populations(config.spin, &renormalized(&best.weights))?;
    let (bound, objective) = evaluate(&best_state, config, ensemble, settings)?;
    let result = OptimizationResult {
        best_state,
        objective,
        bound,
        iterations: best.iterations,
        family: StateFamily::General,
    };
    if !best.converged {
        return Err(Error::NotConverged {
            iterations: best.iterations,
            best: Box::new(result),
        });
    }
    Ok(result)
}

fn renormalized(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub delta_p: f64,
    pub delta_q: f64,
}

/// Joint bounds of `coherent_state(F, theta, 0)` under the product ensemble
/// on the grid `theta_i = pi i / (samples + 1)`, `i = 1..=samples`.
pub fn scan_theta(spin: u32, atoms: u32, samples: usize) -> Result<Vec<ThetaRow>> {
    if samples < 3 {
        return Err(domain("theta scan needs at least 3 samples"));
    }
    let config = SpinConfig::new(spin, atoms)?;
    (1..=samples)
        .into_par_iter()
        .map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (samples + 1) as f64;
            let state = coherent_state(spin, theta, 0.0)?;
            let b = qcrb_simultaneous(&product_qfim(&state, &config), 1)?;
            Ok(ThetaRow {
                theta,
                delta_p: b.delta_p,
                delta_q: b.delta_q,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub atoms: u32,
    pub delta_p: f64,
    pub delta_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln Delta p` against `ln N`.
    pub slope_p: f64,
    pub slope_q: f64,
}

impl ScalingTable {
    /// Builds the table and fits both slopes.
    pub fn from_rows(rows: Vec<ScalingRow>) -> Result<Self> {
        let n: Vec<f64> = rows.iter().map(|r| f64::from(r.atoms)).collect();
        let dp: Vec<f64> = rows.iter().map(|r| r.delta_p).collect();
        let dq: Vec<f64> = rows.iter().map(|r| r.delta_q).collect();
        Ok(ScalingTable {
            slope_p: scaling_slope(&n, &dp)?,
            slope_q: scaling_slope(&n, &dq)?,
            rows,
        })
    }
}

pub(crate) fn check_atom_sweep(values: &[u32]) -> Result<()> {
    if values.len() < MIN_SCALING_POINTS {
        return Err(domain(format!(
            "scaling sweep needs at least {MIN_SCALING_POINTS} atom numbers, got {}",
            values.len()
        )));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("atom numbers must be strictly increasing"));
    }
    if values[0] < 1 {
        return Err(domain("atom numbers must be positive"));
    }
    Ok(())
}

/// Optimized joint bounds for each `N` and their log-log slopes.
pub fn scan_scaling(spin: u32, atom_values: &[u32], ensemble: Ensemble, family: StateFamily) -> Result<ScalingTable> {
    check_atom_sweep(atom_values)?;
    let rows = atom_values
        .par_iter()
        .map(|&n| {
            let r = optimize_sum_variance(spin, n, ensemble, family)?;
            Ok(ScalingRow {
                atoms: n,
                delta_p: r.bound.delta_p,
                delta_q: r.bound.delta_q,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScalingTable::from_rows(rows)
}

/// GHZ amplitudes that are individually optimal for `p`:
/// `(|F,F>^N + |F,-F>^N)/sqrt(2)`.
pub fn individual_p_state(spin: u32) -> Result<SingleAtomState> {
    three_amp_state(spin, C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), C64::new(0.0, 0.0))
}

/// GHZ amplitudes that are individually optimal for `q`:
/// `|F,F>^N / 2 + |F,0>^N / sqrt(2) + |F,-F>^N / 2`.
pub fn individual_q_state(spin: u32) -> Result<SingleAtomState> {
    three_amp_state(spin, C64::new(0.5, 0.0), C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
}

/// Individual-estimation bounds at equal resources: each parameter gets its
/// own optimal GHZ probe with `N/2` atoms.
pub fn individual_resource_bounds(spin: u32, atoms: u32) -> Result<PrecisionBound> {
    let config = SpinConfig::new(spin, atoms)?;
    // (N/2)^2 = N^2 / 4 for the GHZ information.
    let quarter = |s: &SingleAtomState| ghz_qfim(s, &config).scaled(0.25);
    let bp = qcrb_individual(&quarter(&individual_p_state(spin)?), 1)?;
    let bq = qcrb_individual(&quarter(&individual_q_state(spin)?), 1)?;
    Ok(PrecisionBound {
        delta_p: bp.delta_p,
        delta_q: bq.delta_q,
        mode: EstimationMode::Individual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub atoms: u32,
    pub simultaneous: PrecisionBound,
    pub individual: PrecisionBound,
}

/// Optimal simultaneous GHZ bounds next to the resource-matched individual
/// bounds for every `N`.
pub fn compare_simultaneous_individual(spin: u32, atom_values: &[u32]) -> Result<Vec<ComparisonRow>> {
    atom_values
        .par_iter()
        .map(|&n| {
            let sim = optimize_sum_variance(spin, n, Ensemble::Ghz, StateFamily::ThreeAmplitude)?;
            Ok(ComparisonRow {
                atoms: n,
                simultaneous: sim.bound,
                individual: individual_resource_bounds(spin, n)?,
            })
        })
        .collect()
}
