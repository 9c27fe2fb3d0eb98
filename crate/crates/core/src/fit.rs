//! One-dimensional search and log-log slope fitting.

use crate::error::{domain, Result};

/// Minimum number of points accepted by [`scaling_slope`].
pub const MIN_SCALING_POINTS: usize = 4;

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(domain("x and y must have the same length"));
    }
    if x.len() < 2 {
        return Err(domain("a slope needs at least two points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(domain("slope fit requires finite data"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    if sxx == 0.0 {
        return Err(domain("x values are all equal"));
    }
    Ok(sxy / sxx)
}

/// Slope of `ln y` against `ln x` over at least [`MIN_SCALING_POINTS`] points.
pub fn scaling_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < MIN_SCALING_POINTS {
        return Err(domain(format!(
            "log-log fit needs at least {MIN_SCALING_POINTS} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| *v <= 0.0) {
        return Err(domain("log-log fit requires positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    ols_slope(&lx, &ly)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`. Non-finite values count as `+inf`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Minimum {
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let mut evaluations = 2;
    // Stop on bracket width or when the interior points stop moving.
    while (b - a) > tol && evaluations < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
        evaluations += 1;
    }
    if fc <= fd {
        Minimum {
            x: c,
            value: fc,
            evaluations,
        }
    } else {
        Minimum {
            x: d,
            value: fd,
            evaluations,
        }
    }
}

/// Scan `points` equally spaced values in `[lo, hi]` (endpoints included),
/// then refine around the best grid point by golden section.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize, tol: f64) -> Result<Minimum> {
    if points < 2 {
        return Err(domain("search grid needs at least two points"));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(domain(format!("invalid search interval [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let grid = |i: usize| if i + 1 == points { hi } else { lo + step * i as f64 };
    let mut best = (0usize, f64::INFINITY);
    for i in 0..points {
        let v = f(grid(i));
        if v < best.1 {
            best = (i, v);
        }
    }
    let (i, v) = best;
    if !v.is_finite() {
        return Ok(Minimum {
            x: grid(i),
            value: v,
            evaluations: points,
        });
    }
    let refined = golden_section(&mut f, grid(i.saturating_sub(1)), grid((i + 1).min(points - 1)), tol);
    let out = if refined.value < v {
        refined
    } else {
        Minimum {
            x: grid(i),
            value: v,
            evaluations: 0,
        }
    };
    Ok(Minimum {
        evaluations: points + refined.evaluations,
        ..out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = (1..=6).map(|i| f64::from(i) * 8.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-0.5)).collect();
        assert!((scaling_slope(&x, &y).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn refuses_short_fits() {
        assert!(scaling_slope(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(scaling_slope(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, f64::INFINITY, 4.0]).is_err());
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((m.x - 0.3).abs() < 1e-8);
    }

    #[test]
    fn grid_refinement_beats_grid() {
        let m = grid_then_golden(|x| (x - 0.123_456).powi(2), 0.0, 1.0, 11, 1e-12).unwrap();
        assert!((m.x - 0.123_456).abs() < 1e-7);
        assert!(grid_then_golden(|x| x, 0.0, 1.0, 1, 1e-9).is_err());
    }
}
