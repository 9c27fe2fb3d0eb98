//! Real symmetric tridiagonal eigensolver (implicit QL with Wilkinson-type
//! shifts) plus inverse iteration for the lowest eigenvector.

use crate::error::{domain, numerical, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 64;

/// Eigenvalues in ascending order and, optionally, orthonormal eigenvectors
/// stored column-major: `vectors[j * n + i]` is component `i` of vector `j`.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
    n: usize,
}

impl TridiagonalEigen {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Eigenvector `j` (ascending order), if vectors were computed.
    pub fn vector(&self, j: usize) -> Option<&[f64]> {
        self.vectors.as_ref().map(|v| &v[j * self.n..(j + 1) * self.n])
    }
}

fn check_input(diag: &[f64], off: &[f64]) -> Result<()> {
    if diag.is_empty() {
        return Err(domain("empty tridiagonal matrix"));
    }
    if off.len() + 1 != diag.len() {
        return Err(domain(format!(
            "off-diagonal length {} does not match dimension {}",
            off.len(),
            diag.len()
        )));
    }
    if diag.iter().chain(off).any(|v| !v.is_finite()) {
        return Err(domain("tridiagonal matrix has non-finite entries"));
    }
    Ok(())
}

/// Full eigendecomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub/super-diagonal `off`.
pub fn eigen(diag: &[f64], off: &[f64], with_vectors: bool) -> Result<TridiagonalEigen> {
    check_input(diag, off)?;
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // v[k * n + i]: row k, column i (column i is an eigenvector).
    let mut v = if with_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] == 0, so m < n always holds here.
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(numerical("tridiagonal QL iteration did not converge"));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_mut() {
                        for k in 0..n {
                            let hk = v[k * n + i + 1];
                            v[k * n + i + 1] = s * v[k * n + i] + c * hk;
                            v[k * n + i] = c * v[k * n + i] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| d[*a].total_cmp(&d[*b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = v.map(|v| {
        let mut out = vec![0.0; n * n];
        for (j, &col) in order.iter().enumerate() {
            for k in 0..n {
                out[j * n + k] = v[k * n + col];
            }
        }
        out
    });
    Ok(TridiagonalEigen { values, vectors, n })
}

/// Lowest eigenvalue, its eigenvector (unit norm, largest component
/// positive) and the gap to the next eigenvalue (`0` for 1x1 input).
pub fn lowest_eigenpair(diag: &[f64], off: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    let spectrum = eigen(diag, off, false)?;
    let n = diag.len();
    let e0 = spectrum.values[0];
    let gap = if n > 1 { spectrum.values[1] - e0 } else { 0.0 };
    if n == 1 {
        return Ok((e0, vec![1.0], gap));
    }

    let scale = diag
        .iter()
        .map(|x| x.abs())
        .chain(off.iter().map(|x| 2.0 * x.abs()))
        .fold(1.0f64, f64::max);
    let shift = e0 - 1e-10 * scale;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..4 {
        x = solve_shifted(diag, off, shift, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }

    let residual = residual_norm(diag, off, e0, &x);
    let x = if residual.is_finite() && residual <= 1e-9 * scale && gap > 1e-12 * scale {
        x
    } else {
        // Near-degenerate or failed inverse iteration: fall back to full QL.
        let full = eigen(diag, off, true)?;
        full.vector(0).expect("vectors requested").to_vec()
    };
    Ok((e0, fix_sign(x), gap))
}

fn fix_sign(mut x: Vec<f64>) -> Vec<f64> {
    let lead = x
        .iter()
        .copied()
        .fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
    if lead < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    x
}

/// Solves `(T - shift I) y = b` by LDL^T without pivoting; the shift sits
/// below the spectrum so the factorization is positive definite.
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut dd = vec![0.0; n];
    let mut ll = vec![0.0; n];
    dd[0] = diag[0] - shift;
    for i in 1..n {
        ll[i] = off[i - 1] / dd[i - 1];
        dd[i] = diag[i] - shift - ll[i] * off[i - 1];
    }
    let mut y = b.to_vec();
    for i in 1..n {
        y[i] -= ll[i] * y[i - 1];
    }
    for i in 0..n {
        y[i] /= dd[i];
    }
    for i in (0..n - 1).rev() {
        y[i] -= ll[i + 1] * y[i + 1];
    }
    y
}

fn residual_norm(diag: &[f64], off: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let n = diag.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - lambda) * x[i];
        if i > 0 {
            r += off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            r += off[i] * x[i + 1];
        }
        acc += r * r;
    }
    acc.sqrt()
}
