//! Small dense linear algebra: Hermitian eigenvalues, rank, SPD solves.
//!
//! Sizes here never exceed a few hundred, so everything is plain row-major
//! `Vec<f64>` / `Vec<C64>` with no blocking.

use num_complex::Complex64 as C64;

use crate::error::{KdError, Result};

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Largest `|A[i][j] - conj(A[j][i])|`.
pub fn hermitian_deviation(n: usize, a: &[C64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[i * n + j] - a[j * n + i].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off < JACOBI_TOL * scale {
            let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(KdError::NoConvergence(JACOBI_MAX_SWEEPS))
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Works on the real symmetric embedding `[[Re, -Im], [Im, Re]]`, whose
/// spectrum is the Hermitian spectrum with every value doubled.
pub fn hermitian_eigenvalues(n: usize, a: &[C64]) -> Result<Vec<f64>> {
    let dev = hermitian_deviation(n, a);
    if dev > 1e-8 {
        return Err(KdError::NotHermitian(dev));
    }
    let m = 2 * n;
    let mut real = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            // symmetrize so the embedding is exactly symmetric
            let z = 0.5 * (a[i * n + j] + a[j * n + i].conj());
            real[i * m + j] = z.re;
            real[(i + n) * m + (j + n)] = z.re;
            real[(i + n) * m + j] = z.im;
            real[i * m + (j + n)] = -z.im;
        }
    }
    let doubled = symmetric_eigenvalues(m, &real)?;
    Ok(doubled.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Rank by Gaussian elimination with partial pivoting; columns whose best
/// pivot is below `threshold` are treated as dependent.
pub fn rank(rows: usize, cols: usize, data: &[f64], threshold: f64) -> usize {
    let mut m = data.to_vec();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, best) = (r..rows)
            .map(|i| (i, m[i * cols + c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < threshold {
            continue;
        }
        if piv != r {
            for k in 0..cols {
                m.swap(piv * cols + k, r * cols + k);
            }
        }
        let p = m[r * cols + c];
        for i in r + 1..rows {
            let f = m[i * cols + c] / p;
            if f != 0.0 {
                for k in c..cols {
                    m[i * cols + k] -= f * m[r * cols + k];
                }
            }
        }
        r += 1;
    }
    r
}

/// Solves `M x = b` for symmetric positive definite `M` by Cholesky.
pub fn cholesky_solve(n: usize, m: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(KdError::DecompositionInfeasible(s));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Ok(y)
}
