//! Feasibility of `{x >= 0 : A x = b}` by the simplex method.
//!
//! Rows are scaled so `b` has unit max-norm and flipped so `b >= 0`, then one
//! artificial variable per row starts the basis. Phase one minimizes the sum
//! of artificials with Bland's rule. A positive optimum yields a Farkas
//! certificate `y` with `y^T A <= 0`, `y^T b > 0`, read off the final reduced
//! costs of the artificial columns. The problem has no objective of its own,
//! so the phase-one basis is final. Every outcome is re-checked before it is
//! returned.

use serde::Serialize;

use crate::error::{KdError, Result};

/// Reconstruction tolerance for feasible points (in scaled units).
pub const FEASIBLE_TOL: f64 = 1e-8;
/// Slack allowed in `y^T A <= 0`.
pub const DUAL_TOL: f64 = 1e-10;
/// Required margin in `y^T b > 0`.
pub const FARKAS_MARGIN: f64 = 1e-8;

const COST_EPS: f64 = 1e-11;
const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

/// Dense problem data, `a` row-major `rows x cols`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LpProblem {
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(KdError::MalformedLp("empty problem".into()));
        }
        if a.len() != rows * cols {
            return Err(KdError::DimensionMismatch { expected: rows * cols, found: a.len() });
        }
        if b.len() != rows {
            return Err(KdError::DimensionMismatch { expected: rows, found: b.len() });
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(KdError::MalformedLp("non-finite entry".into()));
        }
        Ok(Self { rows, cols, a, b })
    }

    /// Builds the problem from columns of `A`.
    pub fn from_columns(columns: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let rows = b.len();
        let cols = columns.len();
        let mut a = vec![0.0; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(KdError::DimensionMismatch { expected: rows, found: col.len() });
            }
            for (i, &v) in col.iter().enumerate() {
                a[i * cols + j] = v;
            }
        }
        Self::new(rows, cols, a, b)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.a[i * self.cols + j] * x[j]).sum()).collect()
    }

    /// `y^T A`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.a[i * self.cols + j] * y[i]).sum()).collect()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    fn scale(&self) -> f64 {
        self.b.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LpOutcome {
    Feasible { weights: Vec<f64> },
    Infeasible { certificate: Vec<f64> },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible { .. })
    }
}

/// Checks `x >= 0` and `|A x - b|_inf < FEASIBLE_TOL * max|b|`.
pub fn verify_feasible(p: &LpProblem, x: &[f64]) -> Result<()> {
    if x.len() != p.cols {
        return Err(KdError::DimensionMismatch { expected: p.cols, found: x.len() });
    }
    if let Some(v) = x.iter().find(|&&v| v < -DUAL_TOL) {
        return Err(KdError::CertificateFailed(format!("negative weight {v:e}")));
    }
    let scale = p.scale().max(f64::MIN_POSITIVE);
    let resid = p.apply(x).iter().zip(&p.b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
    if resid >= FEASIBLE_TOL {
        return Err(KdError::CertificateFailed(format!("reconstruction residual {resid:e}")));
    }
    Ok(())
}

/// Checks the Farkas inequalities for a certificate normalized to unit max-norm.
pub fn verify_infeasible(p: &LpProblem, y: &[f64]) -> Result<()> {
    if y.len() != p.rows {
        return Err(KdError::DimensionMismatch { expected: p.rows, found: y.len() });
    }
    let scale = p.scale().max(f64::MIN_POSITIVE);
    let worst = p.apply_transpose(y).into_iter().fold(f64::NEG_INFINITY, f64::max) / scale;
    if worst > DUAL_TOL {
        return Err(KdError::CertificateFailed(format!("y^T A has entry {worst:e} > 0")));
    }
    let yb = y.iter().zip(&p.b).map(|(a, b)| a * b).sum::<f64>() / scale;
    if yb <= FARKAS_MARGIN {
        return Err(KdError::CertificateFailed(format!("y^T b = {yb:e} not positive")));
    }
    Ok(())
}

struct Tableau {
    m: usize,
    width: usize,
    // m rows of [A | I | rhs], then the reduced-cost row [d | d_art | -objective]
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        for k in 0..w {
            self.t[r * w + k] /= p;
        }
        self.t[r * w + c] = 1.0;
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == 0.0 {
                continue;
            }
            for k in 0..w {
                self.t[i * w + k] -= f * self.t[r * w + k];
            }
            self.t[i * w + c] = 0.0;
        }
        self.basis[r] = c;
    }
}

/// Decides feasibility of `{x >= 0 : A x = b}`.
///
/// Deterministic for a given input. Errors if the result fails its own
/// certificate check or the pivot limit is hit.
pub fn lp_feasibility(p: &LpProblem) -> Result<LpOutcome> {
    let (m, n) = (p.rows, p.cols);
    let scale = p.scale();
    if scale == 0.0 {
        return Ok(LpOutcome::Feasible { weights: vec![0.0; n] });
    }
    let sign: Vec<f64> = p.b.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect();
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let s = sign[i] / scale;
        for j in 0..n {
            t[i * width + j] = p.a[i * n + j] * s;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + n + m] = p.b[i] * s;
    }
    // phase-one costs: 0 on x, 1 on artificials; reduced costs d = c - c_B B^-1 A
    for j in 0..n {
        t[m * width + j] = -(0..m).map(|i| t[i * width + j]).sum::<f64>();
    }
    t[m * width + n + m] = -(0..m).map(|i| t[i * width + n + m]).sum::<f64>();
    let mut tab = Tableau { m, width, t, basis: (n..n + m).collect() };

    let mut pivots = 0;
    loop {
        // Bland: lowest-index structural column with negative reduced cost
        let Some(c) = (0..n).find(|&j| tab.at(m, j) < -COST_EPS) else { break };
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab.at(i, c);
            if a <= PIVOT_EPS {
                continue;
            }
            let ratio = tab.at(i, n + m) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((r, br)) => {
                    if ratio < br - 1e-14 || (ratio <= br + 1e-14 && tab.basis[i] < tab.basis[r]) {
                        Some((i, ratio))
                    } else {
                        Some((r, br))
                    }
                }
            };
        }
        // phase one is bounded below by zero, so some row always qualifies
        let Some((r, _)) = best else { break };
        tab.pivot(r, c);
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(KdError::PivotLimit(MAX_PIVOTS));
        }
    }

    let infeasibility: f64 = (0..m).filter(|&i| tab.basis[i] >= n).map(|i| tab.at(i, n + m)).sum();
    if infeasibility <= FEASIBLE_TOL * 1e-1 {
        let mut x = vec![0.0; n];
        for i in 0..m {
            if tab.basis[i] < n {
                x[tab.basis[i]] = tab.at(i, n + m).max(0.0);
            }
        }
        verify_feasible(p, &x)?;
        Ok(LpOutcome::Feasible { weights: x })
    } else {
        // dual of the scaled, sign-flipped system: y'_i = 1 - d_{n+i}
        let mut y: Vec<f64> = (0..m).map(|i| (1.0 - tab.at(m, n + i)) * sign[i]).collect();
        let norm = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        y.iter_mut().for_each(|v| *v /= norm);
        verify_infeasible(p, &y)?;
        Ok(LpOutcome::Infeasible { certificate: y })
    }
}
