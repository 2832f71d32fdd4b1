//! Pure KD-positive states, their distributions, and KD-real tables.
//!
//! Every pure KD-positive state is a Weyl translate `M_chi0 T_g0 psi^H` of the
//! normalized indicator `psi^H` of a subgroup `H`. Its distribution `eta^H_{g0,chi0}`
//! is `1/|G|` on the block `(g0 + H) x (chi0 + H^perp)` and zero elsewhere.

use std::collections::HashSet;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{KdError, Result};
use crate::group::{all_subgroups, GroupSpec, Subgroup};
use crate::kd::{self, KdDistribution, Operator, StateVector};
use crate::linalg;

/// Default tolerance for positivity verdicts.
pub const DEFAULT_EPS: f64 = 1e-9;
const RANK_THRESHOLD: f64 = 1e-9;

/// `psi^H_{g0,chi0}` together with its label.
#[derive(Debug, Clone)]
pub struct LabeledPureState {
    pub subgroup: Subgroup,
    pub annihilator: Subgroup,
    /// Coset representative in `G/H`.
    pub g0: usize,
    /// Coset representative in `G^/H^perp`.
    pub chi0: usize,
    pub vector: StateVector,
}

impl LabeledPureState {
    pub fn new(subgroup: &Subgroup, g0: usize, chi0: usize) -> Self {
        let vector = kd::weyl_apply(&subgroup_state(subgroup), g0, chi0);
        Self { subgroup: subgroup.clone(), annihilator: subgroup.annihilator(), g0, chi0, vector }
    }

    pub fn eta(&self) -> KdDistribution {
        eta_with(&self.subgroup, &self.annihilator, self.g0, self.chi0)
    }

    /// `eta` as a real table, without going through complex values.
    pub fn eta_real(&self) -> Vec<f64> {
        eta_real_with(&self.subgroup, &self.annihilator, self.g0, self.chi0)
    }

    pub fn projector(&self) -> Operator {
        self.vector.projector()
    }

    /// Flat indices of the support block of `eta`.
    pub fn support(&self) -> Vec<usize> {
        let g = self.subgroup.group();
        let n = g.order();
        let mut cells: Vec<usize> = self
            .subgroup
            .indices()
            .iter()
            .flat_map(|&h| {
                let row = g.add_idx(self.g0, h);
                self.annihilator.indices().iter().map(move |&k| row * n + g.add_idx(self.chi0, k))
            })
            .collect();
        cells.sort_unstable();
        cells
    }

    pub fn label(&self) -> String {
        let g = self.subgroup.group();
        format!("H={:?} g0={} chi0={}", self.subgroup, g.element(self.g0), g.element(self.chi0))
    }
}

/// `psi^H = |H|^{-1/2} 1_H`.
pub fn subgroup_state(h: &Subgroup) -> StateVector {
    let g = h.group();
    let v = (h.len() as f64).sqrt().recip();
    let amplitudes = (0..g.order())
        .map(|x| if h.contains(x) { C64::new(v, 0.0) } else { C64::new(0.0, 0.0) })
        .collect();
    StateVector { group: g.clone(), amplitudes }
}

/// All pure KD-positive states: one per subgroup `H` and per pair of coset
/// representatives `(g0, chi0)` in `G/H x G^/H^perp`.
///
/// Fails if two labels produce the same distribution.
pub fn pure_positive_states(group: &GroupSpec) -> Result<Vec<LabeledPureState>> {
    let mut states = Vec::new();
    let mut supports = HashSet::new();
    for h in all_subgroups(group) {
        let perp = h.annihilator();
        for &g0 in &h.coset_representatives() {
            for &chi0 in &perp.coset_representatives() {
                let s = LabeledPureState::new(&h, g0, chi0);
                if !supports.insert(s.support()) {
                    return Err(KdError::DuplicateState(s.label()));
                }
                states.push(s);
            }
        }
    }
    Ok(states)
}

fn eta_real_with(h: &Subgroup, perp: &Subgroup, g0: usize, chi0: usize) -> Vec<f64> {
    let g = h.group();
    let n = g.order();
    let v = 1.0 / n as f64;
    let mut out = vec![0.0; n * n];
    for &a in h.indices() {
        let row = g.add_idx(g0, a);
        for &k in perp.indices() {
            out[row * n + g.add_idx(chi0, k)] = v;
        }
    }
    out
}

fn eta_with(h: &Subgroup, perp: &Subgroup, g0: usize, chi0: usize) -> KdDistribution {
    let values = eta_real_with(h, perp, g0, chi0).into_iter().map(|x| C64::new(x, 0.0)).collect();
    KdDistribution { group: h.group().clone(), values }
}

/// `eta^H_{g0,chi0}(g, chi) = |G|^{-1} 1_H(g - g0) 1_{H^perp}(chi - chi0)`.
pub fn eta(h: &Subgroup, g0: usize, chi0: usize) -> KdDistribution {
    eta_with(h, &h.annihilator(), g0, chi0)
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub is_state: bool,
    pub hermitian_error: f64,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    pub min_kd_value: f64,
    pub max_imag_kd: f64,
    pub verdict: bool,
}

/// State and KD-positivity diagnostics for an operator.
///
/// Eigenvalues are taken from the Hermitian part, so non-Hermitian input still
/// yields a report (with `is_state == false`).
pub fn check_kd_positive(rho: &Operator, eps: f64) -> PositivityReport {
    let hermitian_error = rho.hermitian_deviation();
    let sym = rho.add(&rho.adjoint()).expect("same group").scaled(C64::new(0.5, 0.0));
    let min_eigenvalue = kd::hermitian_eigenvalues(&sym).map(|ev| ev[0]).unwrap_or(f64::NAN);
    let trace_error = (rho.trace() - 1.0).norm();
    let q = kd::kd_lower(rho);
    let min_kd_value = q.min_real();
    let max_imag_kd = q.max_imag();
    let is_state = hermitian_error <= kd::IDENTITY_TOL && trace_error <= kd::IDENTITY_TOL && min_eigenvalue >= -eps;
    let verdict = is_state && min_kd_value >= -eps && max_imag_kd <= eps;
    PositivityReport { is_state, hermitian_error, min_eigenvalue, trace_error, min_kd_value, max_imag_kd, verdict }
}

/// Largest `|sum_chi chi(g - g') (Q(g, chi) - Q(g', chi))|` over pairs `(g, g')`.
pub fn condsar_residual_real(group: &GroupSpec, q: &[f64]) -> f64 {
    let n = group.order();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let d = group.sub_idx(x, y);
            let s: C64 = (0..n).map(|chi| group.character(chi, d) * (q[x * n + chi] - q[y * n + chi])).sum();
            worst = worst.max(s.norm());
        }
    }
    worst
}

/// The condSAR residual of a real table; it vanishes exactly when
/// `kd_lower_inverse(q)` is self-adjoint.
pub fn condsar_residual(q: &KdDistribution) -> Result<f64> {
    let re = q.real_values(kd::IDENTITY_TOL)?;
    Ok(condsar_residual_real(&q.group, &re))
}

/// Real rank of the set of all `eta` tables.
pub fn eta_rank(group: &GroupSpec) -> Result<usize> {
    let n = group.order();
    let states = pure_positive_states(group)?;
    // rows scaled to 0/1 entries
    let data: Vec<f64> = states.iter().flat_map(|s| s.eta_real().into_iter().map(move |x| x * n as f64)).collect();
    Ok(linalg::rank(states.len(), n * n, &data, RANK_THRESHOLD))
}

/// Dimension of the real solution space of the condSAR equations, as
/// `|G|^2 - rank` of the stacked real and imaginary parts.
pub fn condsar_nullity(group: &GroupSpec) -> usize {
    let n = group.order();
    let cols = n * n;
    let mut data = Vec::new();
    let mut rows = 0;
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let d = group.sub_idx(x, y);
            let mut re = vec![0.0; cols];
            let mut im = vec![0.0; cols];
            for chi in 0..n {
                let c = group.character(chi, d);
                re[x * n + chi] += c.re;
                im[x * n + chi] += c.im;
                re[y * n + chi] -= c.re;
                im[y * n + chi] -= c.im;
            }
            data.extend(re);
            data.extend(im);
            rows += 2;
        }
    }
    cols - linalg::rank(rows, cols, &data, RANK_THRESHOLD)
}

/// Dimension of the space of KD-real observables.
///
/// Computed as the rank of the `eta` family and cross-checked against the
/// nullity of the condSAR system; disagreement is an error.
pub fn kdr_space_dimension(group: &GroupSpec) -> Result<usize> {
    let r = eta_rank(group)?;
    let k = condsar_nullity(group);
    if r != k {
        return Err(KdError::CertificateFailed(format!("eta rank {r} != condSAR nullity {k}")));
    }
    Ok(r)
}

/// Largest deviation from `H x H^perp` periodicity.
pub fn periodicity_defect(group: &GroupSpec, table: &[f64], h: &Subgroup, perp: &Subgroup) -> f64 {
    let n = group.order();
    let mut worst = 0.0f64;
    for x in 0..n {
        for chi in 0..n {
            let v = table[x * n + chi];
            for &a in h.generator_indices() {
                worst = worst.max((table[group.add_idx(x, a) * n + chi] - v).abs());
            }
            for &k in perp.generator_indices() {
                worst = worst.max((table[x * n + group.add_idx(chi, k)] - v).abs());
            }
        }
    }
    worst
}

/// Coefficients of a periodic table on the `eta^H` basis: `|G| f(g0, chi0)`
/// for each pair of coset representatives, in `(g0, chi0)` order.
pub fn eta_coefficients(table: &[f64], h: &Subgroup, perp: &Subgroup) -> Vec<(usize, usize, f64)> {
    let g = h.group();
    let n = g.order();
    let mut out = Vec::new();
    for &g0 in &h.coset_representatives() {
        for &chi0 in &perp.coset_representatives() {
            out.push((g0, chi0, n as f64 * table[g0 * n + chi0]));
        }
    }
    out
}

/// `sum c * eta^H_{g0,chi0}` as a real table.
pub fn from_eta_coefficients(h: &Subgroup, perp: &Subgroup, coeffs: &[(usize, usize, f64)]) -> Vec<f64> {
    let g = h.group();
    let n = g.order();
    let mut out = vec![0.0; n * n];
    for &(g0, chi0, c) in coeffs {
        for (o, e) in out.iter_mut().zip(eta_real_with(h, perp, g0, chi0)) {
            *o += c * e;
        }
    }
    out
}
