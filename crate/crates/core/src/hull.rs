//! Convex hull of the pure KD-positive states and periodic decompositions.
//!
//! Membership of `rho` in `conv{psi^H_{g0,chi0}}` is an LP over the `eta`
//! tables: find `w >= 0` with `sum w eta = Q[rho]` and `sum w = 1`. An
//! infeasible outcome comes with a witness table `W` that pairs nonnegatively
//! with every `eta` and negatively with `Q[rho]`.
//!
//! For subgroup chains `H_0 < H_1 < ... < H_N` any decomposition
//! `f = sum f_i` into `H_i x H_i^perp`-periodic parts of a nonnegative `f` can
//! be repaired into one with nonnegative parts (see [`greedy_nonnegative_repair`]).

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{KdError, Result};
use crate::group::{is_chain, GroupSpec, Subgroup, SubgroupRepr};
use crate::kd::{self, KdDistribution, Operator};
use crate::linalg;
use crate::lp::{self, LpOutcome, LpProblem};
use crate::positivity::{self, LabeledPureState};

/// Re-sum tolerance for decompositions.
pub const DECOMPOSITION_TOL: f64 = 1e-9;
/// Allowed negativity in "nonnegative" parts and witness pairings.
pub const NONNEG_TOL: f64 = 1e-10;
const RIDGE: f64 = 1e-12;

/// Outcome of the hull membership test.
#[derive(Debug, Clone)]
pub enum HullMembership {
    /// `rho = sum weights[i] |psi_i><psi_i|` over `pure_positive_states(G)`.
    Feasible { weights: Vec<f64> },
    /// `witness` pairs `>= 0` with every `eta` and `< 0` with `Q[rho]`.
    Infeasible { certificate: Vec<f64>, witness: KdDistribution },
}

impl HullMembership {
    pub fn is_feasible(&self) -> bool {
        matches!(self, HullMembership::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&KdDistribution> {
        match self {
            HullMembership::Infeasible { witness, .. } => Some(witness),
            HullMembership::Feasible { .. } => None,
        }
    }
}

/// The membership LP: columns are flattened `eta` tables plus a trailing 1,
/// the right-hand side is `Re Q[rho]` plus a trailing 1.
pub fn membership_problem(states: &[LabeledPureState], rho: &Operator) -> Result<LpProblem> {
    let q = kd::kd_lower(rho);
    let mut b: Vec<f64> = q.values.iter().map(|z| z.re).collect();
    b.push(1.0);
    let columns: Vec<Vec<f64>> = states
        .iter()
        .map(|s| {
            let mut c = s.eta_real();
            c.push(1.0);
            c
        })
        .collect();
    LpProblem::from_columns(&columns, b)
}

/// Decides whether `rho` is a convex combination of pure KD-positive states.
///
/// Both outcomes are verified before returning: a feasible one by rebuilding
/// `rho` from the weights, an infeasible one by checking the witness against
/// every `eta` and against `Q[rho]`.
pub fn membership_conv_pure(rho: &Operator) -> Result<HullMembership> {
    let states = positivity::pure_positive_states(&rho.group)?;
    membership_with_states(&states, rho)
}

/// [`membership_conv_pure`] against a precomputed state list.
pub fn membership_with_states(states: &[LabeledPureState], rho: &Operator) -> Result<HullMembership> {
    let problem = membership_problem(states, rho)?;
    match lp::lp_feasibility(&problem)? {
        LpOutcome::Feasible { weights } => {
            let rebuilt = rebuild(states, &weights);
            let err = rebuilt.max_abs_diff(rho);
            if err >= lp::FEASIBLE_TOL {
                return Err(KdError::CertificateFailed(format!("hull reconstruction error {err:e}")));
            }
            Ok(HullMembership::Feasible { weights })
        }
        LpOutcome::Infeasible { certificate } => {
            let witness = witness_from_certificate(&rho.group, &certificate);
            verify_witness(states, &witness, rho)?;
            Ok(HullMembership::Infeasible { certificate, witness })
        }
    }
}

/// `W = -(y_cells + y_last)`: since every `eta` and `Q[rho]` sum to one, the
/// trailing multiplier folds into a constant shift.
pub fn witness_from_certificate(group: &GroupSpec, y: &[f64]) -> KdDistribution {
    let n2 = group.order() * group.order();
    let shift = y[n2];
    let values = y[..n2].iter().map(|&v| C64::new(-(v + shift), 0.0)).collect();
    KdDistribution { group: group.clone(), values }
}

/// Checks `<W, eta> >= -NONNEG_TOL` for every state and `<W, Q[rho]> < -FARKAS_MARGIN`.
pub fn verify_witness(states: &[LabeledPureState], witness: &KdDistribution, rho: &Operator) -> Result<()> {
    let w = witness.real_values(kd::IDENTITY_TOL)?;
    for s in states {
        let v: f64 = w.iter().zip(s.eta_real()).map(|(a, b)| a * b).sum();
        if v < -NONNEG_TOL {
            return Err(KdError::CertificateFailed(format!("witness pairs to {v:e} with {}", s.label())));
        }
    }
    let v = witness.pairing(&kd::kd_lower(rho))?.re;
    if v >= -lp::FARKAS_MARGIN {
        return Err(KdError::CertificateFailed(format!("witness pairs to {v:e} with the state")));
    }
    Ok(())
}

/// `sum w_i |psi_i><psi_i|`.
pub fn rebuild(states: &[LabeledPureState], weights: &[f64]) -> Operator {
    let mut rho = Operator::zeros(&states[0].vector.group);
    for (s, &w) in states.iter().zip(weights) {
        if w != 0.0 {
            rho = rho.add(&s.projector().scaled(C64::new(w, 0.0))).expect("same group");
        }
    }
    rho
}

/// A real table on `G x G^` (row = `g`, column = `chi`).
#[derive(Debug, Clone, PartialEq)]
pub struct RealTable {
    pub group: GroupSpec,
    pub values: Vec<f64>,
}

impl RealTable {
    pub fn new(group: GroupSpec, values: Vec<f64>) -> Result<Self> {
        let n2 = group.order() * group.order();
        if values.len() != n2 {
            return Err(KdError::DimensionMismatch { expected: n2, found: values.len() });
        }
        Ok(Self { group, values })
    }

    pub fn zeros(group: &GroupSpec) -> Self {
        Self { group: group.clone(), values: vec![0.0; group.order() * group.order()] }
    }

    /// Real part of a KD table; rejects imaginary parts above `1e-10`.
    pub fn from_kd(q: &KdDistribution) -> Result<Self> {
        Ok(Self { group: q.group.clone(), values: q.real_values(kd::IDENTITY_TOL)? })
    }

    pub fn to_kd(&self) -> KdDistribution {
        KdDistribution { group: self.group.clone(), values: self.values.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &RealTable) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn add_assign(&mut self, other: &RealTable) {
        self.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += b);
    }

    pub fn sub_assign(&mut self, other: &RealTable) {
        self.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a -= b);
    }
}

/// Projection onto `H x H^perp`-periodic tables: each orbit
/// `(g0 + H) x (chi0 + H^perp)` is replaced by its mean, written to every cell
/// of the orbit so the result is exactly periodic.
pub fn periodic_average(table: &RealTable, h: &Subgroup) -> RealTable {
    let perp = h.annihilator();
    periodic_average_with(table, h, &perp)
}

fn periodic_average_with(table: &RealTable, h: &Subgroup, perp: &Subgroup) -> RealTable {
    let g = &table.group;
    let n = g.order();
    let mut out = vec![0.0; n * n];
    let count = (h.len() * perp.len()) as f64;
    for &g0 in &h.coset_representatives() {
        for &chi0 in &perp.coset_representatives() {
            let cells: Vec<usize> = h
                .indices()
                .iter()
                .flat_map(|&a| {
                    let row = g.add_idx(g0, a);
                    perp.indices().iter().map(move |&k| row * n + g.add_idx(chi0, k))
                })
                .collect();
            let mean = cells.iter().map(|&c| table.values[c]).sum::<f64>() / count;
            for c in cells {
                out[c] = mean;
            }
        }
    }
    RealTable { group: g.clone(), values: out }
}

/// Parts `Q_H`, one per subgroup, that sum to a table.
#[derive(Debug, Clone)]
pub struct PeriodicDecomposition {
    pub parts: Vec<(Subgroup, RealTable)>,
}

impl PeriodicDecomposition {
    pub fn total(&self) -> Option<RealTable> {
        let first = self.parts.first()?;
        let mut acc = RealTable::zeros(&first.1.group);
        for (_, t) in &self.parts {
            acc.add_assign(t);
        }
        Some(acc)
    }

    /// Smallest entry over all parts.
    pub fn min_entry(&self) -> f64 {
        self.parts.iter().map(|(_, t)| t.min()).fold(f64::INFINITY, f64::min)
    }

    /// Largest periodicity defect over all parts.
    pub fn periodicity_defect(&self) -> f64 {
        self.parts
            .iter()
            .map(|(h, t)| positivity::periodicity_defect(&t.group, &t.values, h, &h.annihilator()))
            .fold(0.0, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_entry() >= -NONNEG_TOL
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionPartJson {
    pub subgroup: SubgroupRepr,
    pub elements: Vec<crate::group::GroupElement>,
    pub values: Vec<Vec<f64>>,
}

impl PeriodicDecomposition {
    pub fn to_json(&self) -> Vec<DecompositionPartJson> {
        self.parts
            .iter()
            .map(|(h, t)| DecompositionPartJson {
                subgroup: SubgroupRepr::from(h),
                elements: h.elements(),
                values: t.values.chunks(t.group.order()).map(|r| r.to_vec()).collect(),
            })
            .collect()
    }
}

/// Some decomposition of a condSAR table along a subgroup family.
///
/// Solves the ridge-regularized normal equations of `q = sum_H sum c 1_{block}`
/// over the block indicators of every `H` in `family`, then forces exact
/// periodicity by averaging. When the trivial subgroup is in the family the
/// leftover residual is added to its part (every table is `{0} x G^`-periodic).
pub fn decompose_into_periodic(q: &RealTable, family: &[Subgroup]) -> Result<PeriodicDecomposition> {
    let g = &q.group;
    let n = g.order();
    let n2 = n * n;
    let residual = positivity::condsar_residual_real(g, &q.values);
    if residual > DECOMPOSITION_TOL {
        return Err(KdError::DecompositionInfeasible(residual));
    }
    let perps: Vec<Subgroup> = family.iter().map(Subgroup::annihilator).collect();

    // block indicators, each as a list of cells
    let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
    for (k, (h, perp)) in family.iter().zip(&perps).enumerate() {
        for &g0 in &h.coset_representatives() {
            for &chi0 in &perp.coset_representatives() {
                let mut cells: Vec<usize> = h
                    .indices()
                    .iter()
                    .flat_map(|&a| {
                        let row = g.add_idx(g0, a);
                        perp.indices().iter().map(move |&c| row * n + g.add_idx(chi0, c))
                    })
                    .collect();
                cells.sort_unstable();
                blocks.push((k, cells));
            }
        }
    }
    let m = blocks.len();
    let mut masks = vec![vec![false; n2]; m];
    for (mask, (_, cells)) in masks.iter_mut().zip(&blocks) {
        for &c in cells {
            mask[c] = true;
        }
    }
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let overlap = blocks[j].1.iter().filter(|&&c| masks[i][c]).count() as f64;
            gram[i * m + j] = overlap;
            gram[j * m + i] = overlap;
        }
        gram[i * m + i] += RIDGE;
    }
    let rhs: Vec<f64> = blocks.iter().map(|(_, cells)| cells.iter().map(|&c| q.values[c]).sum()).collect();
    let coeffs = linalg::cholesky_solve(m, &gram, &rhs)?;

    let mut parts: Vec<(Subgroup, RealTable)> =
        family.iter().map(|h| (h.clone(), RealTable::zeros(g))).collect();
    for ((k, cells), c) in blocks.iter().zip(&coeffs) {
        for &cell in cells {
            parts[*k].1.values[cell] += c;
        }
    }
    for ((h, t), perp) in parts.iter_mut().zip(&perps) {
        *t = periodic_average_with(t, h, perp);
    }
    finish_decomposition(q, parts)
}

/// Folds the re-sum residual into the trivial-subgroup part if there is one,
/// then checks that the parts reproduce `q`.
fn finish_decomposition(q: &RealTable, mut parts: Vec<(Subgroup, RealTable)>) -> Result<PeriodicDecomposition> {
    let mut resid = q.clone();
    for (_, t) in &parts {
        resid.sub_assign(t);
    }
    if let Some((_, t)) = parts.iter_mut().find(|(h, _)| h.len() == 1) {
        t.add_assign(&resid);
    }
    let dec = PeriodicDecomposition { parts };
    let err = dec.total().map(|t| t.max_abs_diff(q)).unwrap_or(f64::INFINITY);
    if err > DECOMPOSITION_TOL {
        return Err(KdError::DecompositionInfeasible(err));
    }
    Ok(dec)
}

/// Repairs a decomposition along a subgroup chain into nonnegative parts.
///
/// With the chain sorted `G_0 < G_1 < ... < G_N` and `K_i = G_i^perp`, level 0
/// keeps `f0(g, k) - min_{s in G_1} f0(g + s, k)`, which lies between 0 and `f`
/// because `f - f0` is `G_1`-periodic in `g`. The removed minimum is
/// `G_1 x K_1`-periodic and is carried up into level 1; the last level takes
/// whatever remains.
pub fn greedy_nonnegative_repair(f: &RealTable, parts: &PeriodicDecomposition) -> Result<PeriodicDecomposition> {
    let g = &f.group;
    let n = g.order();
    let min = f.min();
    if min < -NONNEG_TOL {
        return Err(KdError::NegativeEntries(min));
    }
    let mut levels: Vec<(Subgroup, RealTable)> = parts.parts.clone();
    levels.sort_by_key(|(h, _)| h.len());
    let chain: Vec<Subgroup> = levels.iter().map(|(h, _)| h.clone()).collect();
    if !is_chain(&chain) || chain.windows(2).any(|w| w[0] == w[1]) {
        return Err(KdError::NotAChain);
    }
    let err = parts.total().map(|t| t.max_abs_diff(f)).unwrap_or(f64::INFINITY);
    if err > DECOMPOSITION_TOL {
        return Err(KdError::DecompositionInfeasible(err));
    }

    let count = levels.len();
    let mut repaired: Vec<(Subgroup, RealTable)> = Vec::with_capacity(count);
    let mut carry = RealTable::zeros(g);
    for i in 0..count {
        let (h, part) = &levels[i];
        let mut current = part.clone();
        current.add_assign(&carry);
        if i + 1 == count {
            repaired.push((h.clone(), current));
            break;
        }
        let next = &levels[i + 1].0;
        let mut kept = RealTable::zeros(g);
        carry = RealTable::zeros(g);
        for x in 0..n {
            for chi in 0..n {
                let lowest = next
                    .indices()
                    .iter()
                    .map(|&s| current.values[g.add_idx(x, s) * n + chi])
                    .fold(f64::INFINITY, f64::min);
                kept.values[x * n + chi] = current.values[x * n + chi] - lowest;
                carry.values[x * n + chi] = lowest;
            }
        }
        repaired.push((h.clone(), kept));
    }
    for (h, t) in repaired.iter_mut() {
        *t = periodic_average(t, h);
    }
    finish_decomposition(f, repaired)
}

/// Groups hull weights by subgroup: `Q_H = sum_{states on H} w eta`.
pub fn decomposition_from_weights(states: &[LabeledPureState], weights: &[f64]) -> PeriodicDecomposition {
    let mut parts: Vec<(Subgroup, RealTable)> = Vec::new();
    for (s, &w) in states.iter().zip(weights) {
        let idx = match parts.iter().position(|(h, _)| *h == s.subgroup) {
            Some(i) => i,
            None => {
                parts.push((s.subgroup.clone(), RealTable::zeros(s.subgroup.group())));
                parts.len() - 1
            }
        };
        for (v, e) in parts[idx].1.values.iter_mut().zip(s.eta_real()) {
            *v += w * e;
        }
    }
    PeriodicDecomposition { parts }
}
