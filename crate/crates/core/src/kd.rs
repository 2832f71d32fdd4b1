//! Fourier transform on `L^2(G)`, operators, and the Kirkwood-Dirac symbols.
//!
//! The two bases are `a_g` (delta at `g`) and `b_chi` with
//! `<a_g|b_chi> = chi(g) / sqrt(|G|)`. The lower symbol is
//! `Q[C](g, chi) = <b_chi|a_g><a_g|C|b_chi>` and the upper symbol is
//! `|G| Q[C]`, since the two bases are mutually unbiased.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{KdError, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::linalg;

/// Tolerance for exact identities (round trips, marginals, overlaps).
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tolerance for eigenvalue positivity.
pub const PSD_TOL: f64 = 1e-9;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn check_group(a: &GroupSpec, b: &GroupSpec) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(KdError::GroupMismatch)
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(KdError::DimensionMismatch { expected, found })
    }
}

/// A vector in `L^2(G)` (or `L^2` of the dual), indexed by flat element index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub group: GroupSpec,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(group: GroupSpec, amplitudes: Vec<C64>) -> Result<Self> {
        check_len(group.order(), amplitudes.len())?;
        Ok(Self { group, amplitudes })
    }

    /// The basis vector `a_g`.
    pub fn delta(group: &GroupSpec, g: usize) -> Self {
        let mut amplitudes = vec![ZERO; group.order()];
        amplitudes[g] = C64::new(1.0, 0.0);
        Self { group: group.clone(), amplitudes }
    }

    /// The basis vector `b_chi`.
    pub fn dual_basis(group: &GroupSpec, chi: usize) -> Self {
        let s = (group.order() as f64).sqrt().recip();
        let amplitudes = (0..group.order()).map(|g| group.character(chi, g) * s).collect();
        Self { group: group.clone(), amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|z| *z /= n);
        }
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|self><self|`.
    pub fn projector(&self) -> Operator {
        let n = self.amplitudes.len();
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        Operator { group: self.group.clone(), entries }
    }
}

/// `psi_hat(chi) = |G|^{-1/2} sum_g psi(g) conj(chi(g))`.
pub fn fourier(psi: &StateVector) -> StateVector {
    let g = &psi.group;
    let s = (g.order() as f64).sqrt().recip();
    let amplitudes = (0..g.order())
        .map(|chi| (0..g.order()).map(|x| psi.amplitudes[x] * g.character(chi, x).conj()).sum::<C64>() * s)
        .collect();
    StateVector { group: g.clone(), amplitudes }
}

/// `psi(g) = |G|^{-1/2} sum_chi chi(g) eta(chi)`.
pub fn inverse_fourier(eta: &StateVector) -> StateVector {
    let g = &eta.group;
    let s = (g.order() as f64).sqrt().recip();
    let amplitudes = (0..g.order())
        .map(|x| (0..g.order()).map(|chi| eta.amplitudes[chi] * g.character(chi, x)).sum::<C64>() * s)
        .collect();
    StateVector { group: g.clone(), amplitudes }
}

/// `(M_chi0 T_g0 psi)(x) = chi0(x) psi(x - g0)`.
pub fn weyl_apply(psi: &StateVector, g0: usize, chi0: usize) -> StateVector {
    let g = &psi.group;
    let amplitudes = (0..g.order())
        .map(|x| g.character(chi0, x) * psi.amplitudes[g.sub_idx(x, g0)])
        .collect();
    StateVector { group: g.clone(), amplitudes }
}

/// A complex `|G| x |G|` matrix in the `a_g` basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub group: GroupSpec,
    pub entries: Vec<C64>,
}

impl Operator {
    pub fn new(group: GroupSpec, entries: Vec<C64>) -> Result<Self> {
        check_len(group.order() * group.order(), entries.len())?;
        Ok(Self { group, entries })
    }

    pub fn zeros(group: &GroupSpec) -> Self {
        Self { group: group.clone(), entries: vec![ZERO; group.order() * group.order()] }
    }

    pub fn identity(group: &GroupSpec) -> Self {
        let mut op = Self::zeros(group);
        let n = group.order();
        for i in 0..n {
            op.entries[i * n + i] = C64::new(1.0, 0.0);
        }
        op
    }

    /// `I / |G|`.
    pub fn maximally_mixed(group: &GroupSpec) -> Self {
        Self::identity(group).scaled(C64::new(1.0 / group.order() as f64, 0.0))
    }

    /// Translation `T_g0`: `(T psi)(x) = psi(x - g0)`.
    pub fn translation(group: &GroupSpec, g0: usize) -> Self {
        let mut op = Self::zeros(group);
        let n = group.order();
        for x in 0..n {
            op.entries[x * n + group.sub_idx(x, g0)] = C64::new(1.0, 0.0);
        }
        op
    }

    /// Modulation `M_chi0`: multiplication by `chi0`.
    pub fn modulation(group: &GroupSpec, chi0: usize) -> Self {
        let mut op = Self::zeros(group);
        let n = group.order();
        for x in 0..n {
            op.entries[x * n + x] = group.character(chi0, x);
        }
        op
    }

    /// `sum_g v(g) |a_g><a_g|`.
    pub fn diagonal_in_a(group: &GroupSpec, v: &[C64]) -> Self {
        let mut op = Self::zeros(group);
        let n = group.order();
        for x in 0..n {
            op.entries[x * n + x] = v[x];
        }
        op
    }

    /// `sum_chi w(chi) |b_chi><b_chi|`.
    pub fn diagonal_in_b(group: &GroupSpec, w: &[C64]) -> Self {
        let n = group.order();
        let mut op = Self::zeros(group);
        for (chi, &wc) in w.iter().enumerate() {
            let b = StateVector::dual_basis(group, chi);
            for i in 0..n {
                for j in 0..n {
                    op.entries[i * n + j] += wc * b.amplitudes[i] * b.amplitudes[j].conj();
                }
            }
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.group.order()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim() + j]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        Self { group: self.group.clone(), entries }
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.entries.iter_mut().for_each(|z| *z *= s);
        self
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        check_group(&self.group, &other.group)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(Self { group: self.group.clone(), entries })
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        check_group(&self.group, &other.group)?;
        let n = self.dim();
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(Self { group: self.group.clone(), entries })
    }

    /// `U self U^dagger` with `U = M_chi0 T_g0`.
    pub fn weyl_conjugate(&self, g0: usize, chi0: usize) -> Operator {
        let u = Operator::modulation(&self.group, chi0)
            .matmul(&Operator::translation(&self.group, g0))
            .expect("same group");
        u.matmul(self).and_then(|x| x.matmul(&u.adjoint())).expect("same group")
    }

    /// `<phi| self |psi>`.
    pub fn sandwich(&self, phi: &StateVector, psi: &StateVector) -> C64 {
        let n = self.dim();
        (0..n)
            .map(|i| phi.amplitudes[i].conj() * (0..n).map(|j| self.entries[i * n + j] * psi.amplitudes[j]).sum::<C64>())
            .sum()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(self.dim(), &self.entries)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn hermitian_eigenvalues(a: &Operator) -> Result<Vec<f64>> {
    linalg::hermitian_eigenvalues(a.dim(), &a.entries)
}

/// An operator verified to be Hermitian, positive semidefinite and of unit trace.
#[derive(Debug, Clone)]
pub struct DensityState {
    op: Operator,
}

impl DensityState {
    pub fn new(op: Operator) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev > IDENTITY_TOL {
            return Err(KdError::NotHermitian(dev));
        }
        let tr = op.trace();
        if (tr - 1.0).norm() > IDENTITY_TOL {
            return Err(KdError::NotAState(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(&op)?[0];
        if min < -PSD_TOL {
            return Err(KdError::NotAState(format!("minimum eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }
}

/// A complex table on `G x G^`, row = `g`, column = `chi`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdDistribution {
    pub group: GroupSpec,
    pub values: Vec<C64>,
}

impl KdDistribution {
    pub fn new(group: GroupSpec, values: Vec<C64>) -> Result<Self> {
        check_len(group.order() * group.order(), values.len())?;
        Ok(Self { group, values })
    }

    pub fn from_real(group: GroupSpec, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn constant(group: &GroupSpec, value: C64) -> Self {
        Self { group: group.clone(), values: vec![value; group.order() * group.order()] }
    }

    pub fn get(&self, g: usize, chi: usize) -> C64 {
        self.values[g * self.group.order() + chi]
    }

    pub fn total(&self) -> C64 {
        self.values.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<C64> {
        self.values.chunks(self.group.order()).map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<C64> {
        let n = self.group.order();
        (0..n).map(|chi| (0..n).map(|g| self.values[g * n + chi]).sum()).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// Real parts, refusing tables with imaginary parts above `tol`.
    pub fn real_values(&self, tol: f64) -> Result<Vec<f64>> {
        let im = self.max_imag();
        if im > tol {
            return Err(KdError::NotReal(im));
        }
        Ok(self.values.iter().map(|z| z.re).collect())
    }

    /// Frobenius pairing `sum conj(self) * other`.
    pub fn pairing(&self, other: &KdDistribution) -> Result<C64> {
        check_group(&self.group, &other.group)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn max_abs_diff(&self, other: &KdDistribution) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.values.iter_mut().for_each(|z| *z *= s);
        self
    }
}

/// Lower symbol: `Q[C](g, chi) = |G|^{-1} conj(chi(g)) sum_x C[g][x] chi(x)`.
pub fn kd_lower(c: &Operator) -> KdDistribution {
    let g = &c.group;
    let n = g.order();
    let inv = 1.0 / n as f64;
    let mut values = vec![ZERO; n * n];
    for x in 0..n {
        for chi in 0..n {
            let row: C64 = (0..n).map(|y| c.entries[x * n + y] * g.character(chi, y)).sum();
            values[x * n + chi] = g.character(chi, x).conj() * row * inv;
        }
    }
    KdDistribution { group: g.clone(), values }
}

/// Upper symbol: `<a_g|C|b_chi> / <a_g|b_chi>`, equal to `|G| Q[C]`.
pub fn kd_upper(c: &Operator) -> KdDistribution {
    let g = &c.group;
    let n = g.order();
    let mut values = vec![ZERO; n * n];
    for x in 0..n {
        for chi in 0..n {
            let row: C64 = (0..n).map(|y| c.entries[x * n + y] * g.character(chi, y)).sum();
            values[x * n + chi] = g.character(chi, x).conj() * row;
        }
    }
    KdDistribution { group: g.clone(), values }
}

/// `Q^{-1}[f] = |G| sum <a_g|b_chi> f(g, chi) |a_g><b_chi|`, whose `(g, x)` entry
/// is `sum_chi chi(g - x) f(g, chi)`.
pub fn kd_lower_inverse(f: &KdDistribution) -> Operator {
    let g = &f.group;
    let n = g.order();
    let mut entries = vec![ZERO; n * n];
    for x in 0..n {
        for y in 0..n {
            let d = g.sub_idx(x, y);
            entries[x * n + y] = (0..n).map(|chi| g.character(chi, d) * f.values[x * n + chi]).sum();
        }
    }
    Operator { group: g.clone(), entries }
}

/// `Q~^{-1}[f] = Q^{-1}[f] / |G|`.
pub fn kd_upper_inverse(f: &KdDistribution) -> Operator {
    let n = f.group.order() as f64;
    kd_lower_inverse(f).scaled(C64::new(1.0 / n, 0.0))
}

/// Translates a table on the torus: `(g, chi) -> f(g - g0, chi - chi0)`.
pub fn kd_translate(f: &KdDistribution, g0: usize, chi0: usize) -> KdDistribution {
    let g = &f.group;
    let n = g.order();
    let mut values = vec![ZERO; n * n];
    for x in 0..n {
        for chi in 0..n {
            values[x * n + chi] = f.values[g.sub_idx(x, g0) * n + g.sub_idx(chi, chi0)];
        }
    }
    KdDistribution { group: g.clone(), values }
}

/// `Tr C^dagger D`, computed directly and through `sum conj(Q~[C]) Q[D]`.
///
/// The two routes must agree; a mismatch means the symbol conventions are broken.
pub fn overlap(c: &Operator, d: &Operator) -> Result<C64> {
    check_group(&c.group, &d.group)?;
    let direct: C64 = c.entries.iter().zip(&d.entries).map(|(a, b)| a.conj() * b).sum();
    let symbol = kd_upper(c).pairing(&kd_lower(d))?;
    let scale = 1.0 + direct.norm();
    if (direct - symbol).norm() > IDENTITY_TOL * scale {
        return Err(KdError::OverlapMismatch { direct: direct.to_string(), symbol: symbol.to_string() });
    }
    Ok(direct)
}

/// Element-valued convenience wrapper over [`weyl_apply`].
pub fn weyl_apply_elements(psi: &StateVector, g0: &GroupElement, chi0: &GroupElement) -> Result<StateVector> {
    let g = &psi.group;
    Ok(weyl_apply(psi, g.index(g0)?, g.index(chi0)?))
}

/// JSON layout for operators: `{"group": {"orders": [...]}, "entries": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorJson {
    pub group: GroupSpec,
    pub entries: Vec<Vec<[f64; 2]>>,
}

/// JSON layout for KD tables: rows are `g`, columns are `chi`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KdDistributionJson {
    pub group: GroupSpec,
    pub values: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateVectorJson {
    pub group: GroupSpec,
    pub amplitudes: Vec<[f64; 2]>,
}

fn to_rows(n: usize, data: &[C64]) -> Vec<Vec<[f64; 2]>> {
    data.chunks(n).map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn from_rows(n: usize, rows: &[Vec<[f64; 2]>]) -> Result<Vec<C64>> {
    check_len(n, rows.len())?;
    let mut out = Vec::with_capacity(n * n);
    for r in rows {
        check_len(n, r.len())?;
        out.extend(r.iter().map(|p| C64::new(p[0], p[1])));
    }
    Ok(out)
}

impl From<&Operator> for OperatorJson {
    fn from(op: &Operator) -> Self {
        Self { group: op.group.clone(), entries: to_rows(op.dim(), &op.entries) }
    }
}

impl TryFrom<OperatorJson> for Operator {
    type Error = KdError;
    fn try_from(j: OperatorJson) -> Result<Self> {
        let entries = from_rows(j.group.order(), &j.entries)?;
        Operator::new(j.group, entries)
    }
}

impl From<&KdDistribution> for KdDistributionJson {
    fn from(f: &KdDistribution) -> Self {
        Self { group: f.group.clone(), values: to_rows(f.group.order(), &f.values) }
    }
}

impl TryFrom<KdDistributionJson> for KdDistribution {
    type Error = KdError;
    fn try_from(j: KdDistributionJson) -> Result<Self> {
        let values = from_rows(j.group.order(), &j.values)?;
        KdDistribution::new(j.group, values)
    }
}

impl From<&StateVector> for StateVectorJson {
    fn from(v: &StateVector) -> Self {
        Self { group: v.group.clone(), amplitudes: v.amplitudes.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl TryFrom<StateVectorJson> for StateVector {
    type Error = KdError;
    fn try_from(j: StateVectorJson) -> Result<Self> {
        let amps = j.amplitudes.iter().map(|p| C64::new(p[0], p[1])).collect();
        StateVector::new(j.group, amps)
    }
}
