//! Finite abelian groups `Z_{d1} x ... x Z_{dk}`, their characters and subgroups.
//!
//! Elements are addressed by a flat index: the lexicographic rank of the
//! coordinate tuple, so index 0 is the identity and the last coordinate varies
//! fastest. Every table in the crate (operators, KD distributions) uses this
//! order on both axes. The dual group shares the index space; a dual index
//! `a` stands for the character `g -> exp(2 pi i sum_j a_j g_j / d_j)`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{KdError, Result};

/// Default cap on `|G|`. The CLI overrides it through `KD_ABELIAN_MAX_ORDER`.
pub const DEFAULT_MAX_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<usize>);

impl GroupElement {
    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

#[derive(Debug)]
struct GroupData {
    orders: Vec<usize>,
    order: usize,
    strides: Vec<usize>,
    exponent: usize,
    roots: Vec<C64>,
    // phase[chi * n + g] = k such that chi(g) = exp(2 pi i k / exponent)
    phase: Vec<u32>,
}

/// A finite abelian group given by its cyclic factor orders.
///
/// Cheap to clone; the character table is shared.
#[derive(Clone)]
pub struct GroupSpec {
    data: Arc<GroupData>,
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data) || self.data.orders == other.data.orders
    }
}

impl Eq for GroupSpec {}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupSpec").field("orders", &self.data.orders).finish()
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.data.orders.iter().map(|d| format!("Z{d}")).collect();
        f.write_str(&parts.join("x"))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Unit root `exp(2 pi i k / n)` with the quarter turns snapped to exact values.
fn unit_root(k: usize, n: usize) -> C64 {
    if (4 * k) % n == 0 {
        match 4 * k / n {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    } else {
        C64::from_polar(1.0, TAU * k as f64 / n as f64)
    }
}

impl GroupSpec {
    /// Builds a group with the default size cap.
    pub fn new(orders: &[usize]) -> Result<Self> {
        Self::with_max_order(orders, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(orders: &[usize], cap: usize) -> Result<Self> {
        if orders.is_empty() {
            return Err(KdError::EmptyGroup);
        }
        let mut order = 1usize;
        for &d in orders {
            if d == 0 {
                return Err(KdError::InvalidOrder(d));
            }
            order = order.checked_mul(d).ok_or(KdError::GroupTooLarge { order: usize::MAX, cap })?;
            if order > cap {
                return Err(KdError::GroupTooLarge { order, cap });
            }
        }
        let mut strides = vec![1usize; orders.len()];
        for j in (0..orders.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * orders[j + 1];
        }
        let exponent = orders.iter().fold(1, |l, &d| l / gcd(l, d) * d);
        let roots = (0..exponent).map(|k| unit_root(k, exponent)).collect();

        let coords: Vec<Vec<usize>> = (0..order)
            .map(|idx| orders.iter().zip(&strides).map(|(&d, &s)| (idx / s) % d).collect())
            .collect();
        let mut phase = vec![0u32; order * order];
        for (a, ca) in coords.iter().enumerate() {
            for (g, cg) in coords.iter().enumerate() {
                let k = ca
                    .iter()
                    .zip(cg)
                    .zip(orders)
                    .map(|((&x, &y), &d)| (x * y % d) * (exponent / d))
                    .sum::<usize>()
                    % exponent;
                phase[a * order + g] = k as u32;
            }
        }
        Ok(Self {
            data: Arc::new(GroupData { orders: orders.to_vec(), order, strides, exponent, roots, phase }),
        })
    }

    pub fn orders(&self) -> &[usize] {
        &self.data.orders
    }

    /// `|G|`.
    pub fn order(&self) -> usize {
        self.data.order
    }

    /// Least common multiple of the factor orders.
    pub fn exponent(&self) -> usize {
        self.data.exponent
    }

    pub fn is_cyclic(&self) -> bool {
        self.data.exponent == self.data.order
    }

    pub fn element(&self, idx: usize) -> GroupElement {
        GroupElement(
            self.data
                .orders
                .iter()
                .zip(&self.data.strides)
                .map(|(&d, &s)| (idx / s) % d)
                .collect(),
        )
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order()).map(|i| self.element(i))
    }

    /// Flat index of an element; coordinates must already be reduced.
    pub fn index(&self, g: &GroupElement) -> Result<usize> {
        let orders = &self.data.orders;
        if g.0.len() != orders.len() {
            return Err(KdError::DimensionMismatch { expected: orders.len(), found: g.0.len() });
        }
        let mut idx = 0;
        for ((&c, &d), &s) in g.0.iter().zip(orders).zip(&self.data.strides) {
            if c >= d {
                return Err(KdError::CoordinateOutOfRange { value: c, order: d });
            }
            idx += c * s;
        }
        Ok(idx)
    }

    /// Reduces arbitrary integer coordinates modulo the factor orders.
    pub fn reduce(&self, coords: &[i64]) -> Result<GroupElement> {
        let orders = &self.data.orders;
        if coords.len() != orders.len() {
            return Err(KdError::DimensionMismatch { expected: orders.len(), found: coords.len() });
        }
        Ok(GroupElement(
            coords.iter().zip(orders).map(|(&c, &d)| c.rem_euclid(d as i64) as usize).collect(),
        ))
    }

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        let mut idx = 0;
        for (&d, &s) in self.data.orders.iter().zip(&self.data.strides) {
            idx += (((a / s) % d + (b / s) % d) % d) * s;
        }
        idx
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        let mut idx = 0;
        for (&d, &s) in self.data.orders.iter().zip(&self.data.strides) {
            idx += ((d - (a / s) % d) % d) * s;
        }
        idx
    }

    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let (a, b) = (self.index(a)?, self.index(b)?);
        Ok(self.element(self.add_idx(a, b)))
    }

    /// Phase numerator `k` with `chi(g) = exp(2 pi i k / exponent)`.
    pub fn phase_idx(&self, chi: usize, g: usize) -> usize {
        self.data.phase[chi * self.order() + g] as usize
    }

    /// `chi(g)` by flat indices.
    pub fn character(&self, chi: usize, g: usize) -> C64 {
        self.data.roots[self.phase_idx(chi, g)]
    }

    pub fn char_eval(&self, chi: &GroupElement, g: &GroupElement) -> Result<C64> {
        Ok(self.character(self.index(chi)?, self.index(g)?))
    }

    /// Closure of a set of generators under addition.
    fn closure(&self, generators: &[usize]) -> Vec<bool> {
        let n = self.order();
        let mut mask = vec![false; n];
        mask[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &s in generators {
                let y = self.add_idx(x, s);
                if !mask[y] {
                    mask[y] = true;
                    queue.push_back(y);
                }
            }
        }
        mask
    }
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    orders: Vec<usize>,
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupRepr { orders: self.orders().to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GroupRepr::deserialize(d)?;
        // Size checks against a configured cap happen at the call site.
        GroupSpec::with_max_order(&repr.orders, usize::MAX).map_err(serde::de::Error::custom)
    }
}

/// A subgroup of a [`GroupSpec`], stored as a sorted list of flat indices.
#[derive(Clone)]
pub struct Subgroup {
    group: GroupSpec,
    elements: Vec<usize>,
    generators: Vec<usize>,
    mask: Vec<bool>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.elements == other.elements
    }
}

impl Eq for Subgroup {}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let els: Vec<String> = self.elements.iter().map(|&i| self.group.element(i).to_string()).collect();
        write!(f, "{{{}}}", els.join(", "))
    }
}

impl Subgroup {
    /// The subgroup generated by the given flat indices.
    pub fn generated_by(group: &GroupSpec, generators: &[usize]) -> Self {
        let mask = group.closure(generators);
        let elements = (0..group.order()).filter(|&i| mask[i]).collect();
        Self { group: group.clone(), elements, generators: generators.to_vec(), mask }
    }

    pub fn from_generators(group: &GroupSpec, generators: &[GroupElement]) -> Result<Self> {
        let gens = generators.iter().map(|g| group.index(g)).collect::<Result<Vec<_>>>()?;
        Ok(Self::generated_by(group, &gens))
    }

    /// Builds a subgroup from an explicit element set, validating closure.
    pub fn from_elements(group: &GroupSpec, elements: &[usize]) -> Result<Self> {
        let set: BTreeSet<usize> = elements.iter().copied().collect();
        if !set.contains(&0) {
            return Err(KdError::InvalidSubgroup("identity missing".into()));
        }
        if set.iter().any(|&i| i >= group.order()) {
            return Err(KdError::InvalidSubgroup("element index out of range".into()));
        }
        for &a in &set {
            for &b in &set {
                if !set.contains(&group.add_idx(a, b)) {
                    return Err(KdError::InvalidSubgroup("not closed under addition".into()));
                }
            }
        }
        // greedy generating set: keep an element only if it is not yet reached
        let mut generators = Vec::new();
        let mut mask = group.closure(&generators);
        for &x in &set {
            if !mask[x] {
                generators.push(x);
                mask = group.closure(&generators);
            }
        }
        Ok(Self { group: group.clone(), elements: set.into_iter().collect(), generators, mask })
    }

    pub fn trivial(group: &GroupSpec) -> Self {
        Self::generated_by(group, &[])
    }

    pub fn whole(group: &GroupSpec) -> Self {
        Self::from_elements(group, &(0..group.order()).collect::<Vec<_>>()).expect("whole group is a subgroup")
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.elements
    }

    pub fn generator_indices(&self) -> &[usize] {
        &self.generators
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.elements.iter().map(|&i| self.group.element(i)).collect()
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        self.generators.iter().map(|&i| self.group.element(i)).collect()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&i| other.contains(i))
    }

    /// Characters trivial on every element, as a subgroup of the dual index space.
    pub fn annihilator(&self) -> Subgroup {
        let g = &self.group;
        let members: Vec<usize> = (0..g.order())
            .filter(|&chi| self.elements.iter().all(|&h| g.phase_idx(chi, h) == 0))
            .collect();
        Subgroup::from_elements(g, &members).expect("annihilator is a subgroup")
    }

    /// Lexicographically smallest member of each coset, in increasing order.
    pub fn coset_representatives(&self) -> Vec<usize> {
        let g = &self.group;
        let mut covered = vec![false; g.order()];
        let mut reps = Vec::with_capacity(g.order() / self.len());
        for x in 0..g.order() {
            if covered[x] {
                continue;
            }
            reps.push(x);
            for &h in &self.elements {
                covered[g.add_idx(x, h)] = true;
            }
        }
        reps
    }

    /// Representative of the coset containing `x`.
    pub fn coset_of(&self, x: usize) -> usize {
        self.elements.iter().map(|&h| self.group.add_idx(x, h)).min().unwrap_or(x)
    }
}

/// Every subgroup of `group`, sorted by order and then by element list.
///
/// Breadth-first: each known subgroup is extended by one outside element and
/// closed again until nothing new appears.
pub fn all_subgroups(group: &GroupSpec) -> Vec<Subgroup> {
    let start = Subgroup::trivial(group);
    let mut seen: HashSet<Vec<usize>> = HashSet::from([start.elements.clone()]);
    let mut found = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(h) = queue.pop_front() {
        for x in 0..group.order() {
            if h.contains(x) {
                continue;
            }
            let mut gens = h.generators.clone();
            gens.push(x);
            let next = Subgroup::generated_by(group, &gens);
            if seen.insert(next.elements.clone()) {
                found.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.elements.cmp(&b.elements)));
    found
}

/// True when the subgroups are totally ordered by inclusion.
pub fn is_chain(subgroups: &[Subgroup]) -> bool {
    let mut sorted: Vec<&Subgroup> = subgroups.iter().collect();
    sorted.sort_by_key(|h| h.len());
    sorted.windows(2).all(|w| w[0].is_subset_of(w[1]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgroupRepr {
    pub generators: Vec<GroupElement>,
}

impl From<&Subgroup> for SubgroupRepr {
    fn from(h: &Subgroup) -> Self {
        Self { generators: h.generators() }
    }
}

impl SubgroupRepr {
    /// Regenerates the subgroup inside `group`.
    pub fn load(&self, group: &GroupSpec) -> Result<Subgroup> {
        Subgroup::from_generators(group, &self.generators)
    }
}
