//! Seeded random instances: states, operators, density matrices, mixtures.
//!
//! Everything draws from a caller-supplied generator so a single seed fixes a
//! whole run.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::group::GroupSpec;
use crate::kd::{Operator, StateVector};

pub use rand_chacha::ChaCha8Rng as Rng64;

pub const DEFAULT_SEED: u64 = 0x6b64_2b5f;

pub fn seeded(seed: u64) -> Rng64 {
    rand::SeedableRng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-distributed unit vector.
pub fn haar_state<R: Rng + ?Sized>(group: &GroupSpec, rng: &mut R) -> StateVector {
    let amplitudes = (0..group.order()).map(|_| gaussian(rng)).collect();
    StateVector { group: group.clone(), amplitudes }.normalized()
}

/// Operator with i.i.d. complex Gaussian entries.
pub fn random_operator<R: Rng + ?Sized>(group: &GroupSpec, rng: &mut R) -> Operator {
    let n = group.order();
    let entries = (0..n * n).map(|_| gaussian(rng)).collect();
    Operator { group: group.clone(), entries }
}

/// `A A^dagger / Tr(A A^dagger)` for a Gaussian `|G| x rank` matrix `A`.
pub fn random_density<R: Rng + ?Sized>(group: &GroupSpec, rank: usize, rng: &mut R) -> Operator {
    let n = group.order();
    let cols: Vec<StateVector> = (0..rank.max(1))
        .map(|_| StateVector { group: group.clone(), amplitudes: (0..n).map(|_| gaussian(rng)).collect() })
        .collect();
    let mut rho = Operator::zeros(group);
    for v in &cols {
        rho = rho.add(&v.projector()).expect("same group");
    }
    let tr = rho.trace();
    rho.scaled(tr.inv())
}

/// Flat Dirichlet weights on `n` points.
pub fn dirichlet_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Weights supported on `support` randomly chosen points, zero elsewhere.
pub fn sparse_weights<R: Rng + ?Sized>(n: usize, support: usize, rng: &mut R) -> Vec<f64> {
    let chosen = rand::seq::index::sample(rng, n, support.clamp(1, n));
    let inner = dirichlet_weights(chosen.len(), rng);
    let mut w = vec![0.0; n];
    for (i, idx) in chosen.into_iter().enumerate() {
        w[idx] = inner[i];
    }
    w
}

/// `sum_i w_i |psi_i><psi_i|`.
pub fn mixture(states: &[StateVector], weights: &[f64]) -> Operator {
    let group = &states[0].group;
    let mut rho = Operator::zeros(group);
    for (s, &w) in states.iter().zip(weights) {
        if w != 0.0 {
            rho = rho.add(&s.projector().scaled(C64::new(w, 0.0))).expect("same group");
        }
    }
    rho
}
