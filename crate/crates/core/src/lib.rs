//! Kirkwood-Dirac quasiprobabilities for the Fourier transform on finite abelian groups.
//!
//! For `G = Z_{d1} x ... x Z_{dk}` the Hilbert space `L^2(G)` carries two
//! mutually unbiased bases: point masses `a_g` and characters `b_chi`. The
//! Kirkwood-Dirac (KD) distribution of an operator is the complex table
//! `Q[C](g, chi) = <b_chi|a_g><a_g|C|b_chi>` on `G x G^`.
//!
//! The crate provides:
//!
//! - [`group`]: groups, characters, the subgroup lattice, annihilators, cosets.
//! - [`kd`]: Fourier transform, operators, the KD symbols and their inverses,
//!   the Weyl/Heisenberg action.
//! - [`positivity`]: the pure KD-positive states `psi^H_{g0,chi0}`, their
//!   distributions, positivity checks and the KD-real observable space.
//! - [`hull`]: membership of a state in the convex hull of the pure KD-positive
//!   states (LP with Farkas witnesses) and nonnegative periodic decompositions
//!   along subgroup chains.
//! - [`counterexamples`]: the `Z6` and `Z2 x Z2` states that are KD-positive but
//!   outside that hull, with a checklist verifying each claimed inequality.
//!
//! ```
//! use kd_abelian::group::{all_subgroups, GroupSpec};
//! use kd_abelian::positivity::pure_positive_states;
//!
//! let z6 = GroupSpec::new(&[6]).unwrap();
//! assert_eq!(all_subgroups(&z6).len(), 4);
//! assert_eq!(pure_positive_states(&z6).unwrap().len(), 24);
//! ```

pub mod cli;
pub mod counterexamples;
pub mod error;
pub mod group;
pub mod hull;
pub mod kd;
pub mod linalg;
pub mod lp;
pub mod positivity;
pub mod sampling;

pub use error::{KdError, Result};
pub use group::{GroupElement, GroupSpec, Subgroup};
pub use kd::{DensityState, KdDistribution, Operator, StateVector};
