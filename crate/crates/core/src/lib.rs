//! Equilibrium macrostates, phase diagrams and limit laws for the
//! mean-field Blume-Emery-Griffiths spin model.
//!
//! The model places spins `w_j in {-1, 0, 1}` on the complete graph with
//! Hamiltonian `H_n(w) = sum_j w_j^2 - (K/n) (sum_j w_j)^2`. The crate
//! computes equilibrium macrostates in the canonical ensemble (fixed
//! inverse temperature `beta`) and the microcanonical ensemble (fixed
//! energy per particle `u`), locates the critical couplings and tricritical
//! points of both, compares the two phase diagrams, and checks the
//! fluctuation limit laws of the total spin against exact finite-n
//! distributions.
//!
//! Modules:
//! - [`model`]: macrostates, the cumulant function `c_beta`, relative
//!   entropy, the Cramér rate function and the ensemble rate functions.
//! - [`canonical`]: minimizers of `G_{beta,K}`, `K_c^(2)(beta)`,
//!   `K_c^(1)(beta)` and the canonical free energy.
//! - [`micro`]: minimizers of `R_{u,K}`, `K_c^(2)(u)`, `K_c^(1)(u)`, the
//!   convexity curve `C(u)` and the microcanonical entropy.
//! - [`limits`] and [`sampler`]: exact total-spin distributions, type
//!   classification, limit densities and a Metropolis cross-check.
//! - [`diagram`] and [`oracle`]: parameter sweeps, inversion of critical
//!   curves, ensemble equivalence reports and the brute-force simplex oracle.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod diagram;
pub mod error;
pub mod limits;
pub mod micro;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod output;
pub mod sampler;

pub use error::{BegError, Result};
pub use model::{CanonicalParams, Macrostate, MicroParams, BETA_C};
