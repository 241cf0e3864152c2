//! Non-backtracking random walks (NBRW) on regular graphs.
//!
//! A laboratory library for studying how the visit counts of a
//! non-backtracking random walk on a `d`-regular expander emulate the
//! classical balls-and-bins experiment. It provides:
//!
//! - [`graph`]: construction, generation and interrogation of simple
//!   `d`-regular graphs (girth, pairwise distances, far vertex sets);
//! - [`spectral`]: exact spectral and mixing quantities — the nontrivial
//!   eigenvalue `λ`, the NBRW mixing rate `ρ`, exact `k`-step walk
//!   distributions through the directed-edge operator, the fine mixing
//!   time `τ`, and the short-return mass `M`;
//! - [`walk`]: seeded Monte Carlo sampling of non-backtracking and simple
//!   random walks with reproducible per-trial streams;
//! - [`sieve`]: joint factorial moments, the multivariate Bonferroni
//!   sandwich `Λ(k)`, and Poisson reference laws with quantified error
//!   propagation;
//! - [`stats`]: visit-count histograms `N_t`, Poisson comparison reports,
//!   the maximal-visit threshold function, and the balls-and-bins oracle.
//!
//! Numeric kernels are generic over the scalar type via [`Scalar`]
//! (implemented for `f32` and `f64`); [`Real`] is the crate-wide default.

pub mod graph;
pub mod scalar;
pub mod sieve;
pub mod spectral;
pub mod stats;
pub mod walk;

pub use scalar::Scalar;

/// Default scalar type used by the CLI and most callers.
pub type Real = f64;

/// Dense 0-based vertex id. `u32` is enough for the supported desk scale
/// (n ≤ 10^6).
pub type VertexId = u32;
