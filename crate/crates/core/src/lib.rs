//! Kernels, spectral dimensionality reduction and contrastive objectives on
//! finite input spaces, together with the closed-form optima those
//! objectives are known to reach.
//!
//! Everything here is deterministic: eigenproblems are solved with a cyclic
//! Jacobi sweep, random draws come from a seeded [`rng::SeededRng`] (ChaCha8), and
//! training is full-batch gradient descent with Armijo backtracking.

pub mod contrastive;
pub mod eigenfunctions;
pub mod encoders;
pub mod error;
pub mod kernel_approx;
pub mod kernels;
pub mod linalg;
pub mod linear_dr;
pub mod manifold;
pub mod rng;

pub use error::{Error, Result};
pub use kernels::{FiniteSpace, Kernel, Point};
pub use linalg::{EigenDecomposition, SymMatrix};

/// Dense row-major-agnostic matrix type used across the crate.
pub type Mat = nalgebra::DMatrix<f64>;
