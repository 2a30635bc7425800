//! Exact linear algebra: matrices, canonical subspaces, filtrations and the
//! filtrations they induce on spaces of homomorphisms.
//!
//! Everything is generic over [`Scalar`]; the rational instance is exact and
//! the other instances live in [`crate::numeric`].

pub mod filtration;
pub mod hom;
pub mod matrix;
pub mod scalar;
pub mod subspace;

pub use filtration::Filtration;
pub use matrix::Matrix;
pub use scalar::{format_rational, parse_rational, q, qf, Scalar, Tol, Q};
pub use subspace::{QuotientSpace, Subspace};

/// Exact rational matrix.
pub type RationalMatrix = Matrix<Q>;
