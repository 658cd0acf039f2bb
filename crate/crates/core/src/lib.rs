//! Exact-arithmetic kernel for polynomial Nambu structures.
//!
//! The crate provides truncated multivariate polynomial arithmetic over
//! the rationals, antisymmetric tensor calculus (wedge, contraction,
//! exterior derivative, Schouten–Nijenhuis bracket, transformation under
//! polynomial coordinate changes), integrability testing and
//! classification of linear Nambu structures into their Type 1 / Type 2
//! normal forms, and the iterative formal linearization of structures
//! with a nondegenerate Type 1 linear part, driven by exact Lie-algebra
//! cohomology solves.
//!
//! Every computation is exact: coefficients are arbitrary-precision
//! rationals, identities are polynomial identities of truncated
//! representatives, and no floating point exists anywhere in the kernel.
//! All values are immutable after construction and all operations are
//! pure functions.

pub mod classify;
pub mod error;
pub mod gen;
pub mod lie;
pub mod linalg;
pub mod linearize;
pub mod polymap;
pub mod polyring;
pub mod rat;
pub mod report;
pub mod tensor;
pub mod textio;

pub use error::{KernelError, Result};
pub use polymap::{MapKind, PolyMap};
pub use polyring::{Mono, TruncPoly};
pub use rat::Rat;
pub use tensor::{DiffForm, Multivector, VectorField};
