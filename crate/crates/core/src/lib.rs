//! Lagrangian L-spaces of ribbon graphs over GF(2).
//!
//! A ribbon graph with `n` edges determines an `n`-dimensional Lagrangian
//! subspace of the symplectic space `F₂^{2n}`. Partial duality and the two
//! Vassiliev moves on ribbon graphs become explicit symplectomorphisms of
//! that space. The crate also provides the graded bialgebra of permutation
//! orbits of Lagrangians with its four-term quotient, and the matrix calculus
//! of framed graphs (local complementation, pivots, interlace polynomial).

pub mod bialgebra;
pub mod cli;
pub mod f2sympl;
pub mod homomap;
pub mod matrixops;
pub mod ribbon;

pub use f2sympl::{IndexSet, Lagrangian, SympVector, Symplectomorphism};
pub use homomap::{intersection_matrix, lspace};
pub use matrixops::{BivariatePolynomial, FramedGraphMatrix};
pub use ribbon::{RibbonGraph, RotationSystem};
