//! Local monodromy of multiplicative convolutions at infinity, and local
//! Fourier transforms, for wild characters over the algebraic closure of a
//! prime field F_p (p odd).
//!
//! Inputs are local representations of the shape
//! `[a]_* (psi-character of a polynomial f, tensor a tame character chi,
//! tensor a unipotent block of size n)`. The crate computes the atoms of
//! their multiplicative convolution at infinity, and the two local Fourier
//! transforms, by exact arithmetic: finite-field towers, truncated series in
//! 1/t, and Newton-Hensel lifting of the simple critical points.

pub mod engine;
pub mod error;
pub mod field;
pub mod fourier;
pub mod problem;
pub mod rep;
pub mod selfcheck;
pub mod series;

pub use error::{Error, Result};
pub use field::{FieldTower, FqElement};
