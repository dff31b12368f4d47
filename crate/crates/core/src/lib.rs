//! Numerical laboratory for integral operators on a real interval.
//!
//! The crate discretizes kernels `K(x,y)` against a quadrature rule
//! (Nystrom's method), eigendecomposes the resulting operators, and probes
//! the boundary between "maps L2 into continuous functions" and "has a
//! continuous kernel": Mercer reconstruction, trace identities, fractional
//! powers, heat semigroups, and a family of counterexample kernels whose
//! products lose continuity or whose diagonals blow up.
//!
//! Everything is deterministic: no randomness, fixed summation orders, and
//! pure operations over immutable values, so identical inputs produce
//! bit-identical outputs.

pub mod diagnostics;
mod error;
pub mod io;
pub mod kernels;
mod mat;
pub mod nystrom;
pub mod quadrature;
pub mod semigroup;
pub mod spectral;

pub use error::{Error, Result};
pub use mat::Mat;
