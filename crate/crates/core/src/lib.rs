//! Invariants of hyperelliptic curves over finite fields: point counts and
//! L-polynomials, p-ranks via the Hasse–Witt matrix, Newton polygons,
//! clutching-tree combinatorics for boundary strata, symplectic-group
//! baselines over Z/ℓ, and the census experiments built on top of them.

pub mod clutching;
pub mod error;
pub mod experiments;
pub mod ff;
pub mod hyperelliptic;
pub mod prank;
pub mod rng;
mod serde_util;
pub mod symplectic;
pub mod weil;

pub use error::{Error, Result};
