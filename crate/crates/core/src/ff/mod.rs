//! Exact arithmetic in F_p and F_{p^n} for odd p, and polynomials over them.

mod field;
mod poly;
pub mod zp;

pub use field::{FieldDescriptor, Fq, GaloisField, MAX_CHARACTERISTIC, MAX_FIELD_ORDER};
pub use poly::{enumerate_monic, monic_count, monic_from_index, FqPoly};

/// Convenience constructor matching `GaloisField::new`.
pub fn field_new(p: u32, n: u32) -> crate::Result<GaloisField> {
    GaloisField::new(p, n)
}
