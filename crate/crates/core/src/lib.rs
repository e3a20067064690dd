//! Congruence lattices of the regular part `P = Reg(T_X^a)` of a variant of a
//! finite full transformation monoid.
//!
//! Two independent routes are provided: a brute-force oracle working from the
//! multiplication table ([`congruence`]), and a structural enumeration that
//! assembles `Cong(P)` from the Mal'cev chain of `T = aT_Xa` and coherent
//! systems of equivalences on cross-sections and partitions ([`synthesis`]).

pub mod cli;
pub mod congruence;
pub mod error;
pub mod lattice;
pub mod malcev;
pub mod semigroup;
pub mod synthesis;
pub mod systems;
pub mod transform;
pub mod variant;

pub use error::{Error, Result};
