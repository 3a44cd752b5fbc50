//! Exact symbolic engine for the contact superalgebra `K(n)` on `ℝ^{1|n}`: weighted densities,
//! (bi)differential operators between them, invariant operators and first cohomology.

pub mod cli;
pub mod cohomology;
pub mod contact;
pub mod densities;
pub mod diffops;
pub mod error;
pub mod exactla;
pub mod grassmann;
pub mod invariants;
pub mod rat;

pub use error::{Error, Result};
pub use grassmann::{Monomial, Parity, SuperPoly};
pub use rat::Rat;
