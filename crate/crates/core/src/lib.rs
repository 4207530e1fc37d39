//! Numerical verification of fractional-integral and BMO-commutator bounds
//! on variable-exponent Herz-Morrey spaces.
//!
//! Functions live on truncated dyadic grids in dimension one or two
//! ([`grid`]). On top of those sit variable exponents ([`exponents`]), the
//! Luxemburg, BMO and Herz-Morrey norms ([`norms`]), the maximal operator,
//! the fractional integral and its commutators ([`operators`]) and the
//! experiment drivers in [`verify`].

// NaN must fail precondition checks, so they are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponents;
pub mod grid;
pub mod norms;
pub mod operators;
pub mod sum;
pub mod verify;

pub use error::{Error, Result};
pub use exponents::{ExponentFamily, ExponentFunction};
pub use grid::{DyadicGrid, GridFunction, GridSpec};
pub use operators::{Engine, RieszOperator};
