//! Band functions and absolute-continuity diagnostics for two-dimensional
//! magnetic Schrödinger operators with translation-invariant fields
//! `B(x)` and electric potentials `W(x)`.

// `!(a < b)` is the NaN-rejecting form throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod cli;
pub mod comparison;
pub mod eigensolve;
pub mod error;
pub mod fiber;
pub mod gauge;
pub mod layer;
pub mod profiles;

pub use error::{Error, Result};
