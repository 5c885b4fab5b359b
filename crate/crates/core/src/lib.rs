//! Numerical laboratory for a Brownian complex SYK cluster coupled to a
//! charge-conserving bath, doubled with an auxiliary copy.

// Range guards are written `!(x >= 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fockspace;
pub mod hash;
pub mod largen;
pub mod linalg;
pub mod observables;

pub use error::{Error, Result};
