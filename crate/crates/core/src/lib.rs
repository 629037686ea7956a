//! Staged construction and verification of universal Taylor series on
//! products of planar domains.

// `!(x < tol)` is used on purpose so that NaN counts as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geometry;
pub mod mergelyan;
pub mod multiindex;
pub mod poly;
pub mod scenario;
pub mod universal;
pub mod verify;

pub use error::{Error, Result};
