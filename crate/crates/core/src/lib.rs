//! Numerical toolkit for multi-slit radial Komatu–Loewner evolution.

// `!(a < b)` comparisons deliberately treat NaN as failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod domain;
pub mod error;
pub mod evolution;
pub mod mckernel;
pub mod ode;
pub mod scmap;
pub mod verify;

pub use error::{Error, Result};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
