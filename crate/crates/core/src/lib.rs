//! Gaussian returns whose inverse variance β is gamma distributed across
//! days: the resulting Student-t return law, the collapse of every stock onto
//! one master curve, and tail exponents.

// Reference constants keep all published digits; `!(x > 0.0)` is how NaN is
// rejected alongside non-positive values.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod io;
pub mod marketdata;
pub mod simulate;
pub mod specfun;
pub mod tails;
pub mod volmodel;

pub use error::{Error, Result};
