//! Special functions and numerical kernels: log-gamma and its derivatives,
//! incomplete gamma and beta functions, adaptive quadrature and bracketed
//! root finding.
//!
//! Everything here is a pure function of its arguments. NaN inputs are
//! rejected with [`Error::Domain`](crate::Error::Domain) rather than
//! propagated.

mod beta;
mod gamma;
mod quad;
mod roots;

pub use beta::reg_inc_beta;
pub(crate) use beta::reg_inc_beta_split;
pub use gamma::{digamma, log_gamma, reg_lower_inc_gamma, reg_upper_inc_gamma, trigamma};
pub(crate) use gamma::{digamma_unchecked, ln_gamma_unchecked, trigamma_unchecked};
pub use quad::{integrate, integrate_scaled, QuadratureResult, MAX_INTERVALS};
pub use roots::find_root;
