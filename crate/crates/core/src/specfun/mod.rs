//! Special-function substrate shared by every analytical formula in the crate.
//!
//! All operations are pure, reentrant and safe to call concurrently.

mod gamma;
mod hyper;
mod laguerre;
mod marcum;

pub use gamma::{
    binomial_real, gamma, is_nonpositive_integer, ln_gamma, ln_gamma_signed,
    lower_incomplete_gamma, reg_lower_gamma, reg_upper_gamma, sinc_norm, upper_incomplete_gamma,
};
pub use hyper::{hyp1f1, hyp2f1};
pub use laguerre::{gauss_laguerre, LaguerreRule};
pub use marcum::{laguerre_poly, marcum_q, marcum_q_laguerre_series};
