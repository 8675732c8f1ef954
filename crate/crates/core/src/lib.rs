//! Analytical performance engine and Monte Carlo validator for device-to-device
//! networks overlaid on a cellular uplink.
//!
//! UEs and base stations form Poisson point processes; links fade according to
//! the κ-μ or η-μ generalized distributions (covering Rayleigh, Rice,
//! Nakagami-m, Hoyt and One-Sided Gaussian as special cases). The crate
//! computes average rates, average bit error probabilities and SIR
//! distributions from the interference Laplace transforms, and cross-validates
//! every analytical result against a stochastic-geometry simulator.
//!
//! Module map:
//! * [`specfun`] — special functions (gamma family, hypergeometrics, Marcum Q,
//!   Gauss–Laguerre rules).
//! * [`fading`] — κ-μ / η-μ distribution objects: pdf, moments, Laplace
//!   transform, CCDF, exact samplers.
//! * [`network`] — deployment geometry: link lengths, mode selection, thinned
//!   intensities, transmit-power moments under channel inversion.
//! * [`interference`] — Laplace transforms of the aggregate interference seen
//!   by a D2D receiver and by a cellular base station.
//! * [`sinr`] — the expectation engine E[g(W/(I+N₀))] driven by Gauss–Laguerre
//!   quadrature.
//! * [`metrics`] — average rates, average BEP and SIR CCDF per UE class.
//! * [`mcsim`] — the Monte Carlo simulator (PPP D2D field, hexagonal-grid
//!   cellular uplink).
//! * [`validation`] — the self-check suite run by `d2dgeo validate`.

pub mod curve;
pub mod fading;
pub mod interference;
pub mod mcsim;
pub mod metrics;
pub mod network;
pub(crate) mod quad;
pub mod sinr;
pub mod specfun;
pub mod validation;

use thiserror::Error;

/// Errors shared by every analytical and simulation path in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A series failed to meet its truncation contract.
    #[error("series did not converge after {terms} terms (last term {last_term:e})")]
    NoConvergence { terms: usize, last_term: f64 },
    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature error {achieved:e} exceeds requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
    /// Two algebraically equivalent routes disagreed beyond tolerance.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    /// A constructor rejected its parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The analytic path does not cover this case (callers fall back to MC).
    #[error("analytic path unsupported: {0}")]
    Unsupported(String),
    /// The eigenvalue solver backing a quadrature rule did not converge.
    #[error("eigen-decomposition failed for order {order}")]
    EigenFailure { order: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Which typical link an analysis targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    /// Typical D2D receiver at the origin, interfered by D2D-mode UEs.
    D2d,
    /// Typical cellular BS at the origin, interfered by out-of-cell uplink UEs.
    Cellular,
}

impl std::fmt::Display for LinkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LinkKind::D2d => write!(f, "d2d"),
            LinkKind::Cellular => write!(f, "cellular"),
        }
    }
}
