//! Gauss–Laguerre quadrature rules for ∫₀^∞ e^{-x} g(x) dx via Golub–Welsch:
//! eigen-decomposition of the symmetric tridiagonal Jacobi matrix of the
//! Laguerre recurrence (diagonal 2k+1, off-diagonal k).

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Nodes and weights of an M-point Gauss–Laguerre rule.
///
/// Nodes are strictly increasing and positive; weights sum to 1 (the total
/// mass of Exp(1)); the rule integrates polynomials up to degree 2M-1 exactly.
#[derive(Debug, Clone)]
pub struct LaguerreRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LaguerreRule {
    /// Apply the rule to g, approximating ∫₀^∞ e^{-x} g(x) dx.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// Build the M-point rule, 1 <= M <= 256.
pub fn gauss_laguerre(order: usize) -> Result<LaguerreRule> {
    if order == 0 || order > 256 {
        return Err(Error::Domain(format!(
            "gauss_laguerre order must be in 1..=256, got {order}"
        )));
    }
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 0..order {
        jacobi[(k, k)] = 2.0 * k as f64 + 1.0;
        if k + 1 < order {
            let off = (k + 1) as f64;
            jacobi[(k, k + 1)] = off;
            jacobi[(k + 1, k)] = off;
        }
    }
    let eigen = nalgebra::SymmetricEigen::try_new(jacobi, f64::EPSILON, 50_000)
        .ok_or(Error::EigenFailure { order })?;

    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &node)| {
            let first = eigen.eigenvectors[(0, i)];
            (node, first * first) // µ₀ = ∫ e^{-x} dx = 1
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    Ok(LaguerreRule {
        order,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}
