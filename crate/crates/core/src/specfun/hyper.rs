//! Confluent and Gaussian hypergeometric functions by direct series with a
//! contractual truncation rule, plus the Kummer and Pfaff transformations that
//! keep every argument this crate produces inside the fast-converging region.

use super::gamma::is_nonpositive_integer;
use crate::{Error, Result};

const SERIES_EPS: f64 = 1e-15;
const MAX_TERMS: usize = 1_000_000;

/// Kahan-compensated hypergeometric series with term ratio supplied by the
/// caller. `limit_ratio` is the k→∞ limit of the term ratio (|x| for ₂F₁,
/// 0 for ₁F₁); the sum stops once the geometric tail bound
/// |term|·q/(1-q), q = max(|ratio|, limit), confirms the remainder is below
/// `SERIES_EPS` of the partial sum.
fn sum_series(mut ratio: impl FnMut(usize) -> f64, limit_ratio: f64) -> Result<f64> {
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    let mut term = 1.0f64;
    for k in 0..MAX_TERMS {
        let r = ratio(k);
        term *= r;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let q = r.abs().max(limit_ratio);
        if q < 1.0 && term.abs() * q / (1.0 - q) < SERIES_EPS * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        terms: MAX_TERMS,
        last_term: term,
    })
}

fn hyp1f1_series(a: f64, b: f64, x: f64) -> Result<f64> {
    sum_series(
        |k| {
            let kf = k as f64;
            (a + kf) * x / ((b + kf) * (kf + 1.0))
        },
        0.0,
    )
}

/// Confluent hypergeometric ₁F₁(a; b; x).
///
/// Direct ascending series; negative arguments go through the Kummer
/// transformation ₁F₁(a;b;x) = e^x ₁F₁(b-a;b;-x) so the series terms stay
/// positive whenever b > a.
pub fn hyp1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Err(Error::Domain(format!(
            "hyp1f1 undefined for nonpositive integer b = {b}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < 0.0 {
        return Ok(x.exp() * hyp1f1_series(b - a, b, -x)?);
    }
    hyp1f1_series(a, b, x)
}

fn hyp2f1_series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    sum_series(
        |k| {
            let kf = k as f64;
            (a + kf) * (b + kf) * x / ((c + kf) * (kf + 1.0))
        },
        x.abs(),
    )
}

/// Gauss hypergeometric ₂F₁(a, b; c; x) for x < 1.
///
/// |x| ≤ 0.5 sums the defining series; x < -0.5 is mapped into (0, 1) by the
/// Pfaff transformation (1-x)^{-a} ₂F₁(a, c-b; c; x/(x-1)), choosing the side
/// that keeps the transformed numerator parameters positive; 0.5 < x < 1 keeps
/// the direct series, whose terms are then positive and monotone.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!(
            "hyp2f1 undefined for nonpositive integer c = {c}"
        )));
    }
    if x >= 1.0 {
        return Err(Error::Domain(format!(
            "hyp2f1 requires x < 1, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < -0.5 {
        let z = x / (x - 1.0);
        return if c - b > 0.0 {
            Ok((1.0 - x).powf(-a) * hyp2f1_series(a, c - b, c, z)?)
        } else {
            Ok((1.0 - x).powf(-b) * hyp2f1_series(c - a, b, c, z)?)
        };
    }
    hyp2f1_series(a, b, c, x)
}
