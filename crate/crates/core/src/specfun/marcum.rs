//! Generalized Marcum Q-function.
//!
//! The primary path sums the Poisson mixture of regularized upper gammas,
//! iterating outward from the Poisson mode so it stays stable for any
//! noncentrality. The alternating Laguerre-coefficient power series is kept as
//! a secondary path for cross-checking; it loses precision for large
//! arguments and is not used by the analysis code.

use super::gamma::{ln_gamma, reg_upper_gamma};
use crate::{Error, Result};

const POISSON_TAIL: f64 = 1e-14;
const MAX_TERMS: usize = 100_000;

/// Q_μ(a, b) = P(X > b²/2) for X following a Γ-mixture with Poisson(a²/2)
/// shifted shapes; equals the CCDF of a noncentral-χ type variable.
pub fn marcum_q(mu: f64, a: f64, b: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("marcum_q requires mu > 0, got {mu}")));
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::Domain(format!(
            "marcum_q requires a, b >= 0, got a={a}, b={b}"
        )));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    let lambda = 0.5 * a * a;
    let y = 0.5 * b * b;
    if lambda == 0.0 {
        return reg_upper_gamma(mu, y);
    }

    // Poisson weights from the mode outward; each mixture component is a
    // regularized gamma in [0, 1], so the truncation error is the skipped
    // Poisson tail.
    let mode = lambda.floor().max(0.0);
    let ln_weight = |n: f64| -lambda + n * lambda.ln() - ln_gamma(n + 1.0).unwrap();
    let mut sum = 0.0;
    let mut weight_acc = 0.0;

    let mut lo = mode as i64;
    let mut hi = mode as i64;
    let mut w_lo = ln_weight(mode).exp();
    let mut w_hi = w_lo;
    // first term at the mode
    sum += w_lo * reg_upper_gamma(mu + mode, y)?;
    weight_acc += w_lo;

    for _ in 0..MAX_TERMS {
        if 1.0 - weight_acc < POISSON_TAIL {
            return Ok(sum.clamp(0.0, 1.0));
        }
        // expand on whichever side carries more remaining weight
        let next_hi = w_hi * lambda / (hi as f64 + 1.0);
        let next_lo = if lo > 0 { w_lo * lo as f64 / lambda } else { 0.0 };
        if next_hi >= next_lo {
            hi += 1;
            w_hi = next_hi;
            sum += w_hi * reg_upper_gamma(mu + hi as f64, y)?;
            weight_acc += w_hi;
        } else {
            lo -= 1;
            w_lo = next_lo;
            sum += w_lo * reg_upper_gamma(mu + lo as f64, y)?;
            weight_acc += w_lo;
        }
    }
    Err(Error::NoConvergence {
        terms: MAX_TERMS,
        last_term: 1.0 - weight_acc,
    })
}

/// Generalized Laguerre polynomial L_n^{(α)}(x) by the three-term recurrence.
pub fn laguerre_poly(n: usize, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Secondary route: the alternating power series
/// Q_μ(√(2a), √(2bx)) = 1 - Σ_n (-1)^n e^{-a} L_n^{(μ-1)}(a) (bx)^{n+μ} / Γ(n+μ+1),
/// evaluated here with b = 1, x = B²/2. Cross-check only.
pub fn marcum_q_laguerre_series(mu: f64, a: f64, b: f64) -> Result<f64> {
    if !(mu > 0.0) || a < 0.0 || b < 0.0 {
        return Err(Error::Domain("marcum_q_laguerre_series domain".into()));
    }
    let alpha = 0.5 * a * a;
    let x = 0.5 * b * b;
    if x == 0.0 {
        return Ok(1.0);
    }
    let e = (-alpha).exp();
    let mut cdf = 0.0f64;
    let mut last = f64::INFINITY;
    for n in 0..2_000usize {
        let term = if n % 2 == 0 { 1.0 } else { -1.0 }
            * e
            * laguerre_poly(n, mu - 1.0, alpha)
            * ((n as f64 + mu) * x.ln() - ln_gamma(n as f64 + mu + 1.0)?).exp();
        cdf += term;
        if term.abs() < 1e-15 * cdf.abs().max(1.0) && term.abs() < last {
            return Ok(1.0 - cdf);
        }
        last = term.abs();
    }
    Err(Error::NoConvergence {
        terms: 2_000,
        last_term: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn marcum_trivial_cases() {
        // CCDF at 0
        assert_eq!(marcum_q(2.5, 1.3, 0.0).unwrap(), 1.0);
        // Q_1(0, b) = e^{-b²/2}
        for &b in &[0.5, 1.3, 2.0] {
            assert_relative_eq!(
                marcum_q(1.0, 0.0, b).unwrap(),
                (-0.5 * b * b).exp(),
                max_relative = 1e-13
            );
        }
        assert!(marcum_q(0.0, 1.0, 1.0).is_err());
        assert!(marcum_q(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn marcum_frozen_value() {
        // Q_{1.5}(1, 2): frozen from direct integration of the noncentral-χ
        // density (verified to 20 digits against an independent oracle)
        assert_relative_eq!(
            marcum_q(1.5, 1.0, 2.0).unwrap(),
            0.397_544_028_070_292_49,
            max_relative = 1e-12
        );
    }

    #[test]
    fn secondary_series_cross_check() {
        for &(mu, a, b) in &[(1.0, 0.7, 1.1), (1.5, 1.0, 2.0), (2.0, 0.4, 0.9), (0.5, 1.2, 1.6)] {
            let primary = marcum_q(mu, a, b).unwrap();
            let series = marcum_q_laguerre_series(mu, a, b).unwrap();
            assert_relative_eq!(primary, series, max_relative = 1e-9);
        }
    }

    #[test]
    fn large_noncentrality_stays_stable() {
        // mode-outward summation keeps the Poisson weights representable
        let q = marcum_q(2.0, 40.0, 30.0).unwrap();
        assert!((0.0..=1.0).contains(&q));
        assert!(q > 0.999, "most mass above b when a >> b: {q}");
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(
            mu in 0.3f64..6.0,
            a in 0.0f64..4.0,
            b1 in 0.0f64..5.0,
            db in 0.0f64..3.0,
        ) {
            let q1 = marcum_q(mu, a, b1).unwrap();
            let q2 = marcum_q(mu, a, b1 + db).unwrap();
            prop_assert!((0.0..=1.0).contains(&q1));
            prop_assert!((0.0..=1.0).contains(&q2));
            prop_assert!(q2 <= q1 + 1e-12, "Q must be nonincreasing in b");
        }
    }
}
