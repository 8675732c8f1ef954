//! Deployment geometry: link-length laws, distance-based mode selection,
//! thinned intensities and transmit-power moments under channel inversion.

use crate::specfun::lower_incomplete_gamma;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// All deployment constants, SI units throughout (intensities per m²,
/// distances in meters, powers linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// BS intensity λ_b (per m²).
    pub lambda_b: f64,
    /// UE intensity λ (per m²).
    pub lambda: f64,
    /// Probability q that a UE is a potential D2D UE.
    pub q: f64,
    /// ALOHA transmit probability ε of D2D transmitters.
    pub epsilon: f64,
    /// D2D distance parameter ξ (per m²) of the Rayleigh link-length law.
    pub xi: f64,
    /// Mode selection threshold θ (m): D2D mode iff link length <= θ.
    pub theta: f64,
    /// Spectrum partition factor β in [0, 1] reserved for D2D.
    pub beta: f64,
    /// Cellular path-loss exponent τ_c > 2.
    pub tau_c: f64,
    /// D2D path-loss exponent τ_d > 2.
    pub tau_d: f64,
    /// Noise power N₀ (linear).
    pub n0: f64,
}

impl Default for NetworkParams {
    /// Reference urban macro deployment: λ_b = 1/(π·500²), λ = ξ = 10/(π·500²),
    /// ε = 0.8, τ_c = τ_d = 4, β = 0.2, θ = 100 m, q = 0.2, SNR 5 dB at unit
    /// mean power.
    fn default() -> Self {
        let cell = std::f64::consts::PI * 500.0 * 500.0;
        Self {
            lambda_b: 1.0 / cell,
            lambda: 10.0 / cell,
            q: 0.2,
            epsilon: 0.8,
            xi: 10.0 / cell,
            theta: 100.0,
            beta: 0.2,
            tau_c: 4.0,
            tau_d: 4.0,
            n0: 10f64.powf(-0.5),
        }
    }
}

/// UE class whose transmit-power moments are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerKind {
    /// Cellular UE: inverts a uniform-in-cell distance, P = L_c^{τ_c}.
    Cellular,
    /// Potential D2D UE already in D2D mode: inverts a truncated length.
    D2dMode,
    /// Potential D2D UE before mode selection (mixture of the two).
    PotentialD2d,
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_b", self.lambda_b),
            ("lambda", self.lambda),
            ("xi", self.xi),
            ("n0", self.n0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        let probs = [("q", self.q), ("epsilon", self.epsilon), ("beta", self.beta)];
        for (name, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be in [0, 1], got {v}"
                )));
            }
        }
        if !(self.theta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must be >= 0, got {}",
                self.theta
            )));
        }
        for (name, v) in [("tau_c", self.tau_c), ("tau_d", self.tau_d)] {
            if !(v > 2.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must exceed 2 for the interference to converge, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Cell radius R = (πλ_b)^{-1/2} of the circular-disk uplink approximation.
    pub fn cell_radius(&self) -> f64 {
        1.0 / (std::f64::consts::PI * self.lambda_b).sqrt()
    }

    /// Stability index of the cellular link, δ_c = 2/τ_c.
    pub fn delta_c(&self) -> f64 {
        2.0 / self.tau_c
    }

    /// Stability index of the D2D link, δ_d = 2/τ_d.
    pub fn delta_d(&self) -> f64 {
        2.0 / self.tau_d
    }

    /// Density of the D2D link length, f(x) = 2πξx e^{-ξπx²}.
    pub fn d2d_length_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let xi_pi = self.xi * std::f64::consts::PI;
        2.0 * xi_pi * x * (-xi_pi * x * x).exp()
    }

    /// CDF of the D2D link length, 1 - e^{-ξπx²}.
    pub fn d2d_length_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -(-self.xi * std::f64::consts::PI * x * x).exp_m1()
    }

    /// Draw a D2D link length by inverse CDF.
    pub fn d2d_length_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        (-(1.0 - u).ln() / (self.xi * std::f64::consts::PI)).sqrt()
    }

    /// Draw a D2D link length conditioned on being <= θ.
    pub fn d2d_length_sample_truncated<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = self.p_d2d_mode();
        let u: f64 = rng.random::<f64>() * p;
        (-(1.0 - u).ln() / (self.xi * std::f64::consts::PI)).sqrt()
    }

    /// Density of the cellular link length, 2x/R² on [0, R].
    pub fn cellular_length_pdf(&self, x: f64) -> Result<f64> {
        let r = self.cell_radius();
        if !(0.0..=r).contains(&x) {
            return Err(Error::Domain(format!(
                "cellular link length lives on [0, {r}], got {x}"
            )));
        }
        Ok(2.0 * x / (r * r))
    }

    /// Probability a potential D2D UE selects D2D mode, P(L_d <= θ).
    pub fn p_d2d_mode(&self) -> f64 {
        -(-self.xi * std::f64::consts::PI * self.theta * self.theta).exp_m1()
    }

    /// Thinned intensities (λ_c, λ_d) of cellular-mode and D2D-mode UEs;
    /// always sums to λ.
    pub fn intensities(&self) -> (f64, f64) {
        let p = self.p_d2d_mode();
        let lambda_d = self.q * p * self.lambda;
        (self.lambda - lambda_d, lambda_d)
    }

    /// n-th moment of the transmit power of the given UE class under channel
    /// inversion.
    pub fn power_moment(&self, kind: PowerKind, n: f64) -> Result<f64> {
        if !(n > 0.0) {
            return Err(Error::Domain(format!("power moment requires n > 0, got {n}")));
        }
        let cellular = || -> f64 {
            let r = self.cell_radius();
            r.powf(self.tau_c * n) / (1.0 + 0.5 * self.tau_c * n)
        };
        match kind {
            PowerKind::Cellular => Ok(cellular()),
            PowerKind::D2dMode => {
                let p = self.p_d2d_mode();
                if p == 0.0 {
                    return Err(Error::Domain(
                        "D2D-mode power moment undefined for theta = 0".into(),
                    ));
                }
                let xi_pi = self.xi * std::f64::consts::PI;
                let a = 1.0 + 0.5 * self.tau_d * n;
                Ok(xi_pi.powf(-0.5 * self.tau_d * n)
                    * lower_incomplete_gamma(a, xi_pi * self.theta * self.theta)?
                    / p)
            }
            PowerKind::PotentialD2d => {
                let xi_pi = self.xi * std::f64::consts::PI;
                let a = 1.0 + 0.5 * self.tau_d * n;
                Ok(xi_pi.powf(-0.5 * self.tau_d * n)
                    * lower_incomplete_gamma(a, xi_pi * self.theta * self.theta)?
                    + (1.0 - self.p_d2d_mode()) * cellular())
            }
        }
    }

    /// E[1/N] for the cellular share, (λ_b/λ_c)(1 - e^{-λ_c/λ_b}); continuous
    /// limit 1 as λ_c → 0.
    pub fn mean_inverse_n(&self) -> f64 {
        let (lambda_c, _) = self.intensities();
        let rho = lambda_c / self.lambda_b;
        if rho == 0.0 {
            return 1.0;
        }
        -(-rho).exp_m1() / rho
    }
}
