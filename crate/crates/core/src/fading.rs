//! κ-μ and η-μ fading power distributions.
//!
//! Both laws are exact Gamma mixtures: a κ-μ power is Gamma(μ+N, w̄/(μ(1+κ)))
//! with N ~ Poisson(μκ), and an η-μ power is Gamma(2μ+2N, w̄/(2μh)) with N
//! negative-binomial of order μ and ratio (H/h)². The mixtures reproduce the
//! elementary Laplace transforms exactly (checked term-by-term in the tests),
//! which gives stable densities, CCDFs and exact samplers without evaluating
//! Bessel functions near removable singularities.

use crate::specfun::{
    self, hyp1f1, hyp2f1, ln_gamma, marcum_q, reg_lower_gamma, reg_upper_gamma,
};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, Poisson};

/// κ-μ parameter set: dominant-to-scattered power ratio κ ≥ 0, cluster number
/// μ > 0 (real-valued), mean power w̄ > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaMuParams {
    kappa: f64,
    mu: f64,
    mean_power: f64,
}

impl KappaMuParams {
    pub fn new(kappa: f64, mu: f64, mean_power: f64) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be >= 0, got {kappa}")));
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        if !(mean_power > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mean_power must be > 0, got {mean_power}"
            )));
        }
        Ok(Self { kappa, mu, mean_power })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }

    /// Scale of every Gamma component: w̄ / (μ(1+κ)).
    pub fn component_scale(&self) -> f64 {
        self.mean_power / (self.mu * (1.0 + self.kappa))
    }
}

/// η-μ parameter set (format 1): scattered-wave power ratio η > 0, cluster
/// parameter μ > 0, mean power w̄ > 0, with h = (2 + η⁻¹ + η)/4 and
/// H = (η⁻¹ - η)/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaMuParams {
    eta: f64,
    mu: f64,
    mean_power: f64,
    h: f64,
    big_h: f64,
}

impl EtaMuParams {
    pub fn new(eta: f64, mu: f64, mean_power: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eta must be a positive finite real (format 1), got {eta}"
            )));
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        if !(mean_power > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mean_power must be > 0, got {mean_power}"
            )));
        }
        let h = (2.0 + 1.0 / eta + eta) / 4.0;
        let big_h = (1.0 / eta - eta) / 4.0;
        Ok(Self { eta, mu, mean_power, h, big_h })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn mean_power(&self) -> f64 {
        self.mean_power
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn big_h(&self) -> f64 {
        self.big_h
    }

    /// (H/h)², the mixture ratio; strictly below 1.
    pub fn mix_ratio(&self) -> f64 {
        let r = self.big_h / self.h;
        r * r
    }

    /// Scale of every Gamma component: w̄ / (2μh).
    pub fn component_scale(&self) -> f64 {
        self.mean_power / (2.0 * self.mu * self.h)
    }
}

/// A fading power law for one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    KappaMu(KappaMuParams),
    EtaMu(EtaMuParams),
}

impl FadingModel {
    pub fn kappa_mu(kappa: f64, mu: f64, mean_power: f64) -> Result<Self> {
        Ok(Self::KappaMu(KappaMuParams::new(kappa, mu, mean_power)?))
    }

    pub fn eta_mu(eta: f64, mu: f64, mean_power: f64) -> Result<Self> {
        Ok(Self::EtaMu(EtaMuParams::new(eta, mu, mean_power)?))
    }

    /// Rayleigh: κ → 0, μ = 1.
    pub fn rayleigh(mean_power: f64) -> Result<Self> {
        Self::kappa_mu(0.0, 1.0, mean_power)
    }

    /// Rice with K-factor k: κ = K, μ = 1.
    pub fn rician(k: f64, mean_power: f64) -> Result<Self> {
        if !(k >= 0.0) {
            return Err(Error::InvalidParameter(format!("Rician K must be >= 0, got {k}")));
        }
        Self::kappa_mu(k, 1.0, mean_power)
    }

    /// Nakagami-m through the κ-μ family: κ → 0, μ = m.
    pub fn nakagami(m: f64, mean_power: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::InvalidParameter(format!("Nakagami m must be > 0, got {m}")));
        }
        Self::kappa_mu(0.0, m, mean_power)
    }

    /// Nakagami-m through the η-μ family: η = 1, μ = m/2.
    pub fn nakagami_via_eta_mu(m: f64, mean_power: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::InvalidParameter(format!("Nakagami m must be > 0, got {m}")));
        }
        Self::eta_mu(1.0, m / 2.0, mean_power)
    }

    /// Hoyt (Nakagami-q): η-μ with μ = 1/2, η = q².
    pub fn hoyt(q: f64, mean_power: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidParameter(format!("Hoyt q must be in (0, 1], got {q}")));
        }
        Self::eta_mu(q * q, 0.5, mean_power)
    }

    /// One-sided Gaussian: κ → 0, μ = 1/2.
    pub fn one_sided_gaussian(mean_power: f64) -> Result<Self> {
        Self::kappa_mu(0.0, 0.5, mean_power)
    }

    pub fn mean_power(&self) -> f64 {
        match self {
            Self::KappaMu(p) => p.mean_power,
            Self::EtaMu(p) => p.mean_power,
        }
    }

    /// Scale shared by all Gamma mixture components.
    pub fn component_scale(&self) -> f64 {
        match self {
            Self::KappaMu(p) => p.component_scale(),
            Self::EtaMu(p) => p.component_scale(),
        }
    }

    /// Mixture components (weight, gamma shape) with the common scale
    /// [`component_scale`](Self::component_scale), emitted until the skipped
    /// weight is below `tail_eps`.
    pub fn mixture_components(&self, tail_eps: f64) -> MixtureIter {
        match self {
            Self::KappaMu(p) => MixtureIter {
                kind: MixtureKind::Poisson { lambda: p.mu * p.kappa },
                shape0: p.mu,
                shape_step: 1.0,
                n: 0,
                weight: f64::NAN,
                cum: 0.0,
                tail_eps,
            },
            Self::EtaMu(p) => MixtureIter {
                kind: MixtureKind::NegBinomial { order: p.mu, ratio: p.mix_ratio() },
                shape0: 2.0 * p.mu,
                shape_step: 2.0,
                n: 0,
                weight: f64::NAN,
                cum: 0.0,
                tail_eps,
            },
        }
    }

    /// Density of the fading power at x > 0.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("pdf requires x > 0, got {x}")));
        }
        let scale = self.component_scale();
        let mut acc = 0.0;
        for (w, shape) in self.mixture_components(1e-16) {
            // Gamma density in log space
            let ln_pdf = (shape - 1.0) * (x / scale).ln() - x / scale
                - ln_gamma(shape)?
                - scale.ln();
            acc += w * ln_pdf.exp();
        }
        Ok(acc)
    }

    /// j-th moment E[G^j] for j > 0, by the closed hypergeometric forms.
    pub fn moment(&self, j: f64) -> Result<f64> {
        if !(j > 0.0) {
            return Err(Error::Domain(format!("moment requires j > 0, got {j}")));
        }
        match self {
            Self::KappaMu(p) => {
                let KappaMuParams { kappa, mu, mean_power } = *p;
                let ln_ratio = ln_gamma(mu + j)? - ln_gamma(mu)?;
                Ok(mean_power.powf(j) / ((1.0 + kappa) * mu).powf(j)
                    * (ln_ratio - mu * kappa).exp()
                    * hyp1f1(mu + j, mu, mu * kappa)?)
            }
            Self::EtaMu(p) => {
                let EtaMuParams { mu, mean_power, h, .. } = *p;
                let ln_ratio = ln_gamma(2.0 * mu + j)? - ln_gamma(2.0 * mu)?;
                Ok(mean_power.powf(j) / (h.powf(mu + j) * (2.0 * mu).powf(j))
                    * ln_ratio.exp()
                    * hyp2f1(mu + 0.5 * j + 0.5, mu + 0.5 * j, mu + 0.5, p.mix_ratio())?)
            }
        }
    }

    /// Laplace transform E[e^{-sG}] for s ≥ 0, by the elementary closed forms.
    pub fn laplace(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        if s == 0.0 {
            return 1.0;
        }
        match self {
            Self::KappaMu(p) => {
                let t = s * p.mean_power / (p.mu * (1.0 + p.kappa));
                (1.0 + t).powf(-p.mu) * (-p.mu * p.kappa * t / (1.0 + t)).exp()
            }
            Self::EtaMu(p) => {
                let z = 1.0 + s * p.mean_power / (2.0 * p.mu * p.h);
                let r = p.big_h / p.h;
                p.h.powf(-p.mu) * (z * z - r * r).powf(-p.mu)
            }
        }
    }

    /// CCDF P(G > x) for x ≥ 0.
    ///
    /// κ-μ uses the Marcum Q form Q_μ(√(2κμ), √(2μ(1+κ)x/w̄)); η-μ sums the
    /// negative-binomial mixture of regularized upper gammas.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("ccdf requires x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        match self {
            Self::KappaMu(p) => marcum_q(
                p.mu,
                (2.0 * p.kappa * p.mu).sqrt(),
                (2.0 * p.mu * (1.0 + p.kappa) * x / p.mean_power).sqrt(),
            ),
            Self::EtaMu(_) => {
                let scale = self.component_scale();
                let mut acc = 0.0;
                for (w, shape) in self.mixture_components(1e-14) {
                    acc += w * reg_upper_gamma(shape, x / scale)?;
                }
                Ok(acc.clamp(0.0, 1.0))
            }
        }
    }

    /// CDF P(G <= x), as the mixture of regularized lower gammas.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("cdf requires x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let scale = self.component_scale();
        let mut acc = 0.0;
        for (w, shape) in self.mixture_components(1e-14) {
            acc += w * reg_lower_gamma(shape, x / scale)?;
        }
        Ok(acc.clamp(0.0, 1.0))
    }

    /// Draw one fading power via the exact Gamma-mixture representation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let scale = self.component_scale();
        let shape = match self {
            Self::KappaMu(p) => {
                let lambda = p.mu * p.kappa;
                let n = if lambda > 0.0 {
                    Poisson::new(lambda).expect("validated").sample(rng)
                } else {
                    0.0
                };
                p.mu + n
            }
            Self::EtaMu(p) => {
                // negative binomial as a Gamma-mixed Poisson
                let ratio = p.mix_ratio();
                let n = if ratio > 0.0 {
                    let mix = GammaDist::new(p.mu, ratio / (1.0 - ratio))
                        .expect("validated")
                        .sample(rng);
                    if mix > 0.0 {
                        Poisson::new(mix).expect("positive").sample(rng)
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                2.0 * p.mu + 2.0 * n
            }
        };
        GammaDist::new(shape, scale).expect("validated").sample(rng)
    }
}

enum MixtureKind {
    Poisson { lambda: f64 },
    NegBinomial { order: f64, ratio: f64 },
}

/// Iterator over (weight, shape) mixture components; stops once the cumulative
/// weight reaches 1 - tail_eps (weights of both mixtures sum to exactly 1).
pub struct MixtureIter {
    kind: MixtureKind,
    shape0: f64,
    shape_step: f64,
    n: usize,
    weight: f64,
    cum: f64,
    tail_eps: f64,
}

impl Iterator for MixtureIter {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if 1.0 - self.cum < self.tail_eps || self.n > 100_000 {
            return None;
        }
        let w = if self.n == 0 {
            match &self.kind {
                MixtureKind::Poisson { lambda } => (-lambda).exp(),
                MixtureKind::NegBinomial { order, ratio } => (1.0 - ratio).powf(*order),
            }
        } else {
            let nf = self.n as f64 - 1.0;
            match &self.kind {
                MixtureKind::Poisson { lambda } => self.weight * lambda / (nf + 1.0),
                MixtureKind::NegBinomial { order, ratio } => {
                    self.weight * ratio * (nf + order) / (nf + 1.0)
                }
            }
        };
        self.weight = w;
        self.cum += w;
        let shape = self.shape0 + self.shape_step * self.n as f64;
        self.n += 1;
        Some((w, shape))
    }
}

/// Exact weight of the n-th η-μ mixture component,
/// a_n = C(n+μ-1, n) H^{2n} / h^{μ+2n}.
pub fn eta_mu_weight(params: &EtaMuParams, n: usize) -> f64 {
    let mu = params.mu;
    let ratio = params.mix_ratio();
    let binom = specfun::binomial_real(n as f64 + mu - 1.0, n as f64).unwrap_or(0.0);
    binom * ratio.powi(n as i32) * params.h.powf(-mu)
}
