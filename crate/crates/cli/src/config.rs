//! Flat JSON scenario configuration with CLI overrides.
//!
//! Every key carries explicit units (documented in the README); defaults
//! reproduce the reference urban macro deployment. Unknown keys are rejected
//! with a field-level message.

use anyhow::{anyhow, bail, Context};
use d2dgeo_core::fading::FadingModel;
use d2dgeo_core::metrics::{McFallback, ScenarioSpec};
use d2dgeo_core::network::NetworkParams;
use d2dgeo_core::sinr::QuadratureSpec;
use d2dgeo_core::LinkKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// BS intensity λ_b (per m²).
    pub lambda_b: f64,
    /// UE intensity λ (per m²).
    pub lambda: f64,
    /// Probability q that a UE is a potential D2D UE.
    pub q: f64,
    /// ALOHA transmit probability ε.
    pub epsilon: f64,
    /// D2D distance parameter ξ (per m²).
    pub xi: f64,
    /// Mode selection threshold θ (meters).
    pub theta_m: f64,
    /// Spectrum partition factor β in [0, 1].
    pub beta: f64,
    /// Cellular path-loss exponent τ_c (> 2).
    pub tau_c: f64,
    /// D2D path-loss exponent τ_d (> 2).
    pub tau_d: f64,
    /// Average received SNR w̄/N₀ in dB.
    pub snr_db: f64,
    /// Mean fading power w̄ (linear).
    pub mean_power: f64,
    /// Intended-link fading, e.g. "rayleigh", "kappa-mu:kappa=3,mu=2".
    pub fading_intended: String,
    /// Interfering-link fading, same syntax.
    pub fading_interferer: String,
    /// Analyzed link: "d2d" or "cellular".
    pub link: String,
    /// Gauss–Laguerre order of the expectation engine.
    pub laguerre_order: usize,
    /// Cluster-series tail tolerance of the engine.
    pub series_tail_eps: f64,
    /// Modulation constant a of the BEP kernel.
    pub mod_a: f64,
    /// Detection constant b of the BEP kernel.
    pub mod_b: f64,
    /// Monte Carlo drops.
    pub drops: usize,
    /// Interference draws of the hybrid SIR CCDF estimator.
    pub ccdf_samples: usize,
    /// Random seed for every stochastic path.
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        let cell = std::f64::consts::PI * 500.0 * 500.0;
        Self {
            lambda_b: 1.0 / cell,
            lambda: 10.0 / cell,
            q: 0.2,
            epsilon: 0.8,
            xi: 10.0 / cell,
            theta_m: 100.0,
            beta: 0.2,
            tau_c: 4.0,
            tau_d: 4.0,
            snr_db: 5.0,
            mean_power: 1.0,
            fading_intended: "rayleigh".into(),
            fading_interferer: "rayleigh".into(),
            link: "d2d".into(),
            laguerre_order: 64,
            series_tail_eps: 1e-10,
            mod_a: 0.5,
            mod_b: 0.5,
            drops: 100_000,
            ccdf_samples: 100_000,
            seed: 2024,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: Config = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn network_params(&self) -> anyhow::Result<NetworkParams> {
        let params = NetworkParams {
            lambda_b: self.lambda_b,
            lambda: self.lambda,
            q: self.q,
            epsilon: self.epsilon,
            xi: self.xi,
            theta: self.theta_m,
            beta: self.beta,
            tau_c: self.tau_c,
            tau_d: self.tau_d,
            n0: self.mean_power / 10f64.powf(self.snr_db / 10.0),
        };
        params.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(params)
    }

    pub fn link_kind(&self) -> anyhow::Result<LinkKind> {
        parse_link(&self.link)
    }

    pub fn scenario(&self) -> anyhow::Result<ScenarioSpec> {
        let params = self.network_params()?;
        let fading_intended = parse_fading(&self.fading_intended, self.mean_power)?;
        let fading_interferer = parse_fading(&self.fading_interferer, self.mean_power)?;
        let mut spec = ScenarioSpec::new(params, fading_intended, fading_interferer);
        spec.link = self.link_kind()?;
        spec.quad = QuadratureSpec {
            laguerre_order: self.laguerre_order,
            series_tail_eps: self.series_tail_eps,
            ..QuadratureSpec::default()
        };
        spec.modulation = (self.mod_a, self.mod_b);
        spec.mc_fallback = McFallback { drops: self.drops, seed: self.seed };
        Ok(spec)
    }

    /// SHA-256 of the canonical JSON serialization; two configs hash equal
    /// iff every semantic field matches.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_link(s: &str) -> anyhow::Result<LinkKind> {
    match s {
        "d2d" => Ok(LinkKind::D2d),
        "cellular" => Ok(LinkKind::Cellular),
        other => bail!("link must be 'd2d' or 'cellular', got '{other}'"),
    }
}

/// Parse "name" or "name:key=value,key=value" fading descriptors.
pub fn parse_fading(s: &str, mean_power: f64) -> anyhow::Result<FadingModel> {
    let (name, args) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), a),
        None => (s.trim(), ""),
    };
    let mut kv = std::collections::BTreeMap::new();
    for pair in args.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("fading '{s}': expected key=value, got '{pair}'"))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| anyhow!("fading '{s}': '{v}' is not a number"))?;
        kv.insert(k.trim().to_string(), value);
    }
    let take = |key: &str| {
        kv.get(key)
            .copied()
            .ok_or_else(|| anyhow!("fading '{s}': missing parameter '{key}'"))
    };
    let model = match name {
        "rayleigh" => FadingModel::rayleigh(mean_power),
        "rice" | "rician" => FadingModel::rician(take("k")?, mean_power),
        "nakagami" => FadingModel::nakagami(take("m")?, mean_power),
        "nakagami-eta" => FadingModel::nakagami_via_eta_mu(take("m")?, mean_power),
        "hoyt" => FadingModel::hoyt(take("q")?, mean_power),
        "one-sided-gaussian" | "osg" => FadingModel::one_sided_gaussian(mean_power),
        "kappa-mu" => FadingModel::kappa_mu(take("kappa")?, take("mu")?, mean_power),
        "eta-mu" => FadingModel::eta_mu(take("eta")?, take("mu")?, mean_power),
        other => bail!(
            "unknown fading '{other}' (expected rayleigh, rice, nakagami, nakagami-eta, \
             hoyt, one-sided-gaussian, kappa-mu or eta-mu)"
        ),
    };
    model.map_err(|e| anyhow!("fading '{s}': {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = Config::default();
        cfg.network_params().unwrap();
        cfg.scenario().unwrap();
        assert_eq!(cfg.network_params().unwrap().cell_radius().round(), 500.0);
    }

    #[test]
    fn fading_descriptor_parsing() {
        assert_eq!(
            parse_fading("rayleigh", 1.0).unwrap(),
            FadingModel::rayleigh(1.0).unwrap()
        );
        assert_eq!(
            parse_fading("kappa-mu:kappa=3,mu=2", 1.0).unwrap(),
            FadingModel::kappa_mu(3.0, 2.0, 1.0).unwrap()
        );
        assert_eq!(
            parse_fading("hoyt:q=0.5", 2.0).unwrap(),
            FadingModel::hoyt(0.5, 2.0).unwrap()
        );
        assert!(parse_fading("kappa-mu:kappa=3", 1.0).is_err());
        assert!(parse_fading("warp-drive", 1.0).is_err());
        assert!(parse_fading("nakagami:m=zero", 1.0).is_err());
    }

    #[test]
    fn hash_tracks_semantic_fields() {
        let a = Config::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.theta_m = 101.0;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<Config>(r#"{"thetam": 3}"#).unwrap_err();
        assert!(err.to_string().contains("thetam"));
    }
}
