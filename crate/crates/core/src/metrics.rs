//! Top-level performance metrics per UE class: average rates, average bit
//! error probabilities, and the SIR CCDF, for any combination of intended and
//! interfering fading laws.

use crate::curve::CurveSeries;
use crate::fading::FadingModel;
use crate::interference::{CellularTransform, D2dTransform, InterferenceLaplace};
use crate::mcsim::{self, Metric, SimConfig};
use crate::network::NetworkParams;
use crate::sinr::{expect, GFamily, QuadratureSpec};
use crate::{Error, LinkKind, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Monte Carlo settings used when an analytic path is unavailable.
#[derive(Debug, Clone, Copy)]
pub struct McFallback {
    pub drops: usize,
    pub seed: u64,
}

impl Default for McFallback {
    fn default() -> Self {
        Self { drops: 100_000, seed: 0xD2D }
    }
}

/// Full description of one evaluation scenario. Intended and interfering
/// links may carry different fading models.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub params: NetworkParams,
    pub fading_intended: FadingModel,
    pub fading_interferer: FadingModel,
    pub link: LinkKind,
    pub quad: QuadratureSpec,
    /// (a, b): modulation and detection constants of the BEP kernel.
    pub modulation: (f64, f64),
    pub mc_fallback: McFallback,
}

impl ScenarioSpec {
    pub fn new(
        params: NetworkParams,
        fading_intended: FadingModel,
        fading_interferer: FadingModel,
    ) -> Self {
        Self {
            params,
            fading_intended,
            fading_interferer,
            link: LinkKind::D2d,
            quad: QuadratureSpec::default(),
            modulation: (0.5, 0.5),
            mc_fallback: McFallback::default(),
        }
    }

    fn transform(&self, link: LinkKind) -> Result<InterferenceLaplace> {
        Ok(match link {
            LinkKind::D2d => {
                InterferenceLaplace::D2d(D2dTransform::new(&self.fading_interferer, &self.params)?)
            }
            LinkKind::Cellular => InterferenceLaplace::Cellular(CellularTransform::new(
                &self.fading_interferer,
                &self.params,
            )),
        })
    }

    fn sim_config(&self) -> SimConfig {
        SimConfig::new(
            self.params,
            self.fading_intended,
            self.fading_interferer,
            self.mc_fallback.drops,
            self.mc_fallback.seed,
        )
    }
}

/// Average rates in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    /// Cellular UE: (1-β) E[1/N] E[ln(1+SINR_c)].
    pub cellular: f64,
    /// Potential D2D UE in D2D mode: βε E[ln(1+SINR_d)].
    pub d2d_mode: f64,
    /// Potential D2D UE: mode-probability mixture of the two.
    pub potential_d2d: f64,
}

/// Average bit error probabilities in [0, 1/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BepReport {
    pub cellular: f64,
    pub d2d_mode: f64,
    /// Rate-weighted mixture across modes.
    pub potential_d2d: f64,
    /// True when a non-integer derivative order forced the MC estimator.
    pub used_mc_fallback: bool,
}

/// Average rates of the three UE classes.
pub fn avg_rates(spec: &ScenarioSpec) -> Result<RateReport> {
    spec.params.validate()?;
    let p_d2d = spec.params.p_d2d_mode();
    let e_log_c = expect(
        &GFamily::Rate,
        &spec.fading_intended,
        &spec.transform(LinkKind::Cellular)?,
        spec.params.n0,
        &spec.quad,
    )?;
    let e_log_d = expect(
        &GFamily::Rate,
        &spec.fading_intended,
        &spec.transform(LinkKind::D2d)?,
        spec.params.n0,
        &spec.quad,
    )?;
    let cellular = (1.0 - spec.params.beta) * spec.params.mean_inverse_n() * e_log_c;
    let d2d_mode = spec.params.beta * spec.params.epsilon * e_log_d;
    Ok(RateReport {
        cellular,
        d2d_mode,
        potential_d2d: cellular * (1.0 - p_d2d) + d2d_mode * p_d2d,
    })
}

fn bep_one_link(spec: &ScenarioSpec, link: LinkKind) -> Result<(f64, bool)> {
    let (a, b) = spec.modulation;
    let g = GFamily::Bep { a, b };
    match expect(
        &g,
        &spec.fading_intended,
        &spec.transform(link)?,
        spec.params.n0,
        &spec.quad,
    ) {
        Ok(v) => Ok((v.clamp(0.0, 0.5), false)),
        Err(Error::Unsupported(reason)) => {
            log::warn!("analytic BEP unavailable ({reason}); falling back to Monte Carlo");
            let curve = mcsim::estimate(&spec.sim_config(), link, &Metric::Bep { a, b })?;
            Ok((curve.points[0].y, true))
        }
        Err(e) => Err(e),
    }
}

/// Average BEP of the three UE classes. Routes to the Monte Carlo estimator
/// (with a logged notice) when the fading order makes the analytic kernel
/// unavailable.
pub fn avg_bep(spec: &ScenarioSpec) -> Result<BepReport> {
    spec.params.validate()?;
    let (p_ec, mc_c) = bep_one_link(spec, LinkKind::Cellular)?;
    let (p_ed_hat, mc_d) = bep_one_link(spec, LinkKind::D2d)?;
    let rates = avg_rates(spec)?;
    let p_d2d = spec.params.p_d2d_mode();
    let w_c = rates.cellular * (1.0 - p_d2d);
    let w_d = rates.d2d_mode * p_d2d;
    let potential_d2d = if w_c + w_d > 0.0 {
        (w_c * p_ec + w_d * p_ed_hat) / (w_c + w_d)
    } else {
        // rate weights degenerate (e.g. β ∈ {0,1} with one-sided mode split):
        // weight by mode probabilities alone
        (1.0 - p_d2d) * p_ec + p_d2d * p_ed_hat
    };
    Ok(BepReport {
        cellular: p_ec,
        d2d_mode: p_ed_hat,
        potential_d2d,
        used_mc_fallback: mc_c || mc_d,
    })
}

/// SIR CCDF of the configured link over an ascending positive grid, as the
/// hybrid estimator E_I[CCDF_W(x·I)] with per-point standard errors.
///
/// The interference is drawn from the law behind the analytic transform: a
/// one-sided stable variable for the D2D link (index δ_d, scale c^{1/δ_d}),
/// and the exclusion-zone PPP uplink field for the cellular link.
pub fn sir_ccdf(spec: &ScenarioSpec, x_grid: &[f64], samples: usize) -> Result<CurveSeries> {
    spec.params.validate()?;
    if x_grid.is_empty() || x_grid[0] <= 0.0 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "x_grid must be positive and strictly ascending".into(),
        ));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let interference = sample_interference(spec, samples)?;

    let intended = spec.fading_intended;
    let mut curve = CurveSeries::new(
        format!("{}-sir-ccdf", spec.link),
        "threshold",
        "linear",
        "ccdf",
        "probability",
    );
    let stats: Vec<(f64, f64)> = x_grid
        .par_iter()
        .map(|&x| {
            let mut sum = 0.0;
            let mut sq = 0.0;
            for &i in &interference {
                let v = intended.ccdf(x * i).unwrap_or(0.0);
                sum += v;
                sq += v * v;
            }
            let n = interference.len() as f64;
            let mean = sum / n;
            let var = (sq / n - mean * mean).max(0.0);
            (mean, (var / n).sqrt())
        })
        .collect();
    for (&x, &(mean, se)) in x_grid.iter().zip(&stats) {
        curve.push(x, mean, Some(se));
    }
    Ok(curve)
}

/// Interference draws matching the analytic transform of the chosen link.
fn sample_interference(spec: &ScenarioSpec, samples: usize) -> Result<Vec<f64>> {
    match spec.link {
        LinkKind::D2d => {
            let t = D2dTransform::new(&spec.fading_interferer, &spec.params)?;
            let scale = if t.constant() > 0.0 {
                t.constant().powf(1.0 / t.delta())
            } else {
                0.0
            };
            let delta = t.delta();
            let seed = spec.mc_fallback.seed;
            Ok((0..samples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(k as u64);
                    if scale > 0.0 {
                        scale * mcsim::sample_positive_stable(delta, &mut rng)
                    } else {
                        0.0
                    }
                })
                .collect())
        }
        LinkKind::Cellular => {
            let cfg = spec.sim_config();
            Ok((0..samples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(0x4000_0000 + k as u64);
                    mcsim::analytic_cellular_interference(&cfg, &mut rng)
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rayleigh_spec() -> ScenarioSpec {
        ScenarioSpec::new(
            NetworkParams::default(),
            FadingModel::rayleigh(1.0).unwrap(),
            FadingModel::rayleigh(1.0).unwrap(),
        )
    }

    #[test]
    fn spectrum_partition_extremes() {
        let mut spec = rayleigh_spec();
        spec.params.beta = 0.0;
        let r = avg_rates(&spec).unwrap();
        assert_eq!(r.d2d_mode, 0.0);
        assert!(r.cellular > 0.0);
        spec.params.beta = 1.0;
        let r = avg_rates(&spec).unwrap();
        assert_eq!(r.cellular, 0.0);
        assert!(r.d2d_mode > 0.0);
    }

    #[test]
    fn potential_d2d_rate_is_convex_combination() {
        let spec = rayleigh_spec();
        let r = avg_rates(&spec).unwrap();
        let lo = r.cellular.min(r.d2d_mode);
        let hi = r.cellular.max(r.d2d_mode);
        assert!(r.potential_d2d >= lo && r.potential_d2d <= hi, "{r:?}");
    }

    #[test]
    fn d2d_beats_cellular_at_reference_partition() {
        // β = 0.2, SNR = 5 dB, Rayleigh on both links
        let spec = rayleigh_spec();
        let r = avg_rates(&spec).unwrap();
        assert!(r.d2d_mode > r.cellular, "{r:?}");
    }

    #[test]
    fn bep_reports_bounded_and_weighted() {
        let mut spec = ScenarioSpec::new(
            NetworkParams::default(),
            FadingModel::kappa_mu(3.0, 2.0, 1.0).unwrap(),
            FadingModel::kappa_mu(3.0, 2.0, 1.0).unwrap(),
        );
        spec.params.n0 = 0.1;
        let b = avg_bep(&spec).unwrap();
        assert!(!b.used_mc_fallback);
        for v in [b.cellular, b.d2d_mode, b.potential_d2d] {
            assert!((0.0..=0.5).contains(&v), "{b:?}");
        }
        let lo = b.cellular.min(b.d2d_mode);
        let hi = b.cellular.max(b.d2d_mode);
        assert!(b.potential_d2d >= lo - 1e-12 && b.potential_d2d <= hi + 1e-12);
    }

    #[test]
    fn bep_saturates_at_half_in_heavy_noise() {
        let mut spec = rayleigh_spec();
        spec.params.n0 = 1e9;
        let b = avg_bep(&spec).unwrap();
        assert_relative_eq!(b.d2d_mode, 0.5, epsilon = 1e-4);
    }

    #[test]
    fn non_integer_mu_routes_to_mc() {
        let mut spec = ScenarioSpec::new(
            NetworkParams::default(),
            FadingModel::kappa_mu(1.0, 1.3, 1.0).unwrap(),
            FadingModel::rayleigh(1.0).unwrap(),
        );
        spec.mc_fallback.drops = 2_000;
        let b = avg_bep(&spec).unwrap();
        assert!(b.used_mc_fallback);
        assert!((0.0..=0.5).contains(&b.d2d_mode));
    }

    #[test]
    fn sir_ccdf_rejects_bad_grid() {
        let spec = rayleigh_spec();
        assert!(sir_ccdf(&spec, &[], 100).is_err());
        assert!(sir_ccdf(&spec, &[0.0, 1.0], 100).is_err());
        assert!(sir_ccdf(&spec, &[1.0, 0.5], 100).is_err());
    }

    #[test]
    fn rayleigh_hybrid_collapses_to_transform() {
        // exponential W turns the hybrid into ℒ_{I_d}(x/w̄) exactly
        let mut spec = rayleigh_spec();
        spec.mc_fallback.seed = 7;
        let transform = D2dTransform::new(&spec.fading_interferer, &spec.params).unwrap();
        let grid = [0.1, 1.0, 10.0];
        let curve = sir_ccdf(&spec, &grid, 30_000).unwrap();
        for pt in &curve.points {
            let exact = transform.eval(pt.x);
            let se = pt.stderr.unwrap();
            assert!(
                (pt.y - exact).abs() <= 3.0 * se.max(1e-5),
                "x={}: hybrid {} vs exact {exact} (se {se})",
                pt.x,
                pt.y
            );
        }
    }

    #[test]
    fn ccdf_monotone_and_normalized_at_origin() {
        let mut spec = rayleigh_spec();
        spec.link = LinkKind::Cellular;
        spec.mc_fallback.drops = 5_000;
        let grid: Vec<f64> = (0..12).map(|i| 10f64.powf(-3.0 + 0.5 * i as f64)).collect();
        let curve = sir_ccdf(&spec, &grid, 5_000).unwrap();
        assert!(curve.points.windows(2).all(|w| w[1].y <= w[0].y + 1e-12));
        assert!(curve.points[0].y > 0.99, "x→0 should give 1: {}", curve.points[0].y);
    }
}
