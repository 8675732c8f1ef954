//! Stochastic-geometry Monte Carlo simulator.
//!
//! D2D link: receiver at the origin, interferers form a thinned PPP with
//! truncated-length inversion powers. Cellular link: hexagonal-grid uplink
//! with one uniformly chosen active UE per nonempty cell, which deliberately
//! differs from the PPP approximation behind the analytical transform — the
//! residual gap is part of what the validation suite measures.
//!
//! Drops run in parallel over counter-based per-drop substreams, and all
//! aggregation is sequential over the drop index, so a given seed and config
//! produce bit-identical outputs on any thread count.

use crate::curve::CurveSeries;
use crate::fading::FadingModel;
use crate::network::NetworkParams;
use crate::specfun::reg_upper_gamma;
use crate::{Error, LinkKind, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

/// Simulator configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: NetworkParams,
    pub fading_intended: FadingModel,
    pub fading_interferer: FadingModel,
    pub drops: usize,
    /// Analysis window radius in units of the cell radius R (>= 10).
    pub window_radius_cells: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        params: NetworkParams,
        fading_intended: FadingModel,
        fading_interferer: FadingModel,
        drops: usize,
        seed: u64,
    ) -> Self {
        Self {
            params,
            fading_intended,
            fading_interferer,
            drops,
            window_radius_cells: 15.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.window_radius_cells < 10.0 {
            return Err(Error::InvalidParameter(format!(
                "window_radius_cells must be >= 10 to guard edge effects, got {}",
                self.window_radius_cells
            )));
        }
        if self.drops == 0 {
            return Err(Error::InvalidParameter("drops must be positive".into()));
        }
        Ok(())
    }

    fn window_radius(&self) -> f64 {
        self.window_radius_cells * self.params.cell_radius()
    }

    /// Independent per-drop random stream; parallel and serial runs agree.
    fn drop_rng(&self, drop: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(drop as u64);
        rng
    }
}

/// One network realization seen from the typical receiver.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot {
    pub link: LinkKind,
    pub signal: f64,
    pub interference: f64,
    pub noise: f64,
    pub sinr: f64,
    /// Cellular only: 1 + number of co-cell cellular-mode UEs sharing the
    /// uplink.
    pub cell_load: Option<u32>,
    /// Cellular only: no PPP cellular-mode UE fell in the center cell.
    pub empty_cell: bool,
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    }
}

fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> (f64, f64) {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    (r * phi.cos(), r * phi.sin())
}

/// Snapshot of the typical D2D receiver at the origin.
pub fn d2d_snapshot(cfg: &SimConfig, rng: &mut impl Rng) -> Snapshot {
    let p = &cfg.params;
    let signal = cfg.fading_intended.sample(rng);
    // the intended transmitter sits at a truncated length; channel inversion
    // makes the received signal equal to its fading draw, but the length draw
    // is kept in the stream so thinning changes do not silently reshuffle it
    let _intended_length = p.d2d_length_sample_truncated(rng);

    let (_, lambda_d) = p.intensities();
    let rw = cfg.window_radius();
    let mean = p.epsilon * lambda_d * std::f64::consts::PI * rw * rw;
    let count = poisson_count(rng, mean);
    let mut interference = 0.0;
    for _ in 0..count {
        let (x, y) = uniform_in_disk(rng, rw);
        let dist = (x * x + y * y).sqrt().max(1e-9);
        let length = p.d2d_length_sample_truncated(rng);
        let gain = cfg.fading_interferer.sample(rng);
        interference += length.powf(p.tau_d) * gain * dist.powf(-p.tau_d);
    }
    let sinr = signal / (interference + p.n0);
    Snapshot {
        link: LinkKind::D2d,
        signal,
        interference,
        noise: p.n0,
        sinr,
        cell_load: None,
        empty_cell: false,
    }
}

/// Hexagonal lattice with one cell of area 1/λ_b; pointy-top orientation.
struct HexGrid {
    /// circumradius of a cell
    a: f64,
}

impl HexGrid {
    fn new(lambda_b: f64) -> Self {
        // hexagon area (3√3/2) a² = 1/λ_b
        let a = (2.0 / (3.0 * 3f64.sqrt() * lambda_b)).sqrt();
        Self { a }
    }

    fn center(&self, i: i64, j: i64) -> (f64, f64) {
        let w = 3f64.sqrt() * self.a;
        (w * (i as f64 + 0.5 * j as f64), 1.5 * self.a * j as f64)
    }

    /// Index of the nearest BS to (x, y): fractional lattice solve plus a
    /// local 3x3 scan (the honeycomb Voronoi cell never extends further).
    fn nearest(&self, x: f64, y: f64) -> (i64, i64) {
        let w = 3f64.sqrt() * self.a;
        let jf = y / (1.5 * self.a);
        let ifl = x / w - 0.5 * jf;
        let (i0, j0) = (ifl.round() as i64, jf.round() as i64);
        let mut best = (i0, j0);
        let mut best_d2 = f64::INFINITY;
        for di in -1..=1 {
            for dj in -1..=1 {
                let (cx, cy) = self.center(i0 + di, j0 + dj);
                let d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = (i0 + di, j0 + dj);
                }
            }
        }
        best
    }

    /// Uniform point in the cell of BS (0, 0), by rejection from the bounding
    /// box of the pointy-top hexagon.
    fn uniform_in_center_cell<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let half_w = 0.5 * 3f64.sqrt() * self.a;
        loop {
            let x = (2.0 * rng.random::<f64>() - 1.0) * half_w;
            let y = (2.0 * rng.random::<f64>() - 1.0) * self.a;
            if y.abs() <= self.a - x.abs() / 3f64.sqrt() {
                return (x, y);
            }
        }
    }
}

/// Snapshot of the typical cellular BS at the origin of a hexagonal grid.
pub fn cellular_snapshot(cfg: &SimConfig, rng: &mut impl Rng) -> Snapshot {
    let p = &cfg.params;
    let grid = HexGrid::new(p.lambda_b);
    let rw = cfg.window_radius();

    // scatter UEs and classify; cellular-mode UEs contend for their cells
    let count = poisson_count(rng, p.lambda * std::f64::consts::PI * rw * rw);
    // cell index -> candidate (position, distance to own BS)
    let mut cells: std::collections::BTreeMap<(i64, i64), Vec<(f64, f64, f64)>> =
        std::collections::BTreeMap::new();
    for _ in 0..count {
        let (x, y) = uniform_in_disk(rng, rw);
        let is_potential = rng.random::<f64>() < p.q;
        let cellular_mode = if is_potential {
            p.d2d_length_sample(rng) > p.theta
        } else {
            true
        };
        if cellular_mode {
            let cell = grid.nearest(x, y);
            let (bx, by) = grid.center(cell.0, cell.1);
            let own = ((x - bx) * (x - bx) + (y - by) * (y - by)).sqrt();
            cells.entry(cell).or_default().push((x, y, own));
        }
    }

    // intended UE: uniform in the center cell, inverted power
    let _ = grid.uniform_in_center_cell(rng);
    let signal = cfg.fading_intended.sample(rng);
    let center_count = cells.get(&(0, 0)).map_or(0, |v| v.len());
    let cell_load = 1 + center_count as u32;

    // one active uplink UE per nonempty non-center cell; deterministic
    // iteration order over the BTreeMap keeps the stream reproducible
    let mut interference = 0.0;
    for (cell, members) in &cells {
        if *cell == (0, 0) {
            continue;
        }
        let pick = rng.random_range(0..members.len());
        let (x, y, own) = members[pick];
        let dist = (x * x + y * y).sqrt().max(1e-9);
        let gain = cfg.fading_interferer.sample(rng);
        interference += own.powf(p.tau_c) * gain * dist.powf(-p.tau_c);
    }

    let sinr = signal / (interference + p.n0);
    Snapshot {
        link: LinkKind::Cellular,
        signal,
        interference,
        noise: p.n0,
        sinr,
        cell_load: Some(cell_load),
        empty_cell: center_count == 0,
    }
}

/// Interference draw from the analytical cellular uplink model (PPP of active
/// UEs outside the exclusion radius R, channel-inversion power over a
/// uniform-in-cell distance). This is the exact stochastic representation of
/// the cellular interference transform and backs the hybrid SIR CCDF.
pub fn analytic_cellular_interference(cfg: &SimConfig, rng: &mut impl Rng) -> f64 {
    let p = &cfg.params;
    let r = p.cell_radius();
    let rw = cfg.window_radius();
    let mean = p.lambda_b * std::f64::consts::PI * (rw * rw - r * r);
    let count = poisson_count(rng, mean);
    let mut interference = 0.0;
    for _ in 0..count {
        // uniform in the annulus [R, R_w]
        let u: f64 = rng.random();
        let dist = (r * r + u * (rw * rw - r * r)).sqrt();
        let own = r * rng.random::<f64>().sqrt();
        let gain = cfg.fading_interferer.sample(rng);
        interference += own.powf(p.tau_c) * gain * dist.powf(-p.tau_c);
    }
    interference
}

/// Metric estimated over the drops.
#[derive(Debug, Clone)]
pub enum Metric {
    /// Empirical CCDF of the SINR over the given ascending grid.
    Ccdf(Vec<f64>),
    /// Average rate with the class prefactor of the rate theorem applied
    /// ((1-β)E[1/N] for cellular, βε for D2D).
    Rate,
    /// Average conditional BEP Γ(b, a·sinr)/(2Γ(b)).
    Bep { a: f64, b: f64 },
}

fn snapshot_for(cfg: &SimConfig, link: LinkKind, drop: usize) -> Snapshot {
    let mut rng = cfg.drop_rng(drop);
    match link {
        LinkKind::D2d => d2d_snapshot(cfg, &mut rng),
        LinkKind::Cellular => cellular_snapshot(cfg, &mut rng),
    }
}

/// Mean and standard error, accumulated in drop order.
fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Run the simulator and estimate a metric with per-point standard errors.
pub fn estimate(cfg: &SimConfig, link: LinkKind, metric: &Metric) -> Result<CurveSeries> {
    cfg.validate()?;
    if cfg.drops < 1_000 {
        return Err(Error::InvalidParameter(format!(
            "estimates need at least 1000 drops, got {}",
            cfg.drops
        )));
    }
    let sinrs: Vec<f64> = (0..cfg.drops)
        .into_par_iter()
        .map(|d| snapshot_for(cfg, link, d).sinr)
        .collect();

    let p = &cfg.params;
    match metric {
        Metric::Ccdf(grid) => {
            let mut curve = CurveSeries::new(
                format!("{link}-sir-ccdf-mc"),
                "threshold",
                "linear",
                "ccdf",
                "probability",
            );
            for &x in grid {
                let hits = sinrs.iter().filter(|&&s| s > x).count() as f64;
                let n = cfg.drops as f64;
                let p_hat = hits / n;
                let se = (p_hat * (1.0 - p_hat) / n).sqrt();
                curve.push(x, p_hat, Some(se));
            }
            Ok(curve)
        }
        Metric::Rate => {
            let prefactor = match link {
                LinkKind::Cellular => (1.0 - p.beta) * p.mean_inverse_n(),
                LinkKind::D2d => p.beta * p.epsilon,
            };
            let values: Vec<f64> = sinrs.iter().map(|s| s.ln_1p()).collect();
            let (mean, se) = mean_se(&values);
            let mut curve = CurveSeries::new(
                format!("{link}-rate-mc"),
                "index",
                "",
                "rate",
                "nats/channel use",
            );
            curve.push(0.0, prefactor * mean, Some(prefactor * se));
            Ok(curve)
        }
        Metric::Bep { a, b } => {
            let values: Vec<f64> = sinrs
                .iter()
                .map(|s| 0.5 * reg_upper_gamma(*b, a * s).unwrap_or(0.0))
                .collect();
            let (mean, se) = mean_se(&values);
            let mut curve =
                CurveSeries::new(format!("{link}-bep-mc"), "index", "", "bep", "probability");
            curve.push(0.0, mean, Some(se));
            Ok(curve)
        }
    }
}

/// Empirical mean of 1/N over the drops (cellular cell load).
pub fn empirical_mean_inverse_n(cfg: &SimConfig) -> (f64, f64) {
    let values: Vec<f64> = (0..cfg.drops)
        .into_par_iter()
        .map(|d| {
            let mut rng = cfg.drop_rng(d);
            let snap = cellular_snapshot(cfg, &mut rng);
            1.0 / snap.cell_load.unwrap() as f64
        })
        .collect();
    mean_se(&values)
}

/// Draw of a standard one-sided stable variable with Laplace transform
/// exp(-s^alpha), 0 < alpha < 1 (Kanter's representation).
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let u = std::f64::consts::PI * rng.random::<f64>();
    let e: f64 = -rng.random::<f64>().ln();
    let sin_u = u.sin();
    let factor = ((alpha * u).sin() / sin_u).powf(alpha / (1.0 - alpha))
        * (((1.0 - alpha) * u).sin() / sin_u);
    (factor / e).powf((1.0 - alpha) / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::D2dTransform;

    fn base_config(drops: usize, seed: u64) -> SimConfig {
        SimConfig::new(
            NetworkParams::default(),
            FadingModel::rayleigh(1.0).unwrap(),
            FadingModel::rayleigh(1.0).unwrap(),
            drops,
            seed,
        )
    }

    #[test]
    fn validation_guards() {
        let mut cfg = base_config(100, 1);
        cfg.window_radius_cells = 5.0;
        assert!(cfg.validate().is_err());
        let cfg = base_config(0, 1);
        assert!(cfg.validate().is_err());
        let cfg = base_config(100, 1);
        assert!(estimate(&cfg, LinkKind::D2d, &Metric::Rate).is_err());
    }

    #[test]
    fn aloha_off_means_no_interference() {
        let mut cfg = base_config(100, 3);
        cfg.params.epsilon = 0.0;
        let mut rng = cfg.drop_rng(0);
        for _ in 0..50 {
            let snap = d2d_snapshot(&cfg, &mut rng);
            assert_eq!(snap.interference, 0.0);
        }
    }

    #[test]
    fn snapshot_components_recompose() {
        let cfg = base_config(100, 5);
        for d in 0..50 {
            let snap = snapshot_for(&cfg, LinkKind::D2d, d);
            assert_eq!(snap.sinr, snap.signal / (snap.interference + snap.noise));
            assert!(snap.signal >= 0.0 && snap.interference >= 0.0);
            let snap = snapshot_for(&cfg, LinkKind::Cellular, d);
            assert_eq!(snap.sinr, snap.signal / (snap.interference + snap.noise));
        }
    }

    #[test]
    fn all_d2d_with_huge_threshold_empties_cells() {
        let mut cfg = base_config(100, 9);
        cfg.params.q = 1.0;
        cfg.params.theta = 1e9;
        let mut rng = cfg.drop_rng(0);
        for _ in 0..20 {
            let snap = cellular_snapshot(&cfg, &mut rng);
            assert_eq!(snap.interference, 0.0);
            assert!(snap.empty_cell);
            assert_eq!(snap.cell_load, Some(1));
        }
    }

    #[test]
    fn deterministic_replay() {
        let cfg = base_config(2_000, 77);
        let a = estimate(&cfg, LinkKind::D2d, &Metric::Rate).unwrap();
        let b = estimate(&cfg, LinkKind::D2d, &Metric::Rate).unwrap();
        assert_eq!(a.points[0].y.to_bits(), b.points[0].y.to_bits());
        assert_eq!(
            a.points[0].stderr.unwrap().to_bits(),
            b.points[0].stderr.unwrap().to_bits()
        );
    }

    #[test]
    fn signal_mean_is_channel_inverted_power() {
        let cfg = SimConfig::new(
            NetworkParams::default(),
            FadingModel::kappa_mu(2.0, 1.5, 1.7).unwrap(),
            FadingModel::rayleigh(1.0).unwrap(),
            20_000,
            13,
        );
        let mut rng = cfg.drop_rng(0);
        let draws: Vec<f64> = (0..cfg.drops).map(|_| d2d_snapshot(&cfg, &mut rng).signal).collect();
        let (mean, se) = mean_se(&draws);
        assert!(
            (mean - 1.7).abs() < 4.0 * se,
            "E[W] {mean} vs 1.7 (se {se})"
        );
    }

    #[test]
    fn empirical_d2d_laplace_matches_transform() {
        let cfg = base_config(20_000, 21);
        let transform =
            D2dTransform::new(&cfg.fading_interferer, &cfg.params).unwrap();
        let interferences: Vec<f64> = (0..cfg.drops)
            .into_par_iter()
            .map(|d| snapshot_for(&cfg, LinkKind::D2d, d).interference)
            .collect();
        for &s in &[0.1, 1.0, 10.0] {
            let vals: Vec<f64> = interferences.iter().map(|&i| (-s * i).exp()).collect();
            let (mean, se) = mean_se(&vals);
            let exact = transform.eval(s);
            assert!(
                (mean - exact).abs() < 3.0 * se,
                "s={s}: empirical {mean} vs transform {exact} (se {se})"
            );
        }
    }

    #[test]
    fn empirical_cell_load_matches_closed_form() {
        let cfg = base_config(8_000, 31);
        let (mean, se) = empirical_mean_inverse_n(&cfg);
        let exact = cfg.params.mean_inverse_n();
        assert!(
            (mean - exact).abs() < 3.0 * se,
            "E[1/N] {mean} vs {exact} (se {se})"
        );
    }

    #[test]
    fn ccdf_estimate_is_monotone() {
        let cfg = base_config(5_000, 41);
        let grid: Vec<f64> = (0..30).map(|i| 10f64.powf(-2.0 + i as f64 * 0.15)).collect();
        let curve = estimate(&cfg, LinkKind::D2d, &Metric::Ccdf(grid)).unwrap();
        curve.validate().unwrap();
        assert!(curve.points.windows(2).all(|w| w[1].y <= w[0].y + 1e-12));
        assert!(curve.points.iter().all(|p| (0.0..=1.0).contains(&p.y)));
    }

    #[test]
    fn bep_estimate_saturates_in_noise() {
        let mut cfg = base_config(2_000, 51);
        cfg.params.n0 = 1e9;
        let curve =
            estimate(&cfg, LinkKind::D2d, &Metric::Bep { a: 0.5, b: 0.5 }).unwrap();
        // approaches 1/2 from below with an O((a/N₀)^b) bias at finite noise
        let p = curve.points[0].y;
        assert!(p <= 0.5 && p > 0.5 - 1e-4, "BEP {p} should be 1/2");
    }

    #[test]
    fn stable_sampler_matches_its_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let alpha = 0.5;
        let n = 40_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_positive_stable(alpha, &mut rng)).collect();
        for &s in &[0.2, 0.5, 1.0, 2.0, 5.0] {
            let vals: Vec<f64> = draws.iter().map(|&x| (-s * x).exp()).collect();
            let (mean, se) = mean_se(&vals);
            let exact = (-s.powf(alpha)).exp();
            assert!(
                (mean - exact).abs() < 3.0 * se,
                "s={s}: {mean} vs {exact} (se {se})"
            );
        }
    }

    #[test]
    fn window_doubling_shifts_rate_less_than_one_se() {
        let mut cfg = base_config(20_000, 61);
        let a = estimate(&cfg, LinkKind::D2d, &Metric::Rate).unwrap();
        cfg.window_radius_cells = 30.0;
        let b = estimate(&cfg, LinkKind::D2d, &Metric::Rate).unwrap();
        let se = a.points[0].stderr.unwrap().max(b.points[0].stderr.unwrap());
        assert!(
            (a.points[0].y - b.points[0].y).abs() < se,
            "window sensitivity: {} vs {} (se {se})",
            a.points[0].y,
            b.points[0].y
        );
    }
}
