//! Self-check suite behind `d2dgeo validate`: every analytical result is
//! cross-examined against an independent route (closed forms, quadrature
//! oracles, finite differences, or the Monte Carlo simulator).

use crate::fading::FadingModel;
use crate::interference::{
    cellular_laplace_hypergeometric, d2d_constant_closed, d2d_constant_generic, CellularTransform,
    D2dTransform, InterferenceLaplace,
};
use crate::mcsim::{self, Metric, SimConfig};
use crate::metrics::{avg_bep, avg_rates, sir_ccdf, ScenarioSpec};
use crate::network::NetworkParams;
use crate::sinr::{bep_g, expect, GFamily, QuadratureSpec};
use crate::specfun::upper_incomplete_gamma;
use crate::{LinkKind, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sizes of the stochastic checks.
#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    /// Simulator drops for the analytic-vs-MC checks.
    pub drops: usize,
    /// Interference draws for the hybrid CCDF estimator.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { drops: 100_000, samples: 100_000, seed: 2024 }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "check {:>2} {:<34} {} ({:.1} s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

fn snr_db_to_n0(snr_db: f64, mean_power: f64) -> f64 {
    mean_power / 10f64.powf(snr_db / 10.0)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Check 1: Rayleigh and Nakagami-2 reached through both fading families give
/// the same rates on both links.
pub fn check_special_case_collapse() -> Result<(bool, String)> {
    let pairs = [
        (FadingModel::kappa_mu(0.0, 1.0, 1.0)?, FadingModel::eta_mu(1.0, 0.5, 1.0)?),
        (FadingModel::kappa_mu(0.0, 2.0, 1.0)?, FadingModel::eta_mu(1.0, 1.0, 1.0)?),
    ];
    let mut worst = 0.0f64;
    for (a, b) in pairs {
        for snr_db in [0.0, 5.0, 10.0, 20.0] {
            let mut params = NetworkParams::default();
            params.n0 = snr_db_to_n0(snr_db, 1.0);
            let ra = avg_rates(&ScenarioSpec::new(params, a, a))?;
            let rb = avg_rates(&ScenarioSpec::new(params, b, b))?;
            worst = worst
                .max(rel_diff(ra.cellular, rb.cellular))
                .max(rel_diff(ra.d2d_mode, rb.d2d_mode));
        }
    }
    Ok((worst <= 1e-6, format!("max rel diff {worst:.2e} (tol 1e-6)")))
}

/// Check 2: for an exponential intended power the engine rate collapses to
/// the classical integral ∫ ℒ_I((e^t-1)/w̄) e^{-(e^t-1)N₀/w̄} dt.
pub fn check_rayleigh_closed_form() -> Result<(bool, String)> {
    let params = NetworkParams::default();
    let w_bar = 1.0;
    let n0 = params.n0;
    let rayleigh = FadingModel::rayleigh(w_bar)?;
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    let transforms = [
        InterferenceLaplace::D2d(D2dTransform::new(&rayleigh, &params)?),
        InterferenceLaplace::Unit,
    ];
    for transform in transforms {
        let engine = expect(&GFamily::Rate, &rayleigh, &transform, n0, &quad)?;
        let t_max = (700.0 * w_bar / n0).ln_1p();
        let inner_err = std::cell::Cell::new(None);
        let oracle = crate::quad::integrate(
            |t| {
                let z = t.exp_m1() / w_bar;
                match transform.eval(z) {
                    Ok(l) => l * (-z * n0).exp(),
                    Err(e) => {
                        inner_err.set(Some(e));
                        0.0
                    }
                }
            },
            0.0,
            t_max,
            1e-10,
            1e-13,
        )?;
        if let Some(e) = inner_err.take() {
            return Err(e);
        }
        worst = worst.max(rel_diff(engine, oracle));
    }
    Ok((worst <= 1e-6, format!("max rel diff {worst:.2e} (tol 1e-6)")))
}

/// Check 3: the D2D stable constant from the per-family closed forms equals
/// the generic moment product on 10 parameter sets.
pub fn check_d2d_constant_consistency() -> Result<(bool, String)> {
    let params = NetworkParams::default();
    let models = [
        FadingModel::kappa_mu(0.0, 1.0, 1.0)?,
        FadingModel::kappa_mu(2.0, 1.7, 3.0)?,
        FadingModel::kappa_mu(5.0, 0.8, 0.5)?,
        FadingModel::kappa_mu(0.3, 3.5, 2.0)?,
        FadingModel::kappa_mu(10.0, 2.0, 1.0)?,
        FadingModel::eta_mu(1.0, 0.5, 1.0)?,
        FadingModel::eta_mu(3.0, 1.0, 2.0)?,
        FadingModel::eta_mu(0.2, 2.3, 1.0)?,
        FadingModel::eta_mu(9.0, 0.8, 0.6)?,
        FadingModel::eta_mu(0.5, 1.5, 3.0)?,
    ];
    let mut worst = 0.0f64;
    for m in models {
        let closed = d2d_constant_closed(&m, &params)?;
        let generic = d2d_constant_generic(&m, &params)?;
        worst = worst.max(rel_diff(closed, generic));
    }
    Ok((worst <= 1e-10, format!("max rel diff {worst:.2e} (tol 1e-10)")))
}

/// Check 4: cellular transform by nested quadrature vs the hypergeometric
/// special cases (Rayleigh, Nakagami-2, one-sided Gaussian).
pub fn check_cellular_laplace_special_cases() -> Result<(bool, String)> {
    let params = NetworkParams::default();
    let models = [
        FadingModel::rayleigh(1.0)?,
        FadingModel::nakagami(2.0, 1.0)?,
        FadingModel::one_sided_gaussian(1.0)?,
    ];
    let mut worst = 0.0f64;
    for m in models {
        let transform = CellularTransform::new(&m, &params);
        for s in [0.1, 1.0, 10.0] {
            let quad_route = transform.eval(s)?;
            let series_route = cellular_laplace_hypergeometric(s, &m, &params)?;
            worst = worst.max((quad_route - series_route).abs());
        }
    }
    Ok((worst <= 1e-7, format!("max abs diff {worst:.2e} (tol 1e-7)")))
}

fn db_grid(from_db: f64, to_db: f64, step_db: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut x = from_db;
    while x <= to_db + 1e-9 {
        grid.push(10f64.powf(x / 10.0));
        x += step_db;
    }
    grid
}

fn ccdf_sup_gap(
    link: LinkKind,
    fading: FadingModel,
    opts: &ValidationOptions,
) -> Result<(f64, f64)> {
    let mut params = NetworkParams::default();
    params.n0 = 1e-30; // pure SIR
    let mut spec = ScenarioSpec::new(params, fading, fading);
    spec.link = link;
    spec.mc_fallback.drops = opts.drops;
    spec.mc_fallback.seed = opts.seed;
    let grid = db_grid(-20.0, 30.0, 2.0);
    let hybrid = sir_ccdf(&spec, &grid, opts.samples)?;
    let sim_cfg = SimConfig::new(params, fading, fading, opts.drops, opts.seed ^ 0xA5A5);
    let empirical = mcsim::estimate(&sim_cfg, link, &Metric::Ccdf(grid))?;
    let sup = hybrid
        .points
        .iter()
        .zip(&empirical.points)
        .map(|(h, e)| (h.y - e.y).abs())
        .fold(0.0f64, f64::max);
    // largest combined standard error along the grid, for reporting
    let max_se = hybrid
        .points
        .iter()
        .zip(&empirical.points)
        .map(|(h, e)| h.stderr.unwrap_or(0.0).hypot(e.stderr.unwrap_or(0.0)))
        .fold(0.0f64, f64::max);
    Ok((sup, max_se))
}

/// Check 5: D2D link, analytic vs simulator — SIR CCDF sup gap below 0.02 and
/// rate agreement within 3 standard errors, for Rayleigh and κ-μ(3, 2).
pub fn check_d2d_analytic_vs_mc(opts: &ValidationOptions) -> Result<(bool, String)> {
    let mut passed = true;
    let mut notes = Vec::new();
    for fading in [FadingModel::rayleigh(1.0)?, FadingModel::kappa_mu(3.0, 2.0, 1.0)?] {
        let (sup, _) = ccdf_sup_gap(LinkKind::D2d, fading, opts)?;
        passed &= sup < 0.02;
        notes.push(format!("ccdf sup gap {sup:.4}"));

        let params = NetworkParams::default();
        let spec = ScenarioSpec::new(params, fading, fading);
        let analytic = avg_rates(&spec)?.d2d_mode;
        let sim_cfg = SimConfig::new(params, fading, fading, opts.drops, opts.seed ^ 0x5157);
        let mc = mcsim::estimate(&sim_cfg, LinkKind::D2d, &Metric::Rate)?;
        let (mc_rate, mc_se) = (mc.points[0].y, mc.points[0].stderr.unwrap());
        let z = (analytic - mc_rate).abs() / mc_se;
        passed &= z < 3.0;
        notes.push(format!("rate z {z:.2}"));
    }
    Ok((passed, format!("{} (tol: gap<0.02, z<3)", notes.join(", "))))
}

/// Check 6: cellular link, hybrid analytic CCDF vs the hexagonal-grid
/// simulator — sup gap at most 0.04.
pub fn check_cellular_analytic_vs_mc(opts: &ValidationOptions) -> Result<(bool, String)> {
    let mut passed = true;
    let mut notes = Vec::new();
    for fading in [FadingModel::rayleigh(1.0)?, FadingModel::kappa_mu(3.0, 2.0, 1.0)?] {
        let (sup, _) = ccdf_sup_gap(LinkKind::Cellular, fading, opts)?;
        passed &= sup <= 0.04;
        notes.push(format!("ccdf sup gap {sup:.4}"));
    }
    Ok((passed, format!("{} (tol 0.04)", notes.join(", "))))
}

/// Check 7: qualitative behaviors at the reference deployment.
pub fn check_qualitative_claims() -> Result<(bool, String)> {
    let mut passed = true;
    let mut notes = Vec::new();
    let rayleigh = FadingModel::rayleigh(1.0)?;

    // (a) D2D-mode rate exceeds the cellular rate at β = 0.2, SNR = 5 dB
    let base = ScenarioSpec::new(NetworkParams::default(), rayleigh, rayleigh);
    let r = avg_rates(&base)?;
    passed &= r.d2d_mode > r.cellular;
    notes.push(format!("(a) {} > {}: {}", r.d2d_mode, r.cellular, r.d2d_mode > r.cellular));

    // (b) rate vs SNR has at most one slope sign change on a 20-point grid
    let sign_changes = |ys: &[f64]| {
        let diffs: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
        diffs
            .windows(2)
            .filter(|d| d[0].signum() != d[1].signum() && d[0] != 0.0 && d[1] != 0.0)
            .count()
    };
    let mut cell = Vec::new();
    let mut d2d = Vec::new();
    for k in 0..20 {
        let snr_db = -5.0 + 2.0 * k as f64;
        let mut params = NetworkParams::default();
        params.n0 = snr_db_to_n0(snr_db, 1.0);
        let r = avg_rates(&ScenarioSpec::new(params, rayleigh, rayleigh))?;
        cell.push(r.cellular);
        d2d.push(r.d2d_mode);
    }
    let (sc, sd) = (sign_changes(&cell), sign_changes(&d2d));
    passed &= sc <= 1 && sd <= 1;
    notes.push(format!("(b) slope sign changes cellular {sc}, d2d {sd}"));

    // (c) potential-D2D rate vs θ has an interior maximum on [20, 500] m
    let mut rd = Vec::new();
    for k in 0..17 {
        let mut params = NetworkParams::default();
        params.theta = 20.0 + 30.0 * k as f64;
        rd.push(avg_rates(&ScenarioSpec::new(params, rayleigh, rayleigh))?.potential_d2d);
    }
    let argmax = rd
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    passed &= argmax > 0 && argmax < rd.len() - 1;
    notes.push(format!("(c) argmax at index {argmax} of {}", rd.len() - 1));

    // (d) the β where the D2D-mode rate overtakes the cellular rate lies in
    // (0, 0.2); both rates are linear in β so the crossing is explicit
    let params = NetworkParams::default();
    let spec = ScenarioSpec::new(params, rayleigh, rayleigh);
    let r = avg_rates(&spec)?;
    let x_d = r.d2d_mode / params.beta; // ε E[ln(1+SINR_d)]
    let y_c = r.cellular / (1.0 - params.beta); // E[1/N] E[ln(1+SINR_c)]
    let beta_cross = y_c / (x_d + y_c);
    passed &= beta_cross > 0.0 && beta_cross < 0.2;
    notes.push(format!("(d) beta crossing {beta_cross:.3}"));

    // (e) D2D BEP exceeds cellular BEP at SNR = 10 dB, κ-μ(3,2), a = b = 1/2
    let mut params = NetworkParams::default();
    params.n0 = snr_db_to_n0(10.0, 1.0);
    let km = FadingModel::kappa_mu(3.0, 2.0, 1.0)?;
    let mut spec = ScenarioSpec::new(params, km, km);
    spec.modulation = (0.5, 0.5);
    let b = avg_bep(&spec)?;
    passed &= b.d2d_mode > b.cellular;
    notes.push(format!("(e) {} > {}: {}", b.d2d_mode, b.cellular, b.d2d_mode > b.cellular));

    Ok((passed, notes.join("; ")))
}

/// Fornberg weights for the m-th derivative at `z` over nodes `x`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    (0..n).map(|j| c[j][m]).collect()
}

/// Check 8: the closed-form BEP kernel matches 8th-order central finite
/// differences of x^{i-1} Γ(b, ax) for i in 1..=6.
pub fn check_bep_derivative_oracle() -> Result<(bool, String)> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst = 0.0f64;
    for i in 1u32..=6 {
        for (a, b) in [(0.5, 0.5), (0.5, 1.0), (1.0, 0.5), (1.0, 1.0)] {
            for _ in 0..10 {
                let x: f64 = rng.random_range(0.5..5.0);
                let h = 0.02 * x;
                let halfwidth = ((i as usize + 9) / 2).max(5);
                let nodes: Vec<f64> =
                    (-(halfwidth as i64)..=halfwidth as i64).map(|k| x + k as f64 * h).collect();
                let weights = fornberg_weights(x, &nodes, i as usize);
                let mut deriv = 0.0;
                for (&node, &w) in nodes.iter().zip(&weights) {
                    deriv += w * node.powf(i as f64 - 1.0) * upper_incomplete_gamma(b, a * node)?;
                }
                let gamma_b = crate::specfun::gamma(b)?;
                let gamma_i = crate::specfun::gamma(i as f64)?;
                let fd = deriv / (2.0 * gamma_b * gamma_i);
                let closed = bep_g(i, a, b, x);
                worst = worst.max(rel_diff(closed, fd));
            }
        }
    }
    Ok((worst <= 1e-5, format!("max rel diff {worst:.2e} (tol 1e-5)")))
}

/// Check 9: Kolmogorov–Smirnov fit of both fading samplers (1% level) and
/// Laplace-transform matching of the stable interference sampler.
pub fn check_sampler_fidelity(opts: &ValidationOptions) -> Result<(bool, String)> {
    let n = opts.samples.max(10_000);
    let critical = 1.63 / (n as f64).sqrt();
    let mut passed = true;
    let mut notes = Vec::new();
    let models = [
        FadingModel::kappa_mu(1.5, 2.0, 1.0)?,
        FadingModel::kappa_mu(3.0, 0.8, 2.0)?,
        FadingModel::kappa_mu(0.0, 1.0, 1.0)?,
        FadingModel::eta_mu(3.0, 1.0, 1.0)?,
        FadingModel::eta_mu(0.3, 1.8, 0.5)?,
        FadingModel::eta_mu(1.0, 0.5, 1.0)?,
    ];
    let mut worst_ks = 0.0f64;
    for m in models {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut draws: Vec<f64> = (0..n).map(|_| m.sample(&mut rng)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d = 0.0f64;
        for (idx, &v) in draws.iter().enumerate() {
            let f = m.cdf(v)?;
            d = d.max((f - idx as f64 / n as f64).abs());
            d = d.max(((idx + 1) as f64 / n as f64 - f).abs());
        }
        worst_ks = worst_ks.max(d);
        passed &= d < critical;
    }
    notes.push(format!("worst KS {worst_ks:.4} (crit {critical:.4})"));

    // stable interference sampler against exp(-c s^δ) at 5 s-values
    let params = NetworkParams::default();
    let rayleigh = FadingModel::rayleigh(1.0)?;
    let t = D2dTransform::new(&rayleigh, &params)?;
    let scale = t.constant().powf(1.0 / t.delta());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x57AB);
    let draws: Vec<f64> =
        (0..n).map(|_| scale * mcsim::sample_positive_stable(t.delta(), &mut rng)).collect();
    let mut worst_z = 0.0f64;
    for s in [0.1, 0.5, 1.0, 5.0, 20.0] {
        let vals: Vec<f64> = draws.iter().map(|&x| (-s * x).exp()).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        let z = (mean - t.eval(s)).abs() / se.max(1e-12);
        worst_z = worst_z.max(z);
        passed &= z < 3.0;
    }
    notes.push(format!("worst stable z {worst_z:.2} (tol 3)"));
    Ok((passed, notes.join("; ")))
}

fn run_check(
    id: usize,
    name: &'static str,
    f: impl FnOnce() -> Result<(bool, String)>,
) -> CheckOutcome {
    let start = std::time::Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("errored: {e}")),
    };
    CheckOutcome { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Run checks 1–9 in order.
pub fn run_all(opts: &ValidationOptions) -> Vec<CheckOutcome> {
    vec![
        run_check(1, "special-case collapse", check_special_case_collapse),
        run_check(2, "Rayleigh closed-form equivalence", check_rayleigh_closed_form),
        run_check(3, "D2D constant dual route", check_d2d_constant_consistency),
        run_check(4, "cellular Laplace special cases", check_cellular_laplace_special_cases),
        run_check(5, "D2D analytic vs Monte Carlo", || check_d2d_analytic_vs_mc(opts)),
        run_check(6, "cellular analytic vs Monte Carlo", || check_cellular_analytic_vs_mc(opts)),
        run_check(7, "qualitative claims", check_qualitative_claims),
        run_check(8, "BEP derivative oracle", check_bep_derivative_oracle),
        run_check(9, "sampler fidelity", || check_sampler_fidelity(opts)),
    ]
}
