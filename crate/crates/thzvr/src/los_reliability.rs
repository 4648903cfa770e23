//! Delay distribution and reliability when LoS is always available.
//!
//! The transmission delay inherits its law from the Gaussian interference
//! through the rate map. The SBS queue is M/G/1 and its waiting time follows
//! the geometric sum of residual service times. The edge-server sojourn is
//! exponential and the end-to-end CDF is the convolution of the two stages.

use std::f64::consts::LN_2;

use crate::channel::LinkBudget;
use crate::delay_analytics::{mean_e2e, tx_delay_moments, Availability, C2Form, QueueParams};
use crate::error::{Error, Result};
use crate::numerics::{convolve_truncated, uniform_grid, GridCdf, GridDensity};

/// Default geometric truncation tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Interference is covered to this many standard deviations above its mean.
pub const COVERAGE_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct ReliabilityReport {
    pub delta: f64,
    pub reliability: f64,
    pub e2e_cdf: GridCdf,
    pub tx_pdf: GridDensity,
    pub truncation_terms: usize,
    pub truncation_residual: f64,
}

/// Grid and truncation controls for the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub points: usize,
    /// Grid end as a multiple of the mean end-to-end delay.
    pub span_factor: f64,
    pub tol: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            points: 1 << 14,
            span_factor: 20.0,
            tol: DEFAULT_TOL,
        }
    }
}

/// Waiting-time and total-time CDFs at the SBS queue.
#[derive(Debug, Clone)]
pub struct Mg1Result {
    /// Waiting time before service; carries an atom `1 - ρ` at zero.
    pub wait: GridCdf,
    /// Waiting plus transmission.
    pub total: GridCdf,
    pub terms: usize,
    pub residual: f64,
}

fn rate_at(link: &LinkBudget, w: f64, interference: f64) -> f64 {
    w * (link.p_rx / (link.n0 + interference)).ln_1p() / LN_2
}

/// Range of delays spanned by interference in `(max(μ-8σ, -N0), μ+8σ)`.
pub fn tx_delay_support(link: &LinkBudget, l_bits: f64, w: f64) -> (f64, f64) {
    let sigma = link.sigma2_i.max(0.0).sqrt();
    let hi_i = link.mu_i + COVERAGE_SIGMAS * sigma;
    let lo_i = link.mu_i - COVERAGE_SIGMAS * sigma;
    let a_min = if lo_i <= -link.n0 {
        0.0
    } else {
        l_bits / rate_at(link, w, lo_i)
    };
    (a_min, l_bits / rate_at(link, w, hi_i))
}

/// Density of the transmission delay by change of variables from interference.
///
/// Interference below `-N0` has no image, so the pre-normalization mass is
/// the Gaussian mass above `-N0`.
pub fn tx_delay_pdf(link: &LinkBudget, l_bits: f64, w: f64, grid: Vec<f64>) -> Result<GridDensity> {
    if !(l_bits > 0.0 && w > 0.0 && link.p_rx > 0.0) {
        return Err(Error::Domain(format!(
            "tx delay density needs positive L, W and received power, got L = {l_bits}, W = {w}, p_rx = {}",
            link.p_rx
        )));
    }
    if !(link.sigma2_i >= 0.0) {
        return Err(Error::Domain(format!(
            "interference variance must be nonnegative, got {}",
            link.sigma2_i
        )));
    }
    if link.sigma2_i == 0.0 {
        return GridDensity::near_delta(grid, l_bits / rate_at(link, w, link.mu_i));
    }
    let (a_min, a_max) = tx_delay_support(link, l_bits, w);
    let (g0, g1) = (grid[0], grid[grid.len() - 1]);
    if g0 > a_min || g1 < a_max {
        return Err(Error::Grid(format!(
            "grid [{g0:e}, {g1:e}] does not cover the delay range [{a_min:e}, {a_max:e}]"
        )));
    }
    let sigma = link.sigma2_i.sqrt();
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let f = |a: f64| {
        if a <= 0.0 {
            return 0.0;
        }
        // 2^{L/(Wα)} = e^x, written through e^{-x} to stay finite for small α.
        let x = l_bits * LN_2 / (w * a);
        let em = (-x).exp();
        let one_minus = -(-x).exp_m1();
        let upsilon = link.p_rx * em / one_minus - link.n0;
        let zeta = LN_2 * l_bits * link.p_rx / (w * a * a) * em / (one_minus * one_minus);
        let d = (upsilon - link.mu_i) / sigma;
        let v = zeta * norm * (-0.5 * d * d).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    GridDensity::from_fn(grid, f)
}

fn residual_density(tx_pdf: &GridDensity, mu2: f64) -> Result<GridDensity> {
    let cdf = tx_pdf.cdf();
    let values = cdf
        .values()
        .iter()
        .map(|c| mu2 * (1.0 - c).max(0.0))
        .collect();
    GridDensity::new(tx_pdf.grid().to_vec(), values)
}

fn check_mu2(tx_pdf: &GridDensity, mu2: f64) -> Result<()> {
    let implied = 1.0 / tx_pdf.mean();
    if !(mu2 > 0.0) || ((mu2 - implied) / implied).abs() > 0.01 {
        return Err(Error::Config(format!(
            "mu2 = {mu2} disagrees with 1/mean(tx delay) = {implied} by more than 1%"
        )));
    }
    Ok(())
}

/// Equilibrium (residual) service-time CDF on the density's own grid.
pub fn residual_service_cdf(tx_pdf: &GridDensity, mu2: f64) -> Result<GridCdf> {
    check_mu2(tx_pdf, mu2)?;
    let ccdf = tx_pdf.cdf();
    let g = tx_pdf.grid();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(g.len());
    out.push(0.0);
    for i in 1..g.len() {
        let a = 1.0 - ccdf.values()[i - 1];
        let b = 1.0 - ccdf.values()[i];
        acc += 0.5 * (g[i] - g[i - 1]) * mu2 * (a + b);
        out.push(acc.clamp(0.0, 1.0));
    }
    GridCdf::new(g.to_vec(), out)
}

/// Number of geometric terms with `ρ^{N+1}/(1-ρ) < tol`.
pub fn truncation_depth(rho: f64, tol: f64) -> usize {
    if rho <= 0.0 {
        return 0;
    }
    let mut n = 0usize;
    while rho.powi(n as i32 + 1) / (1.0 - rho) >= tol {
        n += 1;
    }
    n
}

/// Pollaczek–Khinchine waiting-time CDF as a truncated geometric sum.
///
/// `tx_pdf` must sit on a uniform grid starting at zero.
pub fn mg1_wait_cdf(tx_pdf: &GridDensity, lambda2: f64, tol: f64) -> Result<Mg1Result> {
    if !(lambda2 >= 0.0) || !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!(
            "mg1_wait_cdf needs lambda2 >= 0 and tol in (0, 1), got {lambda2}, {tol}"
        )));
    }
    let g = tx_pdf.grid();
    if g[0] != 0.0 || tx_pdf.step().is_none() {
        return Err(Error::Grid(
            "waiting-time grid must be uniform and start at 0".into(),
        ));
    }
    let mean = tx_pdf.mean();
    let rho = lambda2 * mean;
    if !(rho < 1.0) {
        return Err(Error::Unstable { queue: "Q2", rho });
    }
    let tx_cdf = tx_pdf.cdf();
    let m = g.len();
    let n_terms = truncation_depth(rho, tol);
    if n_terms == 0 {
        return Ok(Mg1Result {
            wait: GridCdf::new(g.to_vec(), vec![1.0; m])?,
            total: tx_cdf,
            terms: 0,
            residual: if rho > 0.0 { rho } else { 0.0 },
        });
    }
    let r = residual_density(tx_pdf, 1.0 / mean)?;
    // Σ_{n=1..N} ρⁿ r^{*n}, each term renormalized on the grid.
    let mut sum = vec![0.0; m];
    let mut term = r.clone();
    let mut weight = 0.0;
    for n in 1..=n_terms {
        if n > 1 {
            term = convolve_truncated(&term, &r, m)?;
        }
        let w = rho.powi(n as i32);
        weight += w;
        for (s, v) in sum.iter_mut().zip(term.values()) {
            *s += w * v;
        }
    }
    let s_density = GridDensity::new(g.to_vec(), sum.into_iter().map(|v| v / weight).collect())?;
    let s_cdf = s_density.cdf();
    let wait: Vec<f64> = s_cdf
        .values()
        .iter()
        .map(|c| (1.0 - rho) * (1.0 + weight * c))
        .collect();
    let with_tx = convolve_truncated(&s_density, tx_pdf, m)?.cdf();
    let total: Vec<f64> = tx_cdf
        .values()
        .iter()
        .zip(with_tx.values())
        .map(|(t, c)| (1.0 - rho) * (t + weight * c))
        .collect();
    Ok(Mg1Result {
        wait: GridCdf::new(g.to_vec(), wait)?,
        total: GridCdf::new(g.to_vec(), total)?,
        terms: n_terms,
        residual: rho.powi(n_terms as i32 + 1),
    })
}

/// End-to-end CDF: exponential edge-server sojourn convolved with the SBS
/// total time, then shifted by the beam-tracking delay.
pub fn e2e_cdf(queue: &QueueParams, q2_total: &GridCdf) -> Result<GridCdf> {
    queue.validate()?;
    let g = q2_total.grid().to_vec();
    let rate = queue.mu1 - queue.lambda1;
    let psi1 = GridDensity::from_fn(g.clone(), |t| rate * (-rate * t).exp())?;
    let d2 = q2_total.density()?;
    let phi = convolve_truncated(&psi1, &d2, g.len())?.cdf();
    let b = queue.beam_tracking_delay;
    if b == 0.0 {
        return Ok(phi);
    }
    let shifted = g.iter().map(|&t| phi.eval(t - b)).collect();
    GridCdf::new(g, shifted)
}

/// `P(T_e ≤ δ)` by interpolation; clamps beyond the grid with a warning.
pub fn reliability(e2e: &GridCdf, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    let end = e2e.grid()[e2e.grid().len() - 1];
    if delta > end {
        log::warn!("delta {delta:e} lies beyond the grid end {end:e}; clamping");
    }
    Ok(e2e.eval(delta).clamp(0.0, 1.0))
}

/// Runs the whole guaranteed-LoS pipeline for one threshold.
pub fn analyze(
    link: &LinkBudget,
    queue: &QueueParams,
    w: f64,
    delta: f64,
    options: PipelineOptions,
) -> Result<ReliabilityReport> {
    queue.validate()?;
    if options.points < 16 || !(options.span_factor > 1.0) {
        return Err(Error::Domain(format!(
            "pipeline needs at least 16 points and span factor above 1, got {} and {}",
            options.points, options.span_factor
        )));
    }
    let tx = tx_delay_moments(link, queue, Availability::Guaranteed, C2Form::Printed)?;
    let mean = mean_e2e(&tx, queue)?;
    let (_, a_max) = tx_delay_support(link, queue.l_bits, w);
    let t_max = (options.span_factor * mean).max(2.0 * a_max);
    let grid = uniform_grid(0.0, t_max, options.points)?;
    let tx_pdf = tx_delay_pdf(link, queue.l_bits, w, grid)?;
    let q2 = mg1_wait_cdf(&tx_pdf, queue.lambda2, options.tol)?;
    let e2e = e2e_cdf(queue, &q2.total)?;
    Ok(ReliabilityReport {
        delta,
        reliability: reliability(&e2e, delta)?,
        e2e_cdf: e2e,
        tx_pdf,
        truncation_terms: q2.terms,
        truncation_residual: q2.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{link_budget, ChannelParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn channel() -> ChannelParams {
        ChannelParams {
            f: 1e12,
            k: 0.0016,
            w: 15e9,
            p0: 1.0,
            p: 1.0,
            t0: 300.0,
            r0: 1.25,
            omega: 3.0,
            epsilon: 1.0,
            eta: 0.25,
        }
    }

    fn queue() -> QueueParams {
        QueueParams {
            lambda1: 0.1,
            mu1: 700.1,
            lambda2: 0.1,
            l_bits: 10e6,
            beam_tracking_delay: 0.0,
        }
    }

    fn exp_pdf(mu: f64, t_max: f64, n: usize) -> GridDensity {
        let g = uniform_grid(0.0, t_max, n).unwrap();
        GridDensity::from_fn(g, |t| mu * (-mu * t).exp()).unwrap()
    }

    fn gauss_mass(lo: f64, mu: f64, sigma: f64) -> f64 {
        // Mass above `lo`, by Simpson's rule over ±12σ.
        let a = lo.max(mu - 12.0 * sigma);
        let b = mu + 12.0 * sigma;
        let n = 20_000;
        let h = (b - a) / n as f64;
        let f = |x: f64| {
            let d = (x - mu) / sigma;
            (-0.5 * d * d).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn default_pdf() -> (LinkBudget, GridDensity) {
        let c = channel();
        let link = link_budget(&c).unwrap();
        let (_, hi) = tx_delay_support(&link, 10e6, c.w);
        let grid = uniform_grid(0.0, 1.2 * hi, 1 << 15).unwrap();
        let pdf = tx_delay_pdf(&link, 10e6, c.w, grid).unwrap();
        (link, pdf)
    }

    #[test]
    fn tx_pdf_mass_is_the_feasible_gaussian_mass() {
        let (link, pdf) = default_pdf();
        let want = gauss_mass(-link.n0, link.mu_i, link.sigma2_i.sqrt());
        assert!(
            (pdf.pre_normalization_mass() - want).abs() < 1e-4,
            "{}",
            pdf.pre_normalization_mass()
        );
    }

    #[test]
    fn tx_pdf_mode_near_mean_interference_delay() {
        let (link, pdf) = default_pdf();
        let nominal = 10e6 / link.rate_los;
        assert!(
            (pdf.mode() - nominal).abs() / nominal < 0.1,
            "mode {}",
            pdf.mode()
        );
    }

    #[test]
    #[ignore = "an 18 Gbps link cannot put the delay mode at 0.75 ms"]
    fn tx_pdf_mode_at_three_quarters_ms() {
        let (_, pdf) = default_pdf();
        assert!(
            (pdf.mode() - 0.75e-3).abs() / 0.75e-3 < 0.2,
            "mode {}",
            pdf.mode()
        );
    }

    #[test]
    fn tx_pdf_matches_monte_carlo() {
        let (link, pdf) = default_pdf();
        let w = channel().w;
        let normal = Normal::new(link.mu_i, link.sigma2_i.sqrt()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut alphas = Vec::with_capacity(100_000);
        while alphas.len() < 100_000 {
            let i = normal.sample(&mut rng);
            if i > -link.n0 {
                alphas.push(10e6 / rate_at(&link, w, i));
            }
        }
        alphas.sort_by(f64::total_cmp);
        let cdf = pdf.cdf();
        let n = alphas.len() as f64;
        let ks = alphas
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let f = cdf.eval(*a);
                (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "ks {ks}");
    }

    #[test]
    fn tx_pdf_degenerate_and_grid_errors() {
        let mut link = link_budget(&channel()).unwrap();
        let grid = uniform_grid(0.0, 4e-3, 4001).unwrap();
        assert!(matches!(
            tx_delay_pdf(&link, 10e6, 15e9, uniform_grid(0.0, 1e-4, 100).unwrap()),
            Err(Error::Grid(_))
        ));
        link.sigma2_i = 0.0;
        let pdf = tx_delay_pdf(&link, 10e6, 15e9, grid).unwrap();
        let want = 10e6 / link.rate_los;
        assert!((pdf.mean() - want).abs() < 2e-6);
    }

    #[test]
    fn residual_of_exponential_is_exponential() {
        let mu = 1000.0;
        let pdf = exp_pdf(mu, 0.02, 20_001);
        let r = residual_service_cdf(&pdf, 1.0 / pdf.mean()).unwrap();
        for (t, v) in r.grid().iter().zip(r.values()) {
            assert!((v - (1.0 - (-mu * t).exp())).abs() < 1e-3);
        }
        assert!((r.values().last().unwrap() - 1.0).abs() < 1e-3);
        assert!(matches!(
            residual_service_cdf(&pdf, 1.2 * mu),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn residual_of_deterministic_is_uniform() {
        let g = uniform_grid(0.0, 2.0, 2001).unwrap();
        let pdf = GridDensity::near_delta(g, 1.0).unwrap();
        let r = residual_service_cdf(&pdf, 1.0 / pdf.mean()).unwrap();
        for t in [0.1, 0.25, 0.5, 0.9] {
            assert!((r.eval(t) - t).abs() < 2e-3, "R({t}) = {}", r.eval(t));
        }
        assert!((r.eval(1.5) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn waiting_time_matches_mm1() {
        let (mu, lambda) = (1000.0, 500.0);
        let pdf = exp_pdf(mu, 0.06, 6001);
        let res = mg1_wait_cdf(&pdf, lambda, 1e-8).unwrap();
        let rho = lambda * pdf.mean();
        let worst = res
            .wait
            .grid()
            .iter()
            .zip(res.wait.values())
            .map(|(t, v)| (v - (1.0 - rho * (-(mu - lambda) * t).exp())).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-2, "max error {worst}");
        assert_eq!(res.residual, rho.powi(res.terms as i32 + 1));
        assert!(res.residual / (1.0 - rho) < 1e-8 * (1.0 - rho) + 1e-8);
        // Sojourn in M/M/1 is exponential with rate mu - lambda.
        for t in [1e-3, 3e-3, 1e-2] {
            let want = 1.0 - (-(mu - lambda) * t).exp();
            assert!((res.total.eval(t) - want).abs() < 1e-2);
        }
    }

    #[test]
    fn no_load_means_no_wait() {
        let pdf = exp_pdf(1000.0, 0.02, 2001);
        let res = mg1_wait_cdf(&pdf, 1e-12, 1e-8).unwrap();
        assert!(res.wait.values().iter().all(|v| *v >= 1.0 - 1e-9));
        assert!(matches!(
            mg1_wait_cdf(&pdf, 2000.0, 1e-8),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn truncation_rule() {
        for rho in [0.1, 0.5, 0.9] {
            let n = truncation_depth(rho, 1e-8);
            assert!(rho.powi(n as i32 + 1) / (1.0 - rho) < 1e-8);
            assert!(n == 0 || rho.powi(n as i32) / (1.0 - rho) >= 1e-8);
        }
    }

    #[test]
    fn e2e_with_instant_q2_is_exponential() {
        let q = queue();
        let g = uniform_grid(0.0, 0.03, 6001).unwrap();
        let step = GridDensity::near_delta(g, 0.0).unwrap().cdf();
        let phi = e2e_cdf(&q, &step).unwrap();
        let rate = q.mu1 - q.lambda1;
        for t in [5e-4, 1e-3, 5e-3] {
            assert!((phi.eval(t) - (1.0 - (-rate * t).exp())).abs() < 5e-3);
        }
        assert_eq!(phi.values()[0], 0.0);
        assert!(*phi.values().last().unwrap() >= 1.0 - 1e-3);
    }

    #[test]
    fn e2e_mean_is_additive() {
        let q = queue();
        let pdf = exp_pdf(2000.0, 0.03, 6001);
        let h = pdf.step().unwrap();
        let res = mg1_wait_cdf(&pdf, q.lambda2, 1e-8).unwrap();
        let phi = e2e_cdf(&q, &res.total).unwrap();
        let mean = phi.density().unwrap().mean();
        let q2_mean = res.total.density().unwrap().mean();
        assert!((mean - (q.e_t1() + q2_mean)).abs() < 2.0 * h, "{mean}");
    }

    #[test]
    fn beam_delay_shifts_cdf() {
        let mut q = queue();
        let pdf = exp_pdf(2000.0, 0.03, 6001);
        let res = mg1_wait_cdf(&pdf, q.lambda2, 1e-8).unwrap();
        let base = e2e_cdf(&q, &res.total).unwrap();
        q.beam_tracking_delay = 1e-3;
        let shifted = e2e_cdf(&q, &res.total).unwrap();
        assert!((shifted.eval(3e-3) - base.eval(2e-3)).abs() < 1e-9);
        assert_eq!(shifted.eval(0.5e-3), 0.0);
    }

    #[test]
    fn reliability_endpoints() {
        let c = channel();
        let link = link_budget(&c).unwrap();
        let rep = analyze(&link, &queue(), c.w, 20e-3, PipelineOptions::default()).unwrap();
        assert_eq!(reliability(&rep.e2e_cdf, 0.0).unwrap(), 0.0);
        let end = *rep.e2e_cdf.grid().last().unwrap();
        assert!(reliability(&rep.e2e_cdf, end).unwrap() > 1.0 - 1e-6);
        assert!(reliability(&rep.e2e_cdf, 10.0 * end).unwrap() > 1.0 - 1e-6);
        assert!(reliability(&rep.e2e_cdf, -1.0).is_err());
        assert!(
            rep.reliability >= 0.99999,
            "reliability {}",
            rep.reliability
        );
        assert!(rep.truncation_residual <= DEFAULT_TOL);
    }

    #[test]
    fn reliability_trends() {
        let q = queue();
        let at = |c: &ChannelParams, d: f64| {
            let link = link_budget(c).unwrap();
            let opts = PipelineOptions {
                points: 1 << 12,
                ..Default::default()
            };
            analyze(&link, &q, c.w, d, opts).unwrap().reliability
        };
        let base = channel();
        let r5 = at(&base, 2e-3);
        assert!(at(&base, 1.5e-3) <= r5 && r5 <= at(&base, 3e-3));
        let mut wide = base;
        wide.w = 20e9;
        assert!(at(&wide, 2e-3) >= r5);
        let mut far = base;
        far.r0 = 2.0;
        assert!(at(&far, 2e-3) <= r5);
        let mut lossy = base;
        lossy.k = 0.05;
        assert!(at(&lossy, 2e-3) <= r5);
    }
}
