//! Generalized extreme value tail of the end-to-end delay, VaR and TVaR.
//!
//! The session maximum of `n` requests is modelled as GEV. Location and
//! scale are identified with the parent mean and standard deviation, and the
//! shape solves `ξ / (Γ(1-ξ) - 1) = √(2n-1) / (n-1)`, which makes the GEV
//! mean equal to the expected largest order statistic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{find_root, gamma, lower_incomplete_gamma};

/// Smallest block length for which the shape equation has a root in (0, 1).
pub const MIN_BLOCK: usize = 3;
/// Fewest blocks accepted by the block-maxima fit.
pub const MIN_BLOCKS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GevParams {
    pub mu_e: f64,
    pub sigma_e: f64,
    pub xi_e: f64,
    pub n: usize,
}

impl GevParams {
    pub fn new(mu_e: f64, sigma_e: f64, xi_e: f64, n: usize) -> Result<Self> {
        if !(sigma_e > 0.0 && sigma_e.is_finite()) {
            return Err(Error::Domain(format!(
                "GEV scale must be positive, got {sigma_e}"
            )));
        }
        if !mu_e.is_finite() || !(xi_e < 1.0 && xi_e.is_finite()) {
            return Err(Error::Domain(format!(
                "GEV needs finite location and shape below 1, got mu = {mu_e}, xi = {xi_e}"
            )));
        }
        Ok(GevParams {
            mu_e,
            sigma_e,
            xi_e,
            n,
        })
    }

    /// Lower end of the support for positive shape.
    pub fn lower_endpoint(&self) -> f64 {
        if self.xi_e > 0.0 {
            self.mu_e - self.sigma_e / self.xi_e
        } else {
            f64::NEG_INFINITY
        }
    }

    /// GEV mean `μ + σ(Γ(1-ξ) - 1)/ξ`.
    pub fn mean(&self) -> f64 {
        if self.xi_e == 0.0 {
            return self.mu_e + self.sigma_e * 0.577_215_664_901_532_9;
        }
        let g = gamma(1.0 - self.xi_e).unwrap_or(f64::INFINITY);
        self.mu_e + self.sigma_e * (g - 1.0) / self.xi_e
    }
}

/// How location and scale are chosen from the parent moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identification {
    /// Location = parent mean, scale = parent standard deviation.
    #[default]
    Parent,
    /// GEV mean equals the expected maximum and GEV variance equals the
    /// parent variance. Needs `ξ < 1/2`.
    ExactMoments,
}

/// Expected largest of `n` draws: `mean + (n-1)√var / √(2n-1)`.
pub fn order_stat_mean(mean: f64, variance: f64, n: usize) -> f64 {
    let n = n.max(1) as f64;
    mean + (n - 1.0) * variance.max(0.0).sqrt() / (2.0 * n - 1.0).sqrt()
}

/// Shape solving `ξ / (Γ(1-ξ) - 1) = √(2n-1)/(n-1)` on (0, 1).
pub fn solve_shape(n: usize) -> Result<f64> {
    if n < MIN_BLOCK {
        return Err(Error::Domain(format!(
            "shape equation has no root in (0, 1) for n = {n}: the right side {:.4} is not below \
             the xi -> 0 limit 1/gamma_euler = 1.7325; use n >= {MIN_BLOCK}",
            if n <= 1 {
                f64::INFINITY
            } else {
                (2.0 * n as f64 - 1.0).sqrt() / (n as f64 - 1.0)
            }
        )));
    }
    let nf = n as f64;
    let rhs = (2.0 * nf - 1.0).sqrt() / (nf - 1.0);
    let lhs = |xi: f64| xi / (gamma(1.0 - xi).unwrap_or(f64::INFINITY) - 1.0) - rhs;
    find_root(lhs, 1e-9, 1.0 - 1e-12, 1e-14)
}

pub fn gev_from_moments(mean: f64, variance: f64, n: usize) -> Result<GevParams> {
    gev_from_moments_with(mean, variance, n, Identification::Parent)
}

pub fn gev_from_moments_with(
    mean: f64,
    variance: f64,
    n: usize,
    rule: Identification,
) -> Result<GevParams> {
    if !(variance > 0.0) {
        return Err(Error::Domain(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let xi = solve_shape(n)?;
    match rule {
        Identification::Parent => GevParams::new(mean, variance.sqrt(), xi, n),
        Identification::ExactMoments => {
            if xi >= 0.5 {
                return Err(Error::Domain(format!(
                    "GEV variance is infinite for shape {xi:.4}; exact moment matching needs n with shape below 1/2"
                )));
            }
            let g1 = gamma(1.0 - xi)?;
            let g2 = gamma(1.0 - 2.0 * xi)?;
            let sigma = xi * variance.sqrt() / (g2 - g1 * g1).sqrt();
            let target = order_stat_mean(mean, variance, n);
            GevParams::new(target - sigma * (g1 - 1.0) / xi, sigma, xi, n)
        }
    }
}

fn standardized(params: &GevParams, x: f64) -> Option<f64> {
    let z = (x - params.mu_e) / params.sigma_e;
    if params.xi_e == 0.0 {
        return Some((-z).exp());
    }
    let t = 1.0 + params.xi_e * z;
    (t > 0.0).then(|| t.powf(-1.0 / params.xi_e))
}

pub fn gev_cdf(params: &GevParams, x: f64) -> f64 {
    match standardized(params, x) {
        Some(t) => (-t).exp(),
        None if params.xi_e > 0.0 => 0.0,
        None => 1.0,
    }
}

pub fn gev_pdf(params: &GevParams, x: f64) -> f64 {
    match standardized(params, x) {
        Some(t) => t.powf(params.xi_e + 1.0) * (-t).exp() / params.sigma_e,
        None => 0.0,
    }
}

/// GEV quantile at level `alpha_c`.
pub fn var_quantile(params: &GevParams, alpha_c: f64) -> Result<f64> {
    if !(alpha_c > 0.0 && alpha_c < 1.0) {
        return Err(Error::Domain(format!(
            "alpha_C must lie in (0, 1), got {alpha_c}"
        )));
    }
    let y = -alpha_c.ln();
    if params.xi_e == 0.0 {
        return Ok(params.mu_e - params.sigma_e * y.ln());
    }
    Ok(params.mu_e + params.sigma_e / params.xi_e * (y.powf(-params.xi_e) - 1.0))
}

/// Tail value at risk: mean of the GEV above its `alpha_c` quantile.
pub fn tvar(params: &GevParams, alpha_c: f64) -> Result<f64> {
    if !(alpha_c > 0.0 && alpha_c < 1.0) {
        return Err(Error::Domain(format!(
            "alpha_C must lie in (0, 1), got {alpha_c}"
        )));
    }
    let xi = params.xi_e;
    if xi >= 1.0 {
        return Err(Error::Domain(format!(
            "tail mean is infinite for shape {xi} >= 1"
        )));
    }
    if xi == 0.0 {
        return Err(Error::Domain(
            "closed-form TVaR needs a nonzero shape".into(),
        ));
    }
    let g = lower_incomplete_gamma(1.0 - xi, -alpha_c.ln())?;
    Ok(params.mu_e + params.sigma_e / ((1.0 - alpha_c) * xi) * (g - (1.0 - alpha_c)))
}

/// Result of fitting a GEV to block maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFit {
    pub params: GevParams,
    pub maxima: Vec<f64>,
}

/// Splits `samples` into blocks of `block_size`, takes maxima, and fits them.
pub fn fit_block_maxima(samples: &[f64], block_size: usize) -> Result<BlockFit> {
    if block_size == 0 {
        return Err(Error::Data("block size must be positive".into()));
    }
    let blocks = samples.len() / block_size;
    if blocks < MIN_BLOCKS {
        return Err(Error::Data(format!(
            "{} samples give {blocks} complete blocks of {block_size}; need at least {MIN_BLOCKS}",
            samples.len()
        )));
    }
    let maxima: Vec<f64> = samples
        .chunks_exact(block_size)
        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let params = fit_maxima(&maxima, block_size)?;
    Ok(BlockFit { params, maxima })
}

/// Fits a GEV to maxima of blocks of `n`, with the shape fixed by `n`.
///
/// While the GEV variance is finite, location and scale match the sample mean
/// and L-scale. Sample variances of maxima converge too slowly for a usable
/// fit. Beyond that the sample mean itself is unstable, so the median and
/// interquartile range are matched instead.
pub fn fit_maxima(maxima: &[f64], n: usize) -> Result<GevParams> {
    if maxima.len() < MIN_BLOCKS {
        return Err(Error::Data(format!(
            "{} maxima supplied; need at least {MIN_BLOCKS}",
            maxima.len()
        )));
    }
    let mut sorted = maxima.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::Data("block maxima have zero variance".into()));
    }
    let xi = solve_shape(n).map_err(|e| Error::Data(e.to_string()))?;
    let g1 = gamma(1.0 - xi)?;
    if xi < 0.5 {
        let m = sorted.len() as f64;
        let b0 = sorted.iter().sum::<f64>() / m;
        let b1 = sorted
            .iter()
            .enumerate()
            .map(|(i, x)| i as f64 / (m - 1.0) * x)
            .sum::<f64>()
            / m;
        let sigma = xi * (2.0 * b1 - b0) / (g1 * (2f64.powf(xi) - 1.0));
        return GevParams::new(b0 - sigma * (g1 - 1.0) / xi, sigma, xi, n);
    }
    let reduced = |p: f64| ((-f64::ln(p)).powf(-xi) - 1.0) / xi;
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let sigma = iqr / (reduced(0.75) - reduced(0.25));
    GevParams::new(
        quantile_sorted(&sorted, 0.5) - sigma * reduced(0.5),
        sigma,
        xi,
        n,
    )
}

/// Linear-interpolation quantile of ascending data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
