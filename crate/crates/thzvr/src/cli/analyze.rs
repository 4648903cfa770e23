use std::path::PathBuf;

use super::output::{num, sink, write_csv};
use super::{AnalyzeArgs, Mode};
use crate::config::NetworkConfig;
use crate::delay_analytics::{
    delay_moments, mean_plos_over_orientation, Availability, DelayMoments,
};
use crate::error::{Error, Result};
use crate::evt_risk::{gev_cdf, gev_from_moments_with, tvar, var_quantile, GevParams};
use crate::los_reliability::{self, PipelineOptions, ReliabilityReport};

/// Blockage-mode analysis: delay moments and the GEV tail model.
#[derive(Debug, Clone)]
pub struct TailReport {
    pub rate_los: f64,
    pub z: f64,
    pub mean_plos: f64,
    pub moments: DelayMoments,
    pub gev: GevParams,
}

impl TailReport {
    pub fn var(&self, alpha_c: f64) -> Result<f64> {
        var_quantile(&self.gev, alpha_c)
    }

    pub fn tvar(&self, alpha_c: f64) -> Result<f64> {
        tvar(&self.gev, alpha_c)
    }

    /// Tail-based reliability `F_GEV(δ)`.
    pub fn reliability(&self, delta: f64) -> f64 {
        gev_cdf(&self.gev, delta)
    }
}

pub fn tail_report(config: &NetworkConfig) -> Result<TailReport> {
    let link = config.link_budget()?;
    let z = config.z()?;
    let moments = delay_moments(
        &link,
        &config.queues,
        Availability::Blockage { z },
        config.delay_options(),
    )?;
    let gev = gev_from_moments_with(
        moments.mean_e2e,
        moments.var_e2e,
        config.block_size(),
        config.sim.identification,
    )?;
    Ok(TailReport {
        rate_los: link.rate_los,
        z,
        mean_plos: mean_plos_over_orientation(z)?,
        moments,
        gev,
    })
}

/// Guaranteed-LoS analysis: moments plus the numerical end-to-end CDF.
#[derive(Debug, Clone)]
pub struct GuaranteedReport {
    pub rate_los: f64,
    pub moments: DelayMoments,
    pub pipeline: ReliabilityReport,
}

impl GuaranteedReport {
    pub fn reliability(&self, delta: f64) -> Result<f64> {
        los_reliability::reliability(&self.pipeline.e2e_cdf, delta)
    }
}

pub fn guaranteed_report(config: &NetworkConfig) -> Result<GuaranteedReport> {
    let link = config.link_budget()?;
    let moments = delay_moments(
        &link,
        &config.queues,
        Availability::Guaranteed,
        config.delay_options(),
    )?;
    let options = PipelineOptions {
        points: config.sim.grid_points,
        span_factor: config.sim.grid_span,
        tol: config.sim.tolerance,
    };
    let first = config.sim.deltas.first().copied().unwrap_or(0.0);
    let pipeline =
        los_reliability::analyze(&link, &config.queues, config.channel.w, first, options)?;
    Ok(GuaranteedReport {
        rate_los: link.rate_los,
        moments,
        pipeline,
    })
}

fn row(quantity: String, hash: &str, value: f64, units: &str) -> Vec<String> {
    vec![quantity, hash.to_string(), num(value), units.to_string()]
}

fn moment_rows(rows: &mut Vec<Vec<String>>, hash: &str, m: &DelayMoments) {
    rows.push(row("e_alpha".into(), hash, m.e_alpha, "s"));
    rows.push(row("e_alpha2".into(), hash, m.e_alpha2, "s^2"));
    rows.push(row("e_t1".into(), hash, m.e_t1, "s"));
    rows.push(row("e_t2".into(), hash, m.e_t2, "s"));
    rows.push(row("mean_e2e".into(), hash, m.mean_e2e, "s"));
    rows.push(row("var_e2e".into(), hash, m.var_e2e, "s^2"));
}

pub(super) fn cmd_analyze(config: &NetworkConfig, args: &AnalyzeArgs) -> Result<()> {
    let deltas = if args.delta.is_empty() {
        config.sim.deltas.clone()
    } else {
        args.delta.clone()
    };
    if let Some(d) = deltas.iter().find(|d| !(**d >= 0.0)) {
        return Err(Error::Config(format!("delta must be nonnegative, got {d}")));
    }
    let hash = config.params_hash();
    let mut rows = Vec::new();
    match args.mode {
        Mode::Tail => {
            let r = tail_report(config)?;
            rows.push(row("rate_los".into(), &hash, r.rate_los, "bit/s"));
            rows.push(row("mean_plos".into(), &hash, r.mean_plos, "1"));
            moment_rows(&mut rows, &hash, &r.moments);
            rows.push(row("block_size".into(), &hash, r.gev.n as f64, "requests"));
            rows.push(row("gev_mu".into(), &hash, r.gev.mu_e, "s"));
            rows.push(row("gev_sigma".into(), &hash, r.gev.sigma_e, "s"));
            rows.push(row("gev_xi".into(), &hash, r.gev.xi_e, "1"));
            for a in &args.alpha_c {
                rows.push(row(format!("var[alpha_c={a}]"), &hash, r.var(*a)?, "s"));
            }
            for a in &args.alpha_c {
                rows.push(row(format!("tvar[alpha_c={a}]"), &hash, r.tvar(*a)?, "s"));
            }
            for d in &deltas {
                rows.push(row(
                    format!("reliability[delta={d}]"),
                    &hash,
                    r.reliability(*d),
                    "1",
                ));
            }
        }
        Mode::GuaranteedLos => {
            let mut cfg = config.clone();
            cfg.sim.guaranteed_los = true;
            let r = guaranteed_report(&cfg)?;
            rows.push(row("rate_los".into(), &hash, r.rate_los, "bit/s"));
            moment_rows(&mut rows, &hash, &r.moments);
            rows.push(row(
                "tx_delay_mode".into(),
                &hash,
                r.pipeline.tx_pdf.mode(),
                "s",
            ));
            for d in &deltas {
                rows.push(row(
                    format!("reliability[delta={d}]"),
                    &hash,
                    r.reliability(*d)?,
                    "1",
                ));
            }
            rows.push(row(
                "truncation_terms".into(),
                &hash,
                r.pipeline.truncation_terms as f64,
                "1",
            ));
            rows.push(row(
                "truncation_residual".into(),
                &hash,
                r.pipeline.truncation_residual,
                "1",
            ));
            match grid_path(args) {
                Some(p) => {
                    let cdf = &r.pipeline.e2e_cdf;
                    let grid_rows = cdf
                        .grid()
                        .iter()
                        .zip(cdf.values())
                        .map(|(t, v)| vec![num(*t), num(*v)]);
                    write_csv(sink(Some(&p))?, "thzvr-phi v1", &["t", "cdf"], grid_rows)?;
                }
                None => log::warn!("no --out or --grid-out given; the CDF grid is not written"),
            }
        }
    }
    write_csv(
        sink(args.out.as_deref())?,
        "thzvr-analyze v1",
        &["quantity", "params_hash", "value", "units"],
        rows,
    )
}

fn grid_path(args: &AnalyzeArgs) -> Option<PathBuf> {
    args.grid_out.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            p.with_file_name(format!("{stem}.phi.csv"))
        })
    })
}
