use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::ValueEnum;

use super::analyze::{guaranteed_report, tail_report};
use super::output::{num, sink, write_csv};
use super::ReproduceArgs;
use crate::config::NetworkConfig;
use crate::delay_analytics::{delay_moments, Availability};
use crate::error::{Error, Result};
use crate::evt_risk::{gev_cdf, gev_from_moments_with, MIN_BLOCK};
use crate::simcore::{
    empirical_tvar, quantile, ratio_estimate, run_replications, run_traces, SessionTrace,
    SimAggregate,
};

/// Beam-tracking offset for the second 8b curve when the config sets none.
///
/// Chosen so the best-case TVaR moves from about 100 ms to about 130 ms.
pub const FIG8B_BEAM_DELAY: f64 = 0.03;

const BANDWIDTHS_GHZ: [f64; 8] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
const ABSORPTION: [f64; 11] = [
    1e-4, 2e-4, 5e-4, 1e-3, 1.6e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1,
];
const RADII: [f64; 8] = [1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0];
const DISTANCES: [f64; 3] = [1.0, 1.25, 1.45];
const RELIABILITY_DELTAS: [f64; 2] = [0.01, 0.02];
const HIST_BINS: usize = 60;
const SESSION_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    #[value(name = "3a")]
    F3a,
    #[value(name = "3b")]
    F3b,
    #[value(name = "4")]
    F4,
    #[value(name = "5")]
    F5,
    #[value(name = "6a")]
    F6a,
    #[value(name = "6b")]
    F6b,
    #[value(name = "7a")]
    F7a,
    #[value(name = "7b")]
    F7b,
    #[value(name = "8a")]
    F8a,
    #[value(name = "8b")]
    F8b,
    #[value(name = "9")]
    F9,
    #[value(name = "10")]
    F10,
}

impl FigureId {
    pub fn label(self) -> &'static str {
        match self {
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F4 => "4",
            FigureId::F5 => "5",
            FigureId::F6a => "6a",
            FigureId::F6b => "6b",
            FigureId::F7a => "7a",
            FigureId::F7b => "7b",
            FigureId::F8a => "8a",
            FigureId::F8b => "8b",
            FigureId::F9 => "9",
            FigureId::F10 => "10",
        }
    }

    fn title(self) -> &'static str {
        match self {
            FigureId::F3a => "GEV density of the session-maximum delay",
            FigureId::F3b => "Transmission delay density with guaranteed LoS",
            FigureId::F4 => "Delay over a 1 THz session",
            FigureId::F5 => "Delay over a 0.2 THz session",
            FigureId::F6a => "Mean delay versus bandwidth at 1 THz",
            FigureId::F6b => "Reliability and TVaR versus bandwidth at 1 THz",
            FigureId::F7a => "Mean delay versus bandwidth at 0.2 THz",
            FigureId::F7b => "Reliability and TVaR versus bandwidth at 0.2 THz",
            FigureId::F8a => "TVaR versus confidence level",
            FigureId::F8b => "TVaR at 95% versus bandwidth, with and without beam tracking",
            FigureId::F9 => "Delay and reliability versus molecular absorption",
            FigureId::F10 => "Guaranteed-LoS reliability versus interference radius",
        }
    }

    fn preset(self) -> &'static str {
        match self {
            FigureId::F5 | FigureId::F7a | FigureId::F7b => "table2_0p2thz",
            _ => "table2_1thz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub analytic: f64,
    pub simulated: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub y_label: String,
    pub points: Vec<Point>,
}

impl Curve {
    fn new(name: impl Into<String>, y_label: impl Into<String>) -> Self {
        Curve {
            name: name.into(),
            y_label: y_label.into(),
            points: Vec::new(),
        }
    }

    fn push(&mut self, x: f64, analytic: f64, simulated: f64, stderr: f64) {
        self.points.push(Point {
            x,
            analytic,
            simulated,
            stderr,
        });
    }
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub id: FigureId,
    pub config: NetworkConfig,
    pub runs: usize,
    pub seed: u64,
    pub x_label: String,
    pub curves: Vec<Curve>,
    /// Extra manifest entries: landmarks and tolerances.
    pub notes: Vec<(String, String)>,
}

/// Computes every curve of one figure.
pub fn figure(id: FigureId, config: &NetworkConfig, runs: usize, seed: u64) -> Result<Figure> {
    if runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    let mut cfg = config.clone();
    let preset = NetworkConfig::preset(id.preset())?;
    if cfg.channel.f != preset.channel.f {
        log::info!(
            "figure {} uses f = {} Hz and K = {} 1/m from {}",
            id.label(),
            preset.channel.f,
            preset.channel.k,
            id.preset()
        );
        cfg.channel.f = preset.channel.f;
        cfg.channel.k = preset.channel.k;
    }
    cfg.sim.guaranteed_los = false;
    cfg.validate()?;
    let mut fig = Figure {
        id,
        config: cfg.clone(),
        runs,
        seed,
        x_label: String::new(),
        curves: Vec::new(),
        notes: Vec::new(),
    };
    let s = Sweep { runs, seed };
    match id {
        FigureId::F3a => s.fig3a(&cfg, &mut fig)?,
        FigureId::F3b => s.fig3b(&cfg, &mut fig)?,
        FigureId::F4 | FigureId::F5 => s.session(&cfg, &mut fig)?,
        FigureId::F6a | FigureId::F7a => s.delay_vs_bandwidth(&cfg, &mut fig)?,
        FigureId::F6b | FigureId::F7b => s.reliability_vs_bandwidth(&cfg, &mut fig)?,
        FigureId::F8a => s.fig8a(&cfg, &mut fig)?,
        FigureId::F8b => s.fig8b(&cfg, &mut fig)?,
        FigureId::F9 => s.fig9(&cfg, &mut fig)?,
        FigureId::F10 => s.fig10(&cfg, &mut fig)?,
    }
    Ok(fig)
}

struct Sweep {
    runs: usize,
    seed: u64,
}

fn with_mode(cfg: &NetworkConfig, guaranteed: bool, deltas: &[f64]) -> NetworkConfig {
    let mut c = cfg.clone();
    c.sim.guaranteed_los = guaranteed;
    c.sim.deltas = deltas.to_vec();
    c
}

fn reliability_at(agg: &SimAggregate, delta: f64) -> (f64, f64) {
    agg.reliability
        .iter()
        .find(|(d, _)| *d == delta)
        .map(|(_, e)| (e.value, e.stderr))
        .unwrap_or((f64::NAN, f64::NAN))
}

/// Empirical TVaR with the standard error of the mean of the exceedances.
fn tvar_estimate(samples: &[f64], alpha_c: f64) -> (f64, f64) {
    let Ok(t) = empirical_tvar(samples, alpha_c) else {
        return (f64::NAN, f64::NAN);
    };
    let q = quantile(samples, alpha_c).unwrap_or(f64::NAN);
    let above: Vec<f64> = samples.iter().copied().filter(|x| *x > q).collect();
    (t, mean_stderr(&above).1)
}

fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (m, f64::NAN);
    }
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Histogram density over `[lo, hi)` normalized by all samples.
fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64, f64)> {
    let h = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        if x >= lo && x < hi {
            counts[(((x - lo) / h) as usize).min(bins - 1)] += 1;
        }
    }
    let n = samples.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let c = c as f64;
            (lo + (i as f64 + 0.5) * h, c / (n * h), c.sqrt() / (n * h))
        })
        .collect()
}

fn binomial(samples: &[f64], x: f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let p = samples.iter().filter(|s| **s <= x).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

fn tag(x: f64) -> String {
    format!("{x}")
}

impl Sweep {
    fn sim(&self, cfg: &NetworkConfig) -> Result<SimAggregate> {
        run_replications(cfg, self.runs, self.seed)
    }

    fn traces(&self, cfg: &NetworkConfig) -> Result<Vec<SessionTrace>> {
        run_traces(cfg, self.runs, self.seed)
    }

    fn fig3a(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let tail = tail_report(cfg)?;
        let agg = self.sim(cfg)?;
        let maxima = &agg.session_maxima;
        let (lo, hi) = (0.0, 0.15);
        let h = (hi - lo) / HIST_BINS as f64;
        let mut pdf = Curve::new("gev_pdf", "density [1/s]");
        for (c, d, se) in histogram(maxima, lo, hi, HIST_BINS) {
            let a = (gev_cdf(&tail.gev, c + h / 2.0) - gev_cdf(&tail.gev, c - h / 2.0)) / h;
            pdf.push(c, a, d, se);
        }
        let mut cdf = Curve::new("gev_cdf", "probability [1]");
        for i in 0..=30 {
            let x = i as f64 * 0.005;
            let (p, se) = binomial(maxima, x);
            cdf.push(x, gev_cdf(&tail.gev, x), p, se);
        }
        fig.x_label = "session maximum delay [s]".into();
        fig.curves = vec![pdf, cdf];
        fig.notes
            .push(("landmark.median_band_s".into(), "0.030..0.060".into()));
        fig.notes
            .push(("landmark.p99_max_s".into(), "0.110".into()));
        Ok(())
    }

    fn fig3b(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let g = with_mode(cfg, true, &cfg.sim.deltas);
        let rep = guaranteed_report(&g)?;
        let cdf = rep.pipeline.tx_pdf.cdf();
        let grid = cdf.grid();
        let values = cdf.values();
        let lo = grid[values.iter().position(|v| *v >= 1e-4).unwrap_or(0)];
        let hi = grid[values
            .iter()
            .rposition(|v| *v <= 1.0 - 1e-4)
            .unwrap_or(grid.len() - 1)];
        if !(hi > lo) {
            return Err(Error::Grid(
                "transmission delay support is degenerate on the grid".into(),
            ));
        }
        let tx: Vec<f64> = self
            .traces(&g)?
            .iter()
            .flat_map(|t| t.requests.iter().map(|r| r.tx_time))
            .collect();
        let h = (hi - lo) / HIST_BINS as f64;
        let mut pdf = Curve::new("tx_delay_pdf", "density [1/s]");
        for (c, d, se) in histogram(&tx, lo, hi, HIST_BINS) {
            pdf.push(
                c,
                (cdf.eval(c + h / 2.0) - cdf.eval(c - h / 2.0)) / h,
                d,
                se,
            );
        }
        fig.x_label = "transmission delay [s]".into();
        fig.curves = vec![pdf];
        fig.notes
            .push(("analytic_mode_s".into(), num(rep.pipeline.tx_pdf.mode())));
        fig.notes
            .push(("landmark.mode_band_s".into(), "0.00055..0.00095".into()));
        Ok(())
    }

    fn session(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let tail = tail_report(cfg)?;
        let traces = self.traces(cfg)?;
        let m = &tail.moments;
        let step = cfg.sim.session_length / SESSION_BINS as f64;
        let mut average = Curve::new("average", "mean delay [s]");
        let mut worst = Curve::new("tail", "expected running maximum [s]");
        for k in 1..=SESSION_BINS {
            let t = k as f64 * step;
            let pairs: Vec<(f64, f64)> = traces
                .iter()
                .map(|tr| {
                    let upto = tr.requests.iter().filter(|r| r.arrival <= t);
                    let (s, n) = upto.fold((0.0, 0.0), |(s, n), r| (s + r.e2e, n + 1.0));
                    (s, n)
                })
                .collect();
            let e = ratio_estimate(pairs.into_iter());
            average.push(t, m.mean_e2e, e.value, e.stderr);
            let maxima: Vec<f64> = traces
                .iter()
                .filter_map(|tr| {
                    tr.requests
                        .iter()
                        .filter(|r| r.arrival <= t)
                        .map(|r| r.e2e)
                        .reduce(f64::max)
                })
                .collect();
            let n = ((t * cfg.queues.lambda1).round() as usize).max(MIN_BLOCK);
            let gev = gev_from_moments_with(m.mean_e2e, m.var_e2e, n, cfg.sim.identification)?;
            let (sm, se) = mean_stderr(&maxima);
            worst.push(t, gev.mean(), sm, se);
        }
        let mut instant = Curve::new("instantaneous", "request delay [s]");
        for r in &traces[0].requests {
            instant.push(r.arrival, m.mean_e2e, r.e2e, f64::NAN);
        }
        fig.x_label = "session time [s]".into();
        fig.curves = vec![average, instant, worst];
        Ok(())
    }

    fn delay_vs_bandwidth(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let mut blockage = Curve::new("mean_e2e_blockage", "mean delay [s]");
        let mut los = Curve::new("mean_e2e_guaranteed_los", "mean delay [s]");
        for ghz in BANDWIDTHS_GHZ {
            let mut c = cfg.clone();
            c.channel.w = ghz * 1e9;
            let b = with_mode(&c, false, &c.sim.deltas);
            let agg = self.sim(&b)?;
            blockage.push(
                c.channel.w,
                tail_report(&b)?.moments.mean_e2e,
                agg.mean_e2e.value,
                agg.mean_e2e.stderr,
            );
            let g = with_mode(&c, true, &c.sim.deltas);
            let lm = delay_moments(
                &g.link_budget()?,
                &g.queues,
                Availability::Guaranteed,
                g.delay_options(),
            )?;
            let agg = self.sim(&g)?;
            los.push(
                c.channel.w,
                lm.mean_e2e,
                agg.mean_e2e.value,
                agg.mean_e2e.stderr,
            );
        }
        fig.x_label = "bandwidth [Hz]".into();
        fig.curves = vec![blockage, los];
        fig.notes.push((
            "expected_trend".into(),
            "non-increasing in bandwidth".into(),
        ));
        Ok(())
    }

    fn reliability_vs_bandwidth(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let mut curves = Vec::new();
        for d in RELIABILITY_DELTAS {
            curves.push(Curve::new(
                format!("reliability_blockage_delta_{}", tag(d)),
                "reliability [1]",
            ));
        }
        for d in RELIABILITY_DELTAS {
            curves.push(Curve::new(
                format!("reliability_guaranteed_los_delta_{}", tag(d)),
                "reliability [1]",
            ));
        }
        let mut tvar90 = Curve::new("tvar_0.9", "TVaR [s]");
        for ghz in BANDWIDTHS_GHZ {
            let mut c = cfg.clone();
            c.channel.w = ghz * 1e9;
            let w = c.channel.w;
            let b = with_mode(&c, false, &RELIABILITY_DELTAS);
            let tail = tail_report(&b)?;
            let agg = self.sim(&b)?;
            let g = with_mode(&c, true, &RELIABILITY_DELTAS);
            let rep = guaranteed_report(&g)?;
            let gagg = self.sim(&g)?;
            for (i, d) in RELIABILITY_DELTAS.iter().enumerate() {
                let (v, se) = reliability_at(&agg, *d);
                curves[i].push(w, tail.reliability(*d), v, se);
                let (v, se) = reliability_at(&gagg, *d);
                curves[RELIABILITY_DELTAS.len() + i].push(w, rep.reliability(*d)?, v, se);
            }
            let (t, se) = tvar_estimate(&agg.session_maxima, 0.9);
            tvar90.push(w, tail.tvar(0.9)?, t, se);
        }
        curves.push(tvar90);
        fig.x_label = "bandwidth [Hz]".into();
        fig.curves = curves;
        if fig.id == FigureId::F6b {
            fig.notes.push((
                "landmark.reliability_delta_0.01_at_30e9".into(),
                "0.63..0.73".into(),
            ));
            fig.notes.push((
                "landmark.reliability_delta_0.02_at_30e9".into(),
                "0.93..0.99".into(),
            ));
            fig.notes.push((
                "landmark.guaranteed_los_delta_0.02_at_15e9".into(),
                ">= 0.99999".into(),
            ));
        }
        fig.notes.push((
            "simulated_reliability".into(),
            "per-request fraction of delays at or below delta".into(),
        ));
        Ok(())
    }

    fn fig8a(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let tail = tail_report(cfg)?;
        let agg = self.sim(cfg)?;
        let maxima = &agg.session_maxima;
        let mut tv = Curve::new("tvar", "TVaR [s]");
        let mut va = Curve::new("var", "VaR [s]");
        for i in 0..20 {
            let a = (80 + i) as f64 / 100.0;
            let (t, se) = tvar_estimate(maxima, a);
            tv.push(a, tail.tvar(a)?, t, se);
            va.push(
                a,
                tail.var(a)?,
                quantile(maxima, a).unwrap_or(f64::NAN),
                f64::NAN,
            );
        }
        fig.x_label = "confidence level alpha_C [1]".into();
        fig.curves = vec![tv, va];
        fig.notes
            .push(("landmark.tvar_0.9_s".into(), "0.063".into()));
        fig.notes
            .push(("landmark.tvar_0.99_s".into(), "0.45".into()));
        fig.notes
            .push(("landmark.relative_tolerance".into(), "0.2".into()));
        fig.notes.push((
            "empirical_tvar_min_samples".into(),
            "ceil(100 / (1 - alpha_C)); NaN where the runs fall short".into(),
        ));
        Ok(())
    }

    fn fig8b(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let beam = if cfg.queues.beam_tracking_delay > 0.0 {
            cfg.queues.beam_tracking_delay
        } else {
            FIG8B_BEAM_DELAY
        };
        let mut plain = Curve::new("tvar_0.95", "TVaR [s]");
        let mut tracked = Curve::new("tvar_0.95_beam_tracking", "TVaR [s]");
        for ghz in BANDWIDTHS_GHZ {
            let mut c = cfg.clone();
            c.channel.w = ghz * 1e9;
            c.queues.beam_tracking_delay = 0.0;
            let agg = self.sim(&c)?;
            let (t, se) = tvar_estimate(&agg.session_maxima, 0.95);
            plain.push(c.channel.w, tail_report(&c)?.tvar(0.95)?, t, se);
            // The offset is added after queueing, so shifting the maxima is exact.
            let shifted: Vec<f64> = agg.session_maxima.iter().map(|m| m + beam).collect();
            let (t, se) = tvar_estimate(&shifted, 0.95);
            c.queues.beam_tracking_delay = beam;
            tracked.push(c.channel.w, tail_report(&c)?.tvar(0.95)?, t, se);
        }
        fig.x_label = "bandwidth [Hz]".into();
        fig.curves = vec![plain, tracked];
        fig.notes.push(("beam_tracking_delay_s".into(), num(beam)));
        fig.notes.push((
            "expected_trend".into(),
            "non-increasing in bandwidth".into(),
        ));
        Ok(())
    }

    fn fig9(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let deltas = &cfg.sim.deltas;
        let mut mb = Curve::new("mean_e2e_blockage", "mean delay [s]");
        let mut mg = Curve::new("mean_e2e_guaranteed_los", "mean delay [s]");
        let mut rb = Curve::new("reliability_blockage_delta_0.02", "reliability [1]");
        let mut rg: Vec<Curve> = deltas
            .iter()
            .map(|d| {
                Curve::new(
                    format!("reliability_guaranteed_los_delta_{}", tag(*d)),
                    "reliability [1]",
                )
            })
            .collect();
        let mut bdeltas = deltas.clone();
        if !bdeltas.contains(&0.02) {
            bdeltas.push(0.02);
        }
        for k in ABSORPTION {
            let mut c = cfg.clone();
            c.channel.k = k;
            let b = with_mode(&c, false, &bdeltas);
            let tail = tail_report(&b)?;
            let agg = self.sim(&b)?;
            mb.push(
                k,
                tail.moments.mean_e2e,
                agg.mean_e2e.value,
                agg.mean_e2e.stderr,
            );
            let (v, se) = reliability_at(&agg, 0.02);
            rb.push(k, tail.reliability(0.02), v, se);
            let g = with_mode(&c, true, deltas);
            let rep = guaranteed_report(&g)?;
            let gagg = self.sim(&g)?;
            mg.push(
                k,
                rep.moments.mean_e2e,
                gagg.mean_e2e.value,
                gagg.mean_e2e.stderr,
            );
            for (curve, d) in rg.iter_mut().zip(deltas) {
                let (v, se) = reliability_at(&gagg, *d);
                curve.push(k, rep.reliability(*d)?, v, se);
            }
        }
        fig.x_label = "molecular absorption K [1/m]".into();
        fig.curves = [vec![mb, mg, rb], rg].concat();
        fig.notes.push((
            "expected_trend".into(),
            "reliability non-increasing in K".into(),
        ));
        Ok(())
    }

    fn fig10(&self, cfg: &NetworkConfig, fig: &mut Figure) -> Result<()> {
        let deltas = &cfg.sim.deltas;
        let mut curves = Vec::new();
        for r0 in DISTANCES {
            let mut row: Vec<Curve> = deltas
                .iter()
                .map(|d| {
                    Curve::new(
                        format!("reliability_r0_{}_delta_{}", tag(r0), tag(*d)),
                        "reliability [1]",
                    )
                })
                .collect();
            for omega in RADII {
                let mut c = with_mode(cfg, true, deltas);
                c.channel.omega = omega;
                c.channel.r0 = r0;
                c.sim.region_side = c.sim.region_side.max(2.0 * omega);
                let rep = guaranteed_report(&c)?;
                let agg = self.sim(&c)?;
                for (curve, d) in row.iter_mut().zip(deltas) {
                    let (v, se) = reliability_at(&agg, *d);
                    curve.push(omega, rep.reliability(*d)?, v, se);
                }
            }
            curves.extend(row);
        }
        fig.x_label = "interference radius Omega [m]".into();
        fig.curves = curves;
        fig.notes.push((
            "expected_trend".into(),
            "reliability non-increasing in r0".into(),
        ));
        Ok(())
    }
}

impl Figure {
    fn file_name(&self, curve: &Curve) -> String {
        format!("fig{}_{}.csv", self.id.label(), curve.name)
    }

    /// Line-oriented `key: value` manifest.
    pub fn manifest(&self) -> String {
        let mut m = String::new();
        let c = &self.config;
        let _ = writeln!(m, "schema: thzvr-manifest v1");
        let _ = writeln!(m, "figure: {}", self.id.label());
        let _ = writeln!(m, "title: {}", self.id.title());
        let _ = writeln!(m, "preset_frequency: {}", self.id.preset());
        let _ = writeln!(m, "params_hash: {}", c.params_hash());
        let _ = writeln!(m, "frequency_hz: {}", c.channel.f);
        let _ = writeln!(m, "absorption_per_m: {}", c.channel.k);
        let _ = writeln!(m, "bandwidth_hz: {}", c.channel.w);
        let _ = writeln!(m, "runs: {}", self.runs);
        let _ = writeln!(m, "seed: {}", self.seed);
        let _ = writeln!(m, "tolerance.series_truncation: {}", c.sim.tolerance);
        let _ = writeln!(m, "tolerance.grid_points: {}", c.sim.grid_points);
        let _ = writeln!(m, "tolerance.grid_span: {}", c.sim.grid_span);
        let _ = writeln!(m, "tolerance.simulation_stderr_multiple: 3");
        let _ = writeln!(m, "x: {}", self.x_label);
        for curve in &self.curves {
            let _ = writeln!(m, "curve: {} | {}", self.file_name(curve), curve.y_label);
        }
        for (k, v) in &self.notes {
            let _ = writeln!(m, "{k}: {v}");
        }
        m
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        for curve in &self.curves {
            let rows = curve
                .points
                .iter()
                .map(|p| vec![num(p.x), num(p.analytic), num(p.simulated), num(p.stderr)]);
            let path = dir.join(self.file_name(curve));
            write_csv(
                sink(Some(&path))?,
                "thzvr-curve v1",
                &["x", "analytic_y", "simulated_y", "stderr"],
                rows,
            )?;
        }
        let path = dir.join(format!("fig{}_manifest.txt", self.id.label()));
        fs::write(&path, self.manifest()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

pub(super) fn cmd_reproduce(config: &NetworkConfig, args: &ReproduceArgs) -> Result<()> {
    let runs = args.runs.unwrap_or(config.sim.runs);
    let seed = args.seed.unwrap_or(config.sim.seed);
    figure(args.figure, config, runs, seed)?.write(&args.out)
}
