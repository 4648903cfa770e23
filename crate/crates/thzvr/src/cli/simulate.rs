use super::output::{num, sink, write_csv};
use super::{Emit, SimulateArgs};
use crate::config::NetworkConfig;
use crate::error::Result;
use crate::simcore::{empirical_tvar, quantile, run_replications, run_traces, SimAggregate};

const TVAR_LEVELS: [f64; 3] = [0.9, 0.95, 0.99];

pub(super) fn cmd_simulate(config: &NetworkConfig, args: &SimulateArgs) -> Result<()> {
    let mut cfg = config.clone();
    if args.guaranteed_los {
        cfg.sim.guaranteed_los = true;
    }
    let runs = args.runs.unwrap_or(cfg.sim.runs);
    let seed = args.seed.unwrap_or(cfg.sim.seed);
    let out = sink(args.out.as_deref())?;
    match args.emit {
        Emit::Aggregate => {
            let agg = run_replications(&cfg, runs, seed)?;
            write_csv(
                out,
                "thzvr-simulate-aggregate v1",
                &["metric", "value", "stderr", "runs", "seed"],
                aggregate_rows(&agg),
            )
        }
        Emit::Traces => {
            let traces = run_traces(&cfg, runs, seed)?;
            let rows = traces.iter().flat_map(|t| {
                t.requests.iter().enumerate().map(move |(i, r)| {
                    vec![
                        t.seed.to_string(),
                        i.to_string(),
                        num(r.arrival),
                        num(r.t1_wait),
                        num(r.q2_wait),
                        num(r.tx_time),
                        num(r.e2e),
                        num(r.los_fraction_during_tx),
                        (r.los_at_start as u8).to_string(),
                        num(r.interference),
                    ]
                })
            });
            write_csv(
                out,
                "thzvr-simulate-traces v1",
                &[
                    "seed",
                    "request",
                    "arrival",
                    "t1_wait",
                    "q2_wait",
                    "tx_time",
                    "e2e",
                    "los_fraction_during_tx",
                    "los_at_start",
                    "interference",
                ],
                rows,
            )
        }
    }
}

fn aggregate_rows(agg: &SimAggregate) -> Vec<Vec<String>> {
    let runs = agg.runs.to_string();
    let seed = agg.base_seed.to_string();
    let row = |metric: String, value: f64, stderr: f64| {
        vec![metric, num(value), num(stderr), runs.clone(), seed.clone()]
    };
    let mut rows = vec![
        row("requests".into(), agg.total_requests as f64, f64::NAN),
        row("mean_e2e".into(), agg.mean_e2e.value, agg.mean_e2e.stderr),
        row(
            "second_moment_e2e".into(),
            agg.second_moment_e2e.value,
            agg.second_moment_e2e.stderr,
        ),
        row("var_e2e".into(), agg.var_e2e, f64::NAN),
        row("mean_t1_wait".into(), agg.mean_t1.value, agg.mean_t1.stderr),
        row("plos".into(), agg.plos.value, agg.plos.stderr),
    ];
    for (d, e) in &agg.reliability {
        rows.push(row(format!("reliability[delta={d}]"), e.value, e.stderr));
    }
    let maxima = &agg.session_maxima;
    for p in [0.5, 0.99] {
        let q = quantile(maxima, p).unwrap_or(f64::NAN);
        rows.push(row(format!("session_max_quantile[p={p}]"), q, f64::NAN));
    }
    for a in TVAR_LEVELS {
        if let Ok(t) = empirical_tvar(maxima, a) {
            rows.push(row(format!("session_max_tvar[alpha_c={a}]"), t, f64::NAN));
        }
    }
    rows
}
