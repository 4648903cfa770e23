use proptest::prelude::*;

use thzvr::cli::{guaranteed_report, tail_report};
use thzvr::config::NetworkConfig;

fn guaranteed(edit: impl Fn(&mut NetworkConfig)) -> Vec<f64> {
    let mut c = NetworkConfig::preset("table2_1thz").unwrap();
    c.sim.guaranteed_los = true;
    c.sim.grid_points = 1 << 12;
    edit(&mut c);
    let r = guaranteed_report(&c).unwrap();
    [0.005, 0.010, 0.020]
        .iter()
        .map(|d| r.reliability(*d).unwrap())
        .collect()
}

fn dominates(hi: &[f64], lo: &[f64]) -> bool {
    hi.iter().zip(lo).all(|(a, b)| a >= b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn more_bandwidth_never_hurts(w in 2e9f64..40e9, step in 0.5e9f64..20e9) {
        let a = guaranteed(|c| c.channel.w = w);
        let b = guaranteed(|c| c.channel.w = w + step);
        prop_assert!(dominates(&b, &a), "{a:?} {b:?}");
    }

    #[test]
    fn more_absorption_never_helps(k in 1e-4f64..0.2, factor in 1.1f64..5.0) {
        let a = guaranteed(|c| c.channel.k = k);
        let b = guaranteed(|c| c.channel.k = k * factor);
        prop_assert!(dominates(&a, &b), "{a:?} {b:?}");
    }

    #[test]
    fn longer_links_never_help(r0 in 0.3f64..2.5, step in 0.05f64..0.5) {
        let a = guaranteed(|c| c.channel.r0 = r0);
        let b = guaranteed(|c| c.channel.r0 = r0 + step);
        prop_assert!(dominates(&a, &b), "{a:?} {b:?}");
    }

    #[test]
    fn tail_reliability_falls_with_absorption(k in 1e-4f64..0.2, factor in 1.1f64..5.0) {
        let at = |k: f64| {
            let mut c = NetworkConfig::preset("table2_1thz").unwrap();
            c.channel.k = k;
            tail_report(&c).unwrap()
        };
        let (a, b) = (at(k), at(k * factor));
        for d in [0.005, 0.01, 0.02] {
            prop_assert!(a.reliability(d) >= b.reliability(d));
        }
    }
}

#[test]
fn tail_reliability_rises_with_bandwidth_above_5ghz() {
    let at = |w: f64| {
        let mut c = NetworkConfig::preset("table2_1thz").unwrap();
        c.channel.w = w;
        tail_report(&c).unwrap()
    };
    let series: Vec<_> = (2..=16).map(|k| at(k as f64 * 2.5e9)).collect();
    for d in [0.005, 0.01, 0.02] {
        let r: Vec<f64> = series.iter().map(|t| t.reliability(d)).collect();
        assert!(r.windows(2).all(|w| w[1] >= w[0]), "delta {d}: {r:?}");
    }
}
