mod common;

use std::f64::consts::{PI, SQRT_2};

use behavior_metrics::anomaly::*;
use behavior_metrics::behaviors::hankel;
use common::*;

fn expected_regime(k: usize) -> Regime {
    // Trailing windows of 25 unit-spaced samples; faults on [50, 100] and [150, 200].
    if k < 24 {
        return Regime::Init;
    }
    let state = |t: usize| match t {
        50..=100 => 1,
        150..=200 => 2,
        _ => 0,
    };
    let first = state(k - 24);
    if (k - 24..=k).any(|t| state(t) != first) {
        return Regime::Transition;
    }
    [Regime::Normal, Regime::Fault1, Regime::Fault2][first]
}

#[test]
fn regimes_follow_the_trailing_window() {
    let cfg = AnomalyConfig::default();
    let series = run_detection(&cfg).unwrap();
    assert_eq!(series.len(), 251);
    for k in 0..251 {
        assert_eq!(series.regime[k], expected_regime(k), "t = {k}");
        assert_eq!(window_regime(&cfg, k), expected_regime(k));
        assert_eq!(series.chordal[k].is_none(), k < 24);
    }
}

#[test]
fn signal_matches_closed_form() {
    let cfg = AnomalyConfig::default();
    let y = generate_signal(&cfg).unwrap();
    let s = |f: f64, t: f64| (2.0 * PI * f * t).sin();
    for k in 0..251 {
        let t = k as f64;
        let mut expected = s(0.2, t);
        if (50..=100).contains(&k) || (150..=200).contains(&k) {
            expected += s(0.1, t);
        }
        if (150..=200).contains(&k) {
            expected += s(0.05, t);
        }
        assert!((y.values()[k] - expected).abs() < 1e-12, "t = {k}");
    }
}

#[test]
fn steady_states_are_analytic() {
    let cfg = AnomalyConfig::default();
    let series = run_detection(&cfg).unwrap();
    for k in 0..series.len() {
        let (Some(chordal), Some(gap), Some(rank)) = (series.chordal[k], series.l_gap[k], series.window_rank[k]) else {
            continue;
        };
        match series.regime[k] {
            Regime::Normal => {
                assert_eq!(rank, 2);
                assert!(chordal <= 1e-6 && gap <= 1e-6, "t = {k}: {chordal} {gap}");
            }
            Regime::Fault1 => {
                assert_eq!(rank, 4);
                assert!((chordal - SQRT_2).abs() <= 1e-3);
                assert_eq!(gap, 1.0);
            }
            Regime::Fault2 => {
                assert_eq!(rank, 6);
                assert!((chordal - 2.0).abs() <= 1e-3);
                assert_eq!(gap, 1.0);
            }
            _ => {}
        }
    }
}

#[test]
fn window_ranks_match_jacobi_oracle() {
    let cfg = AnomalyConfig::default();
    let y = generate_signal(&cfg).unwrap();
    let series = run_detection(&cfg).unwrap();
    for k in 24..251 {
        let h = hankel(&y.window(k - 24, 25).unwrap(), 10).unwrap();
        assert_eq!(h.shape(), (10, 16));
        assert_eq!(series.window_rank[k], Some(oracle_rank(&h, 1e-8)), "t = {k}");
    }
}

#[test]
fn severity_is_monotone_and_gap_saturates() {
    let series = run_detection(&AnomalyConfig::default()).unwrap();
    let normal = series.summary(Regime::Normal).unwrap();
    let f1 = series.summary(Regime::Fault1).unwrap();
    let f2 = series.summary(Regime::Fault2).unwrap();
    assert!(normal.mean_chordal < f1.mean_chordal && f1.mean_chordal < f2.mean_chordal);
    assert_eq!((normal.windows, f1.windows, f2.windows), (26 + 25 + 26, 27, 27));
    for k in 24..series.len() {
        if series.window_rank[k] != Some(2) {
            assert_eq!(series.l_gap[k], Some(1.0), "t = {k}");
        }
    }
}

#[test]
fn steady_states_do_not_depend_on_amplitudes() {
    let cfg = AnomalyConfig::from_toml("[amplitudes]\nnominal = 2.5\nfault1 = 0.3\nfault2 = 4.0\n").unwrap();
    let series = run_detection(&cfg).unwrap();
    let f1 = series.summary(Regime::Fault1).unwrap();
    let f2 = series.summary(Regime::Fault2).unwrap();
    assert!(series.summary(Regime::Normal).unwrap().max_chordal <= 1e-6);
    assert!((f1.min_chordal - SQRT_2).abs() <= 1e-3 && (f1.max_chordal - SQRT_2).abs() <= 1e-3);
    assert!((f2.min_chordal - 2.0).abs() <= 1e-3 && (f2.max_chordal - 2.0).abs() <= 1e-3);
}

#[test]
fn outputs_are_deterministic() {
    let cfg = AnomalyConfig::default();
    let render = || {
        let signal = generate_signal(&cfg).unwrap();
        let series = run_detection(&cfg).unwrap();
        [
            signal_csv(&cfg, &signal),
            chordal_csv(&cfg, &series),
            gap_csv(&cfg, &series),
            combined_csv(&cfg, &series),
        ]
    };
    assert_eq!(render(), render());
}

#[test]
fn csv_layout() {
    let cfg = AnomalyConfig::default();
    let series = run_detection(&cfg).unwrap();
    let chordal = chordal_csv(&cfg, &series);
    let mut lines = chordal.lines();
    assert_eq!(lines.next(), Some("t,distance"));
    assert!(lines.next().unwrap().starts_with("24,"));
    assert_eq!(chordal.lines().count(), 1 + 227);
    let signal = signal_csv(&cfg, &generate_signal(&cfg).unwrap());
    assert_eq!(signal.lines().next(), Some("t,y"));
    assert_eq!(signal.lines().count(), 1 + 251);
    let combined = combined_csv(&cfg, &series);
    assert_eq!(combined.lines().nth(1), Some("0,init,,,"));
    // every distance row parses back to the stored value
    for (line, k) in chordal.lines().skip(1).zip(24..) {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(Some(value), series.chordal[k]);
    }
}

#[test]
fn config_round_trip_and_rejections() {
    let cfg = AnomalyConfig {
        window_rows: 8,
        window_cols: 12,
        ..AnomalyConfig::default()
    };
    assert_eq!(AnomalyConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    assert!(AnomalyConfig::from_toml("unknown_key = 1\n").is_err());
    assert!(AnomalyConfig::from_toml("window_rows = 0\n").is_err());
    assert!(AnomalyConfig::from_toml("sample_period_s = -1.0\n").is_err());
    assert!(AnomalyConfig::from_toml("rank_tol = \"loose\"\n").is_err());
    assert_eq!(AnomalyConfig::from_toml("").unwrap(), AnomalyConfig::default());
}
