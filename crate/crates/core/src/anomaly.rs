//! Sliding-window anomaly detection on a harmonic signal.
//!
//! A nominal sine wave is perturbed by extra harmonics during two fault
//! intervals. At each sample a trailing window is arranged into a `T × τ`
//! Hankel matrix, and the column space of that matrix is compared with the
//! nominal behavior using the chordal distance and the L-gap.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::behaviors::{behavior_from_data, hankel, FiniteHorizonBehavior, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{orthonormal_basis, RankTolerance};
use crate::metrics::{distance, l_gap, MetricKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Amplitudes {
    pub nominal: f64,
    pub fault1: f64,
    pub fault2: f64,
}

impl Default for Amplitudes {
    fn default() -> Self {
        Amplitudes {
            nominal: 1.0,
            fault1: 1.0,
            fault2: 1.0,
        }
    }
}

/// Parameters of the experiment. Times are in seconds, window sizes in samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnomalyConfig {
    pub nominal_freq_hz: f64,
    pub fault1_freq_hz: f64,
    pub fault2_freq_hz: f64,
    pub fault1_window: [f64; 2],
    /// Both fault harmonics are active in this interval.
    pub fault2_window: [f64; 2],
    pub horizon_end: f64,
    pub sample_period_s: f64,
    /// Rows `T` of each Hankel window.
    pub window_rows: usize,
    /// Columns `τ` of each Hankel window.
    pub window_cols: usize,
    pub amplitudes: Amplitudes,
    pub rank_tol: RankTolerance,
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        AnomalyConfig {
            nominal_freq_hz: 0.2,
            fault1_freq_hz: 0.1,
            fault2_freq_hz: 0.05,
            fault1_window: [50.0, 100.0],
            fault2_window: [150.0, 200.0],
            horizon_end: 250.0,
            sample_period_s: 1.0,
            window_rows: 10,
            window_cols: 16,
            amplitudes: Amplitudes::default(),
            rank_tol: RankTolerance::Relative(1e-8),
        }
    }
}

impl AnomalyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: AnomalyConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let dt = self.sample_period_s;
        if !(dt.is_finite() && dt > 0.0) {
            return bad(format!("sample period must be positive, got {dt}"));
        }
        if self.window_rows == 0 || self.window_cols == 0 {
            return bad("window rows and columns must be positive".into());
        }
        if !(self.horizon_end.is_finite() && self.horizon_end >= 0.0) {
            return bad(format!("horizon end must be non-negative, got {}", self.horizon_end));
        }
        let nyquist = 1.0 / (2.0 * dt);
        for (name, f) in [
            ("nominal", self.nominal_freq_hz),
            ("fault 1", self.fault1_freq_hz),
            ("fault 2", self.fault2_freq_hz),
        ] {
            if !(f.is_finite() && f > 0.0 && f < nyquist) {
                return bad(format!("{name} frequency {f} Hz must lie in (0, {nyquist}) Hz"));
            }
        }
        for (name, [start, end]) in [("fault 1", self.fault1_window), ("fault 2", self.fault2_window)] {
            if !(start.is_finite() && end.is_finite() && 0.0 <= start && start <= end && end <= self.horizon_end) {
                return bad(format!(
                    "{name} window [{start}, {end}] must lie inside [0, {}]",
                    self.horizon_end
                ));
            }
        }
        let a = self.amplitudes;
        if ![a.nominal, a.fault1, a.fault2].iter().all(|x| x.is_finite()) {
            return bad("amplitudes must be finite".into());
        }
        if self.num_samples() < self.window_len() {
            return bad(format!(
                "{} samples cannot fill a window of {}",
                self.num_samples(),
                self.window_len()
            ));
        }
        Ok(())
    }

    /// Samples in one trailing window, `T + τ − 1`.
    pub fn window_len(&self) -> usize {
        self.window_rows + self.window_cols - 1
    }

    /// Samples `0..=horizon_end/Δ`.
    pub fn num_samples(&self) -> usize {
        (self.horizon_end / self.sample_period_s + 1e-9).floor() as usize + 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.sample_period_s
    }

    fn in_window(&self, k: usize, [start, end]: [f64; 2]) -> bool {
        let t = self.time(k);
        let slack = 1e-9 * self.sample_period_s;
        t >= start - slack && t <= end + slack
    }

    /// Which fault (if any) is active at sample `k`.
    fn fault_state(&self, k: usize) -> Regime {
        if self.in_window(k, self.fault2_window) {
            Regime::Fault2
        } else if self.in_window(k, self.fault1_window) {
            Regime::Fault1
        } else {
            Regime::Normal
        }
    }
}

/// Regime a sample index belongs to, judged over its whole trailing window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// No full window is available yet.
    Init,
    Normal,
    Fault1,
    Fault2,
    /// The trailing window straddles a regime switch.
    Transition,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Init => "init",
            Regime::Normal => "normal",
            Regime::Fault1 => "fault1",
            Regime::Fault2 => "fault2",
            Regime::Transition => "transition",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Distances to the nominal behavior over time. Entries for `Init` samples
/// carry no distances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistanceSeries {
    pub times: Vec<usize>,
    pub chordal: Vec<Option<f64>>,
    pub l_gap: Vec<Option<f64>>,
    pub window_rank: Vec<Option<usize>>,
    pub regime: Vec<Regime>,
}

impl DistanceSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Indices whose trailing window lies entirely inside `regime`.
    pub fn indices_in(&self, regime: Regime) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.regime[i] == regime)
    }

    /// Aggregates over windows that lie entirely inside `regime`.
    pub fn summary(&self, regime: Regime) -> Option<RegimeSummary> {
        let idx: Vec<usize> = self.indices_in(regime).collect();
        let chordal: Vec<f64> = idx.iter().filter_map(|&i| self.chordal[i]).collect();
        if chordal.is_empty() {
            return None;
        }
        let gaps: Vec<f64> = idx.iter().filter_map(|&i| self.l_gap[i]).collect();
        let ranks: Vec<usize> = idx.iter().filter_map(|&i| self.window_rank[i]).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Some(RegimeSummary {
            regime,
            windows: chordal.len(),
            mean_chordal: mean(&chordal),
            min_chordal: chordal.iter().copied().fold(f64::INFINITY, f64::min),
            max_chordal: chordal.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_l_gap: mean(&gaps),
            min_rank: ranks.iter().copied().min().unwrap_or(0),
            max_rank: ranks.iter().copied().max().unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSummary {
    pub regime: Regime,
    pub windows: usize,
    pub mean_chordal: f64,
    pub min_chordal: f64,
    pub max_chordal: f64,
    pub mean_l_gap: f64,
    pub min_rank: usize,
    pub max_rank: usize,
}

fn sine(freq_hz: f64, t: f64) -> f64 {
    (2.0 * PI * freq_hz * t).sin()
}

/// The scalar output signal with the configured fault injections.
pub fn generate_signal(cfg: &AnomalyConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let a = cfg.amplitudes;
    let values: Vec<f64> = (0..cfg.num_samples())
        .map(|k| {
            let t = cfg.time(k);
            let mut y = a.nominal * sine(cfg.nominal_freq_hz, t);
            if cfg.in_window(k, cfg.fault1_window) {
                y += a.fault1 * sine(cfg.fault1_freq_hz, t);
            }
            if cfg.in_window(k, cfg.fault2_window) {
                y += a.fault1 * sine(cfg.fault1_freq_hz, t) + a.fault2 * sine(cfg.fault2_freq_hz, t);
            }
            y
        })
        .collect();
    Trajectory::scalar(&values)
}

/// Depth-`T` behavior of a clean nominal sine spanning one full window.
pub fn nominal_behavior(cfg: &AnomalyConfig) -> Result<FiniteHorizonBehavior> {
    cfg.validate()?;
    let values: Vec<f64> = (0..cfg.window_len())
        .map(|k| cfg.amplitudes.nominal * sine(cfg.nominal_freq_hz, cfg.time(k)))
        .collect();
    behavior_from_data(&[Trajectory::scalar(&values)?], cfg.window_rows, cfg.rank_tol)
}

/// Regime of the trailing window ending at sample `k`.
pub fn window_regime(cfg: &AnomalyConfig, k: usize) -> Regime {
    let len = cfg.window_len();
    if k + 1 < len {
        return Regime::Init;
    }
    let first = cfg.fault_state(k + 1 - len);
    if (k + 1 - len..=k).all(|j| cfg.fault_state(j) == first) {
        first
    } else {
        Regime::Transition
    }
}

/// Chordal and L-gap distance from every trailing Hankel window to the
/// nominal behavior.
pub fn run_detection(cfg: &AnomalyConfig) -> Result<DistanceSeries> {
    let signal = generate_signal(cfg)?;
    let nominal = nominal_behavior(cfg)?;
    let len = cfg.window_len();
    let mut series = DistanceSeries::default();
    for k in 0..signal.len() {
        series.times.push(k);
        series.regime.push(window_regime(cfg, k));
        if k + 1 < len {
            series.chordal.push(None);
            series.l_gap.push(None);
            series.window_rank.push(None);
            continue;
        }
        let window = signal.window(k + 1 - len, len)?;
        let h = hankel(&window, cfg.window_rows)?;
        debug_assert_eq!(h.ncols(), cfg.window_cols);
        let image = orthonormal_basis(&h, cfg.rank_tol)?;
        series.chordal.push(Some(distance(MetricKind::Chordal, &image, nominal.subspace())?));
        series.l_gap.push(Some(l_gap(&image, nominal.subspace())?));
        series.window_rank.push(Some(image.dim()));
    }
    Ok(series)
}

/// Contents of the `t,y` signal CSV.
pub fn signal_csv(cfg: &AnomalyConfig, signal: &Trajectory) -> String {
    let mut out = String::from("t,y\n");
    for (k, y) in signal.values().iter().enumerate() {
        out.push_str(&format!("{},{:?}\n", cfg.time(k), y));
    }
    out
}

fn distance_csv(cfg: &AnomalyConfig, series: &DistanceSeries, values: &[Option<f64>]) -> String {
    let mut out = String::from("t,distance\n");
    for (&k, d) in series.times.iter().zip(values) {
        if let Some(d) = d {
            out.push_str(&format!("{},{:?}\n", cfg.time(k), d));
        }
    }
    out
}

/// Contents of the `t,distance` CSV for the chordal metric.
pub fn chordal_csv(cfg: &AnomalyConfig, series: &DistanceSeries) -> String {
    distance_csv(cfg, series, &series.chordal)
}

/// Contents of the `t,distance` CSV for the L-gap.
pub fn gap_csv(cfg: &AnomalyConfig, series: &DistanceSeries) -> String {
    distance_csv(cfg, series, &series.l_gap)
}

/// Every column of the series, including regime labels and window ranks.
pub fn combined_csv(cfg: &AnomalyConfig, series: &DistanceSeries) -> String {
    let mut out = String::from("t,regime,window_rank,chordal,l_gap\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for i in 0..series.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            cfg.time(series.times[i]),
            series.regime[i],
            series.window_rank[i].map(|r| r.to_string()).unwrap_or_default(),
            opt(series.chordal[i]),
            opt(series.l_gap[i]),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::complexity;

    #[test]
    fn default_config_is_valid() {
        let cfg = AnomalyConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.num_samples(), 251);
        assert_eq!(cfg.window_len(), 25);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = AnomalyConfig {
            nominal_freq_hz: 0.5,
            ..AnomalyConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg = AnomalyConfig {
            fault1_window: [50.0, 300.0],
            ..AnomalyConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg = AnomalyConfig {
            window_rows: 0,
            ..AnomalyConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg = AnomalyConfig {
            horizon_end: 10.0,
            ..AnomalyConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip_and_partial_configs() {
        let cfg = AnomalyConfig::default();
        assert_eq!(AnomalyConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial = AnomalyConfig::from_toml("window_rows = 12\nrank_tol = \"auto\"\n").unwrap();
        assert_eq!(partial.window_rows, 12);
        assert_eq!(partial.rank_tol, RankTolerance::Auto);
        assert_eq!(partial.window_cols, 16);
        assert!(AnomalyConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn signal_shape() {
        let cfg = AnomalyConfig::default();
        let y = generate_signal(&cfg).unwrap();
        assert_eq!(y.values()[0], 0.0);
        for k in 101..=149 {
            assert_eq!(y.values()[k], sine(0.2, k as f64));
        }
        let peak = y.values()[150..=200].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(peak <= 3.0 && peak > 2.0, "{peak}");
    }

    #[test]
    fn nominal_is_second_order() {
        let cfg = AnomalyConfig::default();
        let b = nominal_behavior(&cfg).unwrap();
        assert_eq!(b.dim(), 2);
        assert!((complexity(&b) - 0.2).abs() < 1e-15);
        assert_eq!(distance(MetricKind::Chordal, b.subspace(), b.subspace()).unwrap(), 0.0);
    }

    #[test]
    fn regimes_of_default_windows() {
        let cfg = AnomalyConfig::default();
        assert_eq!(window_regime(&cfg, 23), Regime::Init);
        assert_eq!(window_regime(&cfg, 24), Regime::Normal);
        assert_eq!(window_regime(&cfg, 49), Regime::Normal);
        assert_eq!(window_regime(&cfg, 50), Regime::Transition);
        assert_eq!(window_regime(&cfg, 73), Regime::Transition);
        assert_eq!(window_regime(&cfg, 74), Regime::Fault1);
        assert_eq!(window_regime(&cfg, 100), Regime::Fault1);
        assert_eq!(window_regime(&cfg, 125), Regime::Normal);
        assert_eq!(window_regime(&cfg, 174), Regime::Fault2);
        assert_eq!(window_regime(&cfg, 250), Regime::Normal);
    }
}
