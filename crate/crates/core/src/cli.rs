//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 precondition
//! violation (a falsified candidate model).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::anomaly::{self, AnomalyConfig, Regime};
use crate::behaviors::{
    behavior_from_data, behavior_from_kernel, integer_invariants, FiniteHorizonBehavior, Trajectory,
};
use crate::error::Error;
use crate::io::{read_kernel, read_trajectory_csv, write_atomic};
use crate::linalg::{principal_angles, RankTolerance, Subspace};
use crate::metrics::{decompose, l_gap, MetricKind};
use crate::modeling::{containment_angle, verify_mpum_optimality, Dataset, CONTAINMENT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

pub const SIGNAL_CSV: &str = "output_signal.csv";
pub const CHORDAL_CSV: &str = "distance_chordal.csv";
pub const GAP_CSV: &str = "distance_gap.csv";
pub const COMBINED_CSV: &str = "distance_series.csv";

#[derive(Debug, Parser)]
#[command(name = "behavior-metrics", version, about = "Distances between finite-horizon linear behaviors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Chordal,
    Grassmann,
    Procrustes,
    Lgap,
}

impl MetricArg {
    fn kind(self) -> Option<MetricKind> {
        match self {
            MetricArg::Chordal => Some(MetricKind::Chordal),
            MetricArg::Grassmann => Some(MetricKind::Grassmann),
            MetricArg::Procrustes => Some(MetricKind::Procrustes),
            MetricArg::Lgap => None,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between the behaviors of two trajectory files.
    Distance {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, short = 'L')]
        horizon: usize,
        #[arg(long, value_enum, default_value = "chordal")]
        metric: MetricArg,
        /// Relative rank tolerance or "auto".
        #[arg(long, default_value = "auto")]
        tol: RankTolerance,
    },
    /// Principal angles between the behaviors of two trajectory files.
    Angles {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, short = 'L')]
        horizon: usize,
        #[arg(long, default_value = "auto")]
        tol: RankTolerance,
    },
    /// Integer invariants of a kernel representation and dim B|_L over a sweep of L.
    Invariants {
        kernel_file: PathBuf,
        /// Largest horizon in the sweep (default: lag + 5).
        #[arg(long)]
        max_horizon: Option<usize>,
    },
    /// Checks that the MPUM of the data is optimal among candidate models.
    Mpum {
        #[arg(required = true)]
        data_files: Vec<PathBuf>,
        #[arg(long, short = 'L')]
        horizon: usize,
        /// Directory of candidate models (*.csv trajectories, *.kernel kernel files).
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, value_enum, default_value = "chordal")]
        metric: MetricArg,
        #[arg(long, default_value = "auto")]
        tol: RankTolerance,
        /// Where to write the CSV report.
        #[arg(long, default_value = "mpum_report.csv")]
        report: PathBuf,
    },
    /// Runs the sliding-window anomaly experiment and writes plot-ready CSVs.
    Anomaly {
        /// TOML config; defaults are used for missing keys or when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write a combined CSV with regime labels and window ranks.
        #[arg(long)]
        combined: bool,
    },
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Falsified { .. } => EXIT_PRECONDITION,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// `%.{digits}g`-style formatting.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').expect("exponent");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{e}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn g12(x: f64) -> String {
    fmt_sig(x, 12)
}

/// Parses arguments and runs one subcommand, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Distance {
            file_a,
            file_b,
            horizon,
            metric,
            tol,
        } => cmd_distance(&file_a, &file_b, horizon, metric, tol, out, err),
        Command::Angles {
            file_a,
            file_b,
            horizon,
            tol,
        } => cmd_angles(&file_a, &file_b, horizon, tol, out, err),
        Command::Invariants {
            kernel_file,
            max_horizon,
        } => cmd_invariants(&kernel_file, max_horizon, out),
        Command::Mpum {
            data_files,
            horizon,
            candidates,
            metric,
            tol,
            report,
        } => cmd_mpum(&data_files, horizon, &candidates, metric, tol, &report, out, err),
        Command::Anomaly {
            config,
            out_dir,
            combined,
        } => cmd_anomaly(config.as_deref(), &out_dir, combined, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Behavior of a trajectory file, warning when the data may under-span it.
fn load_behavior(
    path: &Path,
    horizon: usize,
    tol: RankTolerance,
    err: &mut dyn Write,
) -> std::result::Result<FiniteHorizonBehavior, Failure> {
    if horizon == 0 {
        return Err(usage("--horizon must be positive"));
    }
    let w = read_trajectory_csv(path)?;
    let b = behavior_from_data(std::slice::from_ref(&w), horizon, tol)
        .map_err(|e| Error::InsufficientData(format!("{}: {e}", path.display())))?;
    warn_if_underspanned(path, &[w], &b, err);
    Ok(b)
}

fn warn_if_underspanned(path: &Path, ws: &[Trajectory], b: &FiniteHorizonBehavior, err: &mut dyn Write) {
    let columns: usize = ws
        .iter()
        .filter(|w| w.len() >= b.horizon())
        .map(|w| w.len() - b.horizon() + 1)
        .sum();
    if b.dim() > 0 && b.dim() == columns && b.dim() < b.q() * b.horizon() {
        let _ = writeln!(
            err,
            "warning: {}: dimension {} equals the number of Hankel columns; the data may not span the behavior",
            path.display(),
            b.dim()
        );
    }
}

/// Brings both subspaces into the larger ambient space.
fn common_ambient(a: Subspace, b: Subspace, err: &mut dyn Write) -> std::result::Result<(Subspace, Subspace), Failure> {
    let n = a.ambient_dim().max(b.ambient_dim());
    let pad = |s: Subspace, name: &str, err: &mut dyn Write| -> std::result::Result<Subspace, Failure> {
        if s.ambient_dim() == n {
            return Ok(s);
        }
        let _ = writeln!(
            err,
            "notice: embedding behavior {name} from R^{} into R^{n} by zero padding",
            s.ambient_dim()
        );
        Ok(s.zero_pad(n)?)
    };
    Ok((pad(a, "A", err)?, pad(b, "B", err)?))
}

fn cmd_distance(
    file_a: &Path,
    file_b: &Path,
    horizon: usize,
    metric: MetricArg,
    tol: RankTolerance,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let a = load_behavior(file_a, horizon, tol, err)?;
    let b = load_behavior(file_b, horizon, tol, err)?;
    writeln!(out, "dim A: {} (q = {}, L = {})", a.dim(), a.q(), a.horizon())?;
    writeln!(out, "dim B: {} (q = {}, L = {})", b.dim(), b.q(), b.horizon())?;
    let (va, vb) = common_ambient(a.into_subspace(), b.into_subspace(), err)?;
    match metric.kind() {
        Some(kind) => {
            let d = decompose(kind, &va, &vb)?;
            writeln!(out, "metric: {kind}")?;
            writeln!(out, "distance: {}", g12(d.distance))?;
            writeln!(out, "premetric: {}", g12(d.premetric))?;
            writeln!(out, "dimension penalty: {}", g12(d.penalty))?;
            write_angles(out, d.angles.angles())?;
        }
        None => {
            let gap = l_gap(&va, &vb)?;
            let angles = principal_angles(&va, &vb)?;
            writeln!(out, "metric: lgap")?;
            writeln!(out, "distance: {}", g12(gap))?;
            write_angles(out, angles.angles())?;
        }
    }
    Ok(())
}

fn write_angles(out: &mut dyn Write, angles: &[f64]) -> std::io::Result<()> {
    let formatted: Vec<String> = angles.iter().map(|&a| g12(a)).collect();
    writeln!(out, "principal angles: [{}]", formatted.join(", "))
}

fn cmd_angles(
    file_a: &Path,
    file_b: &Path,
    horizon: usize,
    tol: RankTolerance,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let a = load_behavior(file_a, horizon, tol, err)?;
    let b = load_behavior(file_b, horizon, tol, err)?;
    let (va, vb) = common_ambient(a.into_subspace(), b.into_subspace(), err)?;
    for theta in principal_angles(&va, &vb)?.iter() {
        writeln!(out, "{}", g12(theta))?;
    }
    Ok(())
}

fn cmd_invariants(kernel_file: &Path, max_horizon: Option<usize>, out: &mut dyn Write) -> CmdResult {
    let r = read_kernel(kernel_file)?;
    let inv = integer_invariants(&r)?;
    writeln!(
        out,
        "m = {}, lag = {}, order = {}",
        inv.num_inputs, inv.lag, inv.order
    )?;
    let max_horizon = max_horizon.unwrap_or(inv.lag + 5).max(1);
    writeln!(out, "{:>5} {:>7} {:>7}  formula", "L", "dim", "mL+n")?;
    for horizon in 1..=max_horizon {
        let b = behavior_from_kernel(&r, horizon)?;
        let active = horizon >= inv.lag;
        writeln!(
            out,
            "{:>5} {:>7} {:>7}  {}",
            horizon,
            b.dim(),
            inv.restricted_dim(horizon),
            if active { "active" } else { "inactive (L < lag)" }
        )?;
    }
    Ok(())
}

fn load_candidate(
    path: &Path,
    horizon: usize,
    tol: RankTolerance,
) -> std::result::Result<FiniteHorizonBehavior, Failure> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => {
            let w = read_trajectory_csv(path)?;
            Ok(behavior_from_data(&[w], horizon, tol)
                .map_err(|e| Error::InsufficientData(format!("{}: {e}", path.display())))?)
        }
        _ => Ok(behavior_from_kernel(&read_kernel(path)?, horizon)?),
    }
}

fn candidate_files(dir: &Path) -> std::result::Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str());
        if path.is_file() && matches!(ext, Some("csv" | "kernel" | "ker")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!("no candidate models (*.csv, *.kernel) in {}", dir.display())).into());
    }
    Ok(files)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mpum(
    data_files: &[PathBuf],
    horizon: usize,
    candidates_dir: &Path,
    metric: MetricArg,
    tol: RankTolerance,
    report_path: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let kind = metric
        .kind()
        .ok_or_else(|| usage("the L-gap has no utility function; use chordal, grassmann or procrustes"))?;
    if horizon == 0 {
        return Err(usage("--horizon must be positive"));
    }
    let trajectories = data_files
        .iter()
        .map(|p| read_trajectory_csv(p))
        .collect::<crate::Result<Vec<_>>>()?;
    let data = Dataset::new(trajectories)?;
    let files = candidate_files(candidates_dir)?;
    let candidates = files
        .iter()
        .map(|p| load_candidate(p, horizon, tol))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let mpum = crate::modeling::mpum_restricted(&data, horizon, tol)?;
    let mut falsified = Vec::new();
    for (i, (path, b)) in files.iter().zip(&candidates).enumerate() {
        if b.q() != data.q() {
            return Err(Error::InvalidInput(format!(
                "{}: candidate has {} variables, data has {}",
                path.display(),
                b.q(),
                data.q()
            ))
            .into());
        }
        match containment_angle(&mpum, b)? {
            Some(angle) if angle <= CONTAINMENT_TOL => {}
            Some(angle) => falsified.push((i, path, format!("largest containment angle {}", g12(angle)))),
            None => falsified.push((
                i,
                path,
                format!("dimension {} is below the MPUM dimension {}", b.dim(), mpum.dim()),
            )),
        }
    }
    if !falsified.is_empty() {
        for (i, path, why) in &falsified {
            writeln!(out, "falsified candidate {i} ({}): {why}", path.display())?;
        }
        return Err(Failure {
            code: EXIT_PRECONDITION,
            message: format!("{} candidate(s) are falsified by the data", falsified.len()),
        });
    }

    let report = verify_mpum_optimality(&data, &candidates, kind, horizon, tol)?;
    for (c, path) in report.candidates.iter().zip(&files) {
        writeln!(out, "candidate {}: {}", c.index, path.display())?;
    }
    write!(out, "{}", report.to_text())?;
    write_atomic(report_path, &report.to_csv())?;
    writeln!(out, "report written to {}", report_path.display())?;
    if !report.all_hold() {
        let _ = writeln!(err, "warning: MPUM optimality checks did not all hold");
    }
    Ok(())
}

fn cmd_anomaly(config: Option<&Path>, out_dir: &Path, combined: bool, out: &mut dyn Write) -> CmdResult {
    let cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            AnomalyConfig::from_toml(&text)?
        }
        None => AnomalyConfig::default(),
    };
    cfg.validate()?;
    let signal = anomaly::generate_signal(&cfg)?;
    let series = anomaly::run_detection(&cfg)?;
    std::fs::create_dir_all(out_dir)?;
    write_atomic(&out_dir.join(SIGNAL_CSV), &anomaly::signal_csv(&cfg, &signal))?;
    write_atomic(&out_dir.join(CHORDAL_CSV), &anomaly::chordal_csv(&cfg, &series))?;
    write_atomic(&out_dir.join(GAP_CSV), &anomaly::gap_csv(&cfg, &series))?;
    let mut written = vec![SIGNAL_CSV, CHORDAL_CSV, GAP_CSV];
    if combined {
        write_atomic(&out_dir.join(COMBINED_CSV), &anomaly::combined_csv(&cfg, &series))?;
        written.push(COMBINED_CSV);
    }
    writeln!(out, "wrote {} to {}", written.join(", "), out_dir.display())?;
    for regime in [Regime::Normal, Regime::Fault1, Regime::Fault2] {
        match series.summary(regime) {
            Some(s) => writeln!(
                out,
                "steady {:<7} windows {:>3}  chordal mean {}  l_gap mean {}  rank {}..{}",
                regime.label(),
                s.windows,
                g12(s.mean_chordal),
                g12(s.mean_l_gap),
                s.min_rank,
                s.max_rank
            )?,
            None => writeln!(out, "steady {:<7} no full window", regime.label())?,
        }
    }
    Ok(())
}
