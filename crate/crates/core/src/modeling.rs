//! Most powerful unfalsified model, misfit and utility.
//!
//! At a fixed horizon `L` the MPUM of a dataset is the column space of its
//! mosaic Hankel matrix. The utility of a model is minus its squared distance
//! to that subspace, so ranking models by utility is the same as ranking them
//! by distance to the MPUM.

use nalgebra::{DMatrix, DVector};

use crate::behaviors::{behavior_from_data, complexity, FiniteHorizonBehavior, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{principal_angles, RankTolerance};
use crate::metrics::{decompose, premetric, MetricKind};

/// Largest principal angle (radians) tolerated when testing containment.
pub const CONTAINMENT_TOL: f64 = 1e-8;
/// Values within this of each other are treated as ties when ranking candidates.
pub const TIE_TOL: f64 = 1e-12;
/// Distances at or below this count as zero for the projector-equality check.
pub const ZERO_DISTANCE_TOL: f64 = 1e-9;
/// Maximum projector entry difference accepted as equality.
pub const PROJECTOR_TOL: f64 = 1e-7;

/// A non-empty set of trajectories sharing the number of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    trajectories: Vec<Trajectory>,
}

impl Dataset {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let q = trajectories
            .first()
            .map(Trajectory::q)
            .ok_or_else(|| Error::InvalidInput("dataset is empty".into()))?;
        if trajectories.iter().any(|w| w.q() != q) {
            return Err(Error::InvalidInput("trajectories disagree on the number of variables".into()));
        }
        Ok(Dataset { trajectories })
    }

    pub fn q(&self) -> usize {
        self.trajectories[0].q()
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }
}

impl From<Trajectory> for Dataset {
    fn from(w: Trajectory) -> Self {
        Dataset { trajectories: vec![w] }
    }
}

/// The MPUM of `data` restricted to `L` steps.
pub fn mpum_restricted(
    data: &Dataset,
    horizon: usize,
    tol: RankTolerance,
) -> Result<FiniteHorizonBehavior> {
    behavior_from_data(&data.trajectories, horizon, tol)
}

fn check_compatible(data: &Dataset, b: &FiniteHorizonBehavior, horizon: usize) -> Result<()> {
    if b.horizon() != horizon {
        return Err(Error::InvalidInput(format!(
            "behavior has horizon {}, expected {horizon}",
            b.horizon()
        )));
    }
    if b.q() != data.q() {
        return Err(Error::InvalidInput(format!(
            "behavior has {} variables, data has {}",
            b.q(),
            data.q()
        )));
    }
    Ok(())
}

/// Squared premetric between a (precomputed) MPUM and a model.
pub fn misfit_against(mpum: &FiniteHorizonBehavior, b: &FiniteHorizonBehavior, kind: MetricKind) -> Result<f64> {
    Ok(premetric(kind, mpum.subspace(), b.subspace())?.powi(2))
}

/// `−δ² − α² qL |c_L(mpum) − c_L(B)|` against a precomputed MPUM.
pub fn utility_against(mpum: &FiniteHorizonBehavior, b: &FiniteHorizonBehavior, kind: MetricKind) -> Result<f64> {
    let misfit = misfit_against(mpum, b, kind)?;
    let ql = (b.q() * b.horizon()) as f64;
    let complexity_gap = (complexity(mpum) - complexity(b)).abs();
    Ok(0.0 - misfit - kind.alpha().powi(2) * ql * complexity_gap)
}

/// Squared premetric between the data's MPUM and `b`, both at horizon `L`.
/// The default rank tolerance is used for the MPUM.
pub fn misfit(data: &Dataset, b: &FiniteHorizonBehavior, kind: MetricKind, horizon: usize) -> Result<f64> {
    check_compatible(data, b, horizon)?;
    let mpum = mpum_restricted(data, horizon, RankTolerance::Auto)?;
    misfit_against(&mpum, b, kind)
}

/// Utility of `b` for `data`: minus misfit minus the weighted complexity gap.
pub fn utility(data: &Dataset, b: &FiniteHorizonBehavior, kind: MetricKind, horizon: usize) -> Result<f64> {
    check_compatible(data, b, horizon)?;
    let mpum = mpum_restricted(data, horizon, RankTolerance::Auto)?;
    utility_against(&mpum, b, kind)
}

/// Largest principal angle between `inner` and `outer` when `inner ⊆ outer`
/// is plausible; `None` when `inner` has more dimensions than `outer`.
pub fn containment_angle(inner: &FiniteHorizonBehavior, outer: &FiniteHorizonBehavior) -> Result<Option<f64>> {
    if inner.dim() > outer.dim() {
        return Ok(None);
    }
    let angles = principal_angles(inner.subspace(), outer.subspace())?;
    Ok(Some(angles.max().unwrap_or(0.0)))
}

/// Whether the data's MPUM is contained in `candidate` at this horizon.
pub fn is_unfalsified(mpum: &FiniteHorizonBehavior, candidate: &FiniteHorizonBehavior) -> Result<bool> {
    Ok(containment_angle(mpum, candidate)?.is_some_and(|a| a <= CONTAINMENT_TOL))
}

/// Per-candidate line of an optimality report.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEvaluation {
    pub index: usize,
    pub dim: usize,
    pub distance_sq: f64,
    pub utility: f64,
    /// Attains the maximum utility over the list.
    pub optimal: bool,
    /// Max-entry difference between this candidate's projector and the MPUM's.
    pub projector_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpumReport {
    pub kind: MetricKind,
    pub horizon: usize,
    pub mpum_dim: usize,
    pub candidates: Vec<CandidateEvaluation>,
    /// Utility of the MPUM is at least that of every candidate.
    pub mpum_dominates: bool,
    /// The utility maximizers and the squared-distance minimizers coincide.
    pub argmax_matches_argmin: bool,
    /// Every zero-distance candidate has the MPUM's projector.
    pub zero_distance_is_mpum: bool,
}

impl MpumReport {
    pub fn all_hold(&self) -> bool {
        self.mpum_dominates && self.argmax_matches_argmin && self.zero_distance_is_mpum
    }

    pub fn optimal_indices(&self) -> Vec<usize> {
        self.candidates.iter().filter(|c| c.optimal).map(|c| c.index).collect()
    }

    /// `index,dim,distance_sq,utility,optimal` with full-precision floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,dim,distance_sq,utility,optimal\n");
        for c in &self.candidates {
            out.push_str(&format!(
                "{},{},{:?},{:?},{}\n",
                c.index, c.dim, c.distance_sq, c.utility, c.optimal
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "MPUM at horizon {} has dimension {} ({} metric)\n",
            self.horizon, self.mpum_dim, self.kind
        );
        out.push_str("  idx   dim        distance^2           utility  optimal\n");
        for c in &self.candidates {
            out.push_str(&format!(
                "{:>5} {:>5} {:>17.11e} {:>17.11e}  {}\n",
                c.index,
                c.dim,
                c.distance_sq,
                c.utility,
                if c.optimal { "yes" } else { "no" }
            ));
        }
        out.push_str(&format!(
            "MPUM dominates: {}; argmax utility = argmin distance: {}; zero distance implies MPUM: {}\n",
            self.mpum_dominates, self.argmax_matches_argmin, self.zero_distance_is_mpum
        ));
        out
    }
}

fn extremal_set(values: &[f64], better: impl Fn(f64, f64) -> bool) -> Vec<usize> {
    let Some(best) = values.iter().copied().reduce(|a, b| if better(b, a) { b } else { a }) else {
        return Vec::new();
    };
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - best).abs() <= TIE_TOL)
        .map(|(i, _)| i)
        .collect()
}

/// Checks that the MPUM is the best unfalsified model among `candidates`.
///
/// Every candidate must contain the MPUM at horizon `L`; the first one that
/// does not is reported as [`Error::Falsified`].
pub fn verify_mpum_optimality(
    data: &Dataset,
    candidates: &[FiniteHorizonBehavior],
    kind: MetricKind,
    horizon: usize,
    tol: RankTolerance,
) -> Result<MpumReport> {
    let mpum = mpum_restricted(data, horizon, tol)?;
    for (index, b) in candidates.iter().enumerate() {
        check_compatible(data, b, horizon)?;
        match containment_angle(&mpum, b)? {
            Some(angle) if angle <= CONTAINMENT_TOL => {}
            Some(angle) => return Err(Error::Falsified { index, max_angle: angle }),
            None => {
                return Err(Error::Falsified {
                    index,
                    max_angle: std::f64::consts::FRAC_PI_2,
                })
            }
        }
    }

    let mpum_projector = mpum.subspace().projector();
    let mut evaluations = Vec::with_capacity(candidates.len());
    for (index, b) in candidates.iter().enumerate() {
        let d = decompose(kind, mpum.subspace(), b.subspace())?;
        evaluations.push(CandidateEvaluation {
            index,
            dim: b.dim(),
            distance_sq: d.distance * d.distance,
            utility: utility_against(&mpum, b, kind)?,
            optimal: false,
            projector_gap: (b.subspace().projector() - &mpum_projector).amax(),
        });
    }

    let utilities: Vec<f64> = evaluations.iter().map(|c| c.utility).collect();
    let distances: Vec<f64> = evaluations.iter().map(|c| c.distance_sq).collect();
    let argmax = extremal_set(&utilities, |a, b| a > b);
    let argmin = extremal_set(&distances, |a, b| a < b);
    for &i in &argmax {
        evaluations[i].optimal = true;
    }

    let mpum_utility = utility_against(&mpum, &mpum, kind)?;
    let mpum_dominates = utilities.iter().all(|&u| mpum_utility + TIE_TOL >= u);
    let zero_distance_is_mpum = evaluations
        .iter()
        .filter(|c| c.distance_sq.sqrt() <= ZERO_DISTANCE_TOL)
        .all(|c| c.projector_gap <= PROJECTOR_TOL);

    Ok(MpumReport {
        kind,
        horizon,
        mpum_dim: mpum.dim(),
        candidates: evaluations,
        mpum_dominates,
        argmax_matches_argmin: argmax == argmin,
        zero_distance_is_mpum,
    })
}

/// Euclidean distance from a length-`L` trajectory to the behavior.
pub fn projection_misfit(w: &Trajectory, b: &FiniteHorizonBehavior) -> Result<f64> {
    if w.q() != b.q() || w.len() != b.horizon() {
        return Err(Error::InvalidInput(format!(
            "trajectory is {}x{} but the behavior expects {}x{}",
            w.len(),
            w.q(),
            b.horizon(),
            b.q()
        )));
    }
    let x = DVector::from_column_slice(w.values());
    let basis: &DMatrix<f64> = b.subspace().basis();
    let residual = &x - basis * (basis.transpose() * &x);
    Ok(residual.norm())
}
