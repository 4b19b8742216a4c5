//! Principal-angle distances between subspaces of possibly different dimension.
//!
//! Each [`MetricKind`] splits into a premetric over the `min(k, l)` principal
//! angles plus a penalty `α² |k − l|` for the dimension mismatch:
//!
//! ```text
//! d(V, U)² = δ(V, U)² + α² |dim V − dim U|
//! ```
//!
//! The L-gap baseline is provided for comparison; it saturates at 1 as soon as
//! the dimensions differ.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{check_same_ambient, principal_angles, PrincipalAngleSet, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Chordal,
    Grassmann,
    Procrustes,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Chordal, MetricKind::Grassmann, MetricKind::Procrustes];

    /// Penalty coefficient paid per unit of dimension mismatch.
    pub fn alpha(self) -> f64 {
        match self {
            MetricKind::Chordal | MetricKind::Procrustes => 1.0,
            MetricKind::Grassmann => FRAC_PI_2,
        }
    }

    /// Contribution of a single principal angle to `δ²`.
    fn angle_term(self, theta: f64) -> f64 {
        match self {
            MetricKind::Chordal => theta.sin().powi(2),
            MetricKind::Grassmann => theta * theta,
            MetricKind::Procrustes => 2.0 * (theta / 2.0).sin().powi(2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Chordal => "chordal",
            MetricKind::Grassmann => "grassmann",
            MetricKind::Procrustes => "procrustes",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chordal" => Ok(MetricKind::Chordal),
            "grassmann" => Ok(MetricKind::Grassmann),
            "procrustes" => Ok(MetricKind::Procrustes),
            other => Err(Error::Parse(format!("unknown metric '{other}'"))),
        }
    }
}

/// Premetric and penalty parts of a distance, with the angles they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub kind: MetricKind,
    pub angles: PrincipalAngleSet,
    pub premetric: f64,
    /// `α² |dim V − dim U|`.
    pub penalty: f64,
    pub distance: f64,
}

fn premetric_from_angles(kind: MetricKind, angles: &PrincipalAngleSet) -> f64 {
    angles.iter().map(|t| kind.angle_term(t)).sum::<f64>().sqrt()
}

/// Computes premetric, penalty and distance in one pass over the angles.
pub fn decompose(kind: MetricKind, v: &Subspace, u: &Subspace) -> Result<Decomposition> {
    let angles = principal_angles(v, u)?;
    let premetric = premetric_from_angles(kind, &angles);
    let penalty = kind.alpha().powi(2) * v.dim().abs_diff(u.dim()) as f64;
    let distance = (premetric * premetric + penalty).sqrt();
    Ok(Decomposition {
        kind,
        angles,
        premetric,
        penalty,
        distance,
    })
}

/// Angle-only part `δ(V, U)`; zero when either subspace is `{0}`.
pub fn premetric(kind: MetricKind, v: &Subspace, u: &Subspace) -> Result<f64> {
    Ok(premetric_from_angles(kind, &principal_angles(v, u)?))
}

/// `sqrt(δ² + α² |dim V − dim U|)`.
pub fn distance(kind: MetricKind, v: &Subspace, u: &Subspace) -> Result<f64> {
    Ok(decompose(kind, v, u)?.distance)
}

/// L-gap: `sin θ_max` for equal dimensions, 1 otherwise.
pub fn l_gap(v: &Subspace, u: &Subspace) -> Result<f64> {
    check_same_ambient(v, u)?;
    if v.dim() != u.dim() {
        return Ok(1.0);
    }
    let angles = principal_angles(v, u)?;
    Ok(angles.max().map_or(0.0, f64::sin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn span(rows: usize, cols: &[&[f64]]) -> Subspace {
        let data: Vec<f64> = cols.iter().flat_map(|c| c.iter().copied()).collect();
        Subspace::from_columns(&DMatrix::from_column_slice(rows, cols.len(), &data)).unwrap()
    }

    #[test]
    fn orthogonal_lines() {
        let a = span(2, &[&[1.0, 0.0]]);
        let b = span(2, &[&[0.0, 1.0]]);
        assert!((premetric(MetricKind::Chordal, &a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!((premetric(MetricKind::Grassmann, &a, &b).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((premetric(MetricKind::Procrustes, &a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(l_gap(&a, &b).unwrap(), 1.0);
        for kind in MetricKind::ALL {
            assert_eq!(premetric(kind, &a, &a).unwrap(), 0.0);
            assert_eq!(distance(kind, &a, &a).unwrap(), 0.0);
        }
        assert_eq!(l_gap(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn line_in_plane() {
        let line = span(3, &[&[1.0, 0.0, 0.0]]);
        let plane = span(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!((distance(MetricKind::Chordal, &line, &plane).unwrap() - 1.0).abs() < 1e-15);
        assert!((distance(MetricKind::Grassmann, &line, &plane).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((distance(MetricKind::Procrustes, &line, &plane).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(l_gap(&line, &plane).unwrap(), 1.0);
    }

    #[test]
    fn scaled_representatives_are_maximally_apart() {
        for eps in [1e-6, 1e-3, 1.0] {
            let a = span(2, &[&[eps, 0.0]]);
            let b = span(2, &[&[0.0, eps]]);
            assert!((distance(MetricKind::Chordal, &a, &b).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_subspace_reduces_to_penalty() {
        let z = Subspace::zero(4).unwrap();
        let f = Subspace::full(4).unwrap();
        assert_eq!(premetric(MetricKind::Grassmann, &z, &f).unwrap(), 0.0);
        assert!((distance(MetricKind::Grassmann, &z, &f).unwrap() - PI).abs() < 1e-15);
        assert_eq!(distance(MetricKind::Chordal, &z, &f).unwrap(), 2.0);
        assert_eq!(l_gap(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn mismatch_is_reported() {
        let a = Subspace::full(2).unwrap();
        let b = Subspace::full(3).unwrap();
        for kind in MetricKind::ALL {
            assert!(matches!(distance(kind, &a, &b), Err(Error::DimensionMismatch { .. })));
        }
        assert!(l_gap(&a, &b).is_err());
    }

    #[test]
    fn kind_round_trip() {
        for kind in MetricKind::ALL {
            assert_eq!(kind.name().parse::<MetricKind>().unwrap(), kind);
        }
        assert!("lgap".parse::<MetricKind>().is_err());
    }
}
