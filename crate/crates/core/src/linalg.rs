//! Orthonormal bases, numerical rank, principal angles and projectors.
//!
//! Everything here works on dense `nalgebra` matrices; singular value
//! decompositions are delegated to `faer`. A [`Subspace`] always
//! carries an orthonormal basis, so downstream code never has to worry about
//! the conditioning of the representative it was built from.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Maximum deviation of `basisᵀ·basis` from the identity accepted for a basis.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Threshold used to decide which singular values count towards the rank.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankTolerance {
    /// `max(rows, cols) · ε · σ_max`.
    #[default]
    Auto,
    /// `tol · σ_max` for a non-negative relative `tol`.
    Relative(f64),
}

impl RankTolerance {
    /// Absolute cutoff for a `rows × cols` matrix with largest singular value `sigma_max`.
    pub fn absolute(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        match *self {
            RankTolerance::Auto => rows.max(cols) as f64 * f64::EPSILON * sigma_max,
            RankTolerance::Relative(tol) => tol * sigma_max,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            RankTolerance::Relative(tol) if !(tol.is_finite() && tol >= 0.0) => Err(
                Error::InvalidInput(format!("rank tolerance must be finite and non-negative, got {tol}")),
            ),
            _ => Ok(()),
        }
    }
}

impl FromStr for RankTolerance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(RankTolerance::Auto);
        }
        let tol: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("rank tolerance must be 'auto' or a number, got '{s}'")))?;
        let tol = RankTolerance::Relative(tol);
        tol.validate()?;
        Ok(tol)
    }
}

impl fmt::Display for RankTolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankTolerance::Auto => f.write_str("auto"),
            RankTolerance::Relative(t) => write!(f, "{t}"),
        }
    }
}

impl Serialize for RankTolerance {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            RankTolerance::Auto => serializer.serialize_str("auto"),
            RankTolerance::Relative(t) => serializer.serialize_f64(t),
        }
    }
}

impl<'de> Deserialize<'de> for RankTolerance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        let tol = match Raw::deserialize(deserializer)? {
            Raw::Number(t) => RankTolerance::Relative(t),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom)?,
        };
        tol.validate().map_err(serde::de::Error::custom)?;
        Ok(tol)
    }
}

/// Singular values in descending order, with the matching left singular vectors
/// when requested.
struct SortedSvd {
    values: Vec<f64>,
    left: Option<DMatrix<f64>>,
}

fn sorted_svd(m: &DMatrix<f64>, with_left: bool) -> Result<SortedSvd> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(SortedSvd {
            values: Vec::new(),
            left: with_left.then(|| DMatrix::zeros(rows, 0)),
        });
    }
    let a = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let failed = |_| Error::InvalidInput("singular value decomposition did not converge".into());
    let (mut values, mut left) = if with_left {
        let svd = a.thin_svd().map_err(failed)?;
        let values: Vec<f64> = svd.S().column_vector().iter().copied().collect();
        let u = svd.U();
        let left = DMatrix::from_fn(rows, values.len(), |i, j| u[(i, j)]);
        (values, Some(left))
    } else {
        (a.singular_values().map_err(failed)?, None)
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
    if order.iter().enumerate().any(|(i, &j)| i != j) {
        values = order.iter().map(|&i| values[i]).collect();
        left = left.map(|u| u.select_columns(order.iter()));
    }
    Ok(SortedSvd { values, left })
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix contains non-finite entries".into()))
    }
}

fn rank_of(values: &[f64], rows: usize, cols: usize, tol: RankTolerance) -> usize {
    let sigma_max = values.first().copied().unwrap_or(0.0);
    let cutoff = tol.absolute(rows, cols, sigma_max);
    values.iter().take_while(|&&s| s > cutoff).count()
}

/// Number of singular values of `m` above the cutoff defined by `tol`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: RankTolerance) -> Result<usize> {
    if m.nrows() == 0 {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    tol.validate()?;
    check_finite(m)?;
    let svd = sorted_svd(m, false)?;
    Ok(rank_of(&svd.values, m.nrows(), m.ncols(), tol))
}

/// Orthonormal basis for the numerical column space of `m`.
pub fn orthonormal_basis(m: &DMatrix<f64>, tol: RankTolerance) -> Result<Subspace> {
    if m.nrows() == 0 {
        return Err(Error::InvalidInput("matrix has no rows".into()));
    }
    tol.validate()?;
    check_finite(m)?;
    let svd = sorted_svd(m, true)?;
    let rank = rank_of(&svd.values, m.nrows(), m.ncols(), tol);
    let left = svd.left.expect("left singular vectors requested");
    Ok(Subspace {
        basis: left.columns(0, rank).into_owned(),
    })
}

/// A linear subspace of `R^N` stored through an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() == 0 {
            return Err(Error::InvalidInput("ambient dimension must be positive".into()));
        }
        check_finite(&basis)?;
        let k = basis.ncols();
        let gram = basis.transpose() * &basis;
        let deviation = (gram - DMatrix::<f64>::identity(k, k)).amax();
        if deviation > ORTHONORMALITY_TOL {
            return Err(Error::InvalidInput(format!(
                "basis is not orthonormal (deviation {deviation:.3e})"
            )));
        }
        Ok(Subspace { basis })
    }

    /// Column space of `m` with the default rank tolerance.
    pub fn from_columns(m: &DMatrix<f64>) -> Result<Self> {
        orthonormal_basis(m, RankTolerance::Auto)
    }

    /// The zero subspace of `R^n`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::from_orthonormal(DMatrix::zeros(n, 0))
    }

    /// All of `R^n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::from_orthonormal(DMatrix::identity(n, n))
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        projector(self)
    }

    /// Image of the subspace under an invertible `n × n` map.
    pub fn transform(&self, map: &DMatrix<f64>) -> Result<Subspace> {
        if map.nrows() != map.ncols() || map.ncols() != self.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "map of shape {}x{} cannot act on R^{}",
                map.nrows(),
                map.ncols(),
                self.ambient_dim()
            )));
        }
        orthonormal_basis(&(map * &self.basis), RankTolerance::Auto)
    }

    /// Orthogonal complement in the same ambient space.
    pub fn orthogonal_complement(&self) -> Subspace {
        let n = self.ambient_dim();
        if n == 0 {
            return self.clone();
        }
        let residual = DMatrix::<f64>::identity(n, n) - self.projector();
        // Eigenvalues of I - P are 0 or 1; the cutoff is absolute so that
        // rounding dust is never mistaken for a direction when P = I.
        let eig = SymmetricEigen::new(residual);
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        Subspace {
            basis: eig.eigenvectors.select_columns(keep.iter()),
        }
    }

    /// Coordinates padded with trailing zeros up to `n_target`.
    pub fn zero_pad(&self, n_target: usize) -> Result<Subspace> {
        let n = self.ambient_dim();
        if n_target < n {
            return Err(Error::InvalidInput(format!(
                "cannot embed R^{n} into smaller R^{n_target}"
            )));
        }
        let mut basis = DMatrix::zeros(n_target, self.dim());
        basis.view_mut((0, 0), (n, self.dim())).copy_from(&self.basis);
        Ok(Subspace { basis })
    }
}

/// Orthogonal projector `basis · basisᵀ`.
pub fn projector(v: &Subspace) -> DMatrix<f64> {
    &v.basis * v.basis.transpose()
}

/// Principal angles in radians, ascending, all in `[0, π/2]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrincipalAngleSet(Vec<f64>);

impl PrincipalAngleSet {
    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest angle, or `None` for an empty set.
    pub fn max(&self) -> Option<f64> {
        self.0.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }
}

pub(crate) fn check_same_ambient(v: &Subspace, u: &Subspace) -> Result<()> {
    if v.ambient_dim() != u.ambient_dim() {
        return Err(Error::DimensionMismatch {
            left: v.ambient_dim(),
            right: u.ambient_dim(),
        });
    }
    Ok(())
}

/// Principal angles between two subspaces of the same ambient space.
///
/// Cosines come from the singular values of `Vᵀ U`. Angles whose cosine
/// exceeds `1/√2` are recomputed from the singular values of the residual
/// `U − V (Vᵀ U)`, which resolves small angles to full precision. A zero
/// subspace on either side gives an empty set.
pub fn principal_angles(v: &Subspace, u: &Subspace) -> Result<PrincipalAngleSet> {
    check_same_ambient(v, u)?;
    if v.dim() == 0 || u.dim() == 0 {
        return Ok(PrincipalAngleSet::default());
    }
    if v.basis == u.basis {
        return Ok(PrincipalAngleSet(vec![0.0; v.dim()]));
    }
    // Project the smaller basis onto the larger so the residual has exactly
    // min(k, l) columns.
    let (large, small) = if v.dim() >= u.dim() { (v, u) } else { (u, v) };
    let cross = large.basis.transpose() * &small.basis;
    let cosines = sorted_svd(&cross, false)?.values;
    let r = small.dim();
    debug_assert_eq!(cosines.len(), r);

    let needs_sines = cosines.iter().any(|&c| c > std::f64::consts::FRAC_1_SQRT_2);
    let sines = if needs_sines {
        let residual = &small.basis - &large.basis * &cross;
        let mut s = sorted_svd(&residual, false)?.values;
        s.reverse();
        s
    } else {
        Vec::new()
    };

    let angles = cosines
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if c > std::f64::consts::FRAC_1_SQRT_2 {
                sines[i].clamp(0.0, 1.0).asin()
            } else {
                c.clamp(0.0, 1.0).acos()
            }
        })
        .collect::<Vec<_>>();
    let mut angles = angles;
    // The two branches meet at π/4; re-sort to absorb rounding at the seam.
    angles.sort_by(f64::total_cmp);
    Ok(PrincipalAngleSet(angles))
}
