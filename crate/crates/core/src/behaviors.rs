//! Finite-horizon behaviors built from data, kernel representations and
//! state-space models.
//!
//! A length-`L` window of a `q`-variate trajectory is stacked as the vector
//! `(w_1; w_2; …; w_L)` of length `qL`, each `w_i` a contiguous block of `q`
//! entries. Hankel columns, kernel constraint rows and state-space impulse
//! responses all follow this layout.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, orthonormal_basis, RankTolerance, Subspace};

/// Coefficients with magnitude at or below this are structural zeros when
/// reading off row degrees.
pub const STRUCTURAL_ZERO: f64 = 1e-12;

/// A finite `q`-variate real sequence, stored sample-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    q: usize,
    values: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory from `len · q` sample-major values.
    pub fn new(q: usize, values: Vec<f64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("trajectory needs at least one variable".into()));
        }
        if values.is_empty() || !values.len().is_multiple_of(q) {
            return Err(Error::InvalidInput(format!(
                "{} values do not form whole samples of {q} variables",
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("trajectory contains non-finite values".into()));
        }
        Ok(Trajectory { q, values })
    }

    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::new(1, values.to_vec())
    }

    pub fn from_samples(samples: &[Vec<f64>]) -> Result<Self> {
        let q = samples.first().map_or(0, Vec::len);
        if let Some((t, s)) = samples.iter().enumerate().find(|(_, s)| s.len() != q) {
            return Err(Error::InvalidInput(format!(
                "sample {t} has {} entries, expected {q}",
                s.len()
            )));
        }
        Self::new(q, samples.concat())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.values.len() / self.q
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample(&self, t: usize) -> &[f64] {
        &self.values[t * self.q..(t + 1) * self.q]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.q)
    }

    /// All samples stacked into one vector of length `len · q`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The shifted trajectory `(σ^k w)_t = w_{t+k}`.
    pub fn shifted(&self, k: usize) -> Result<Trajectory> {
        if k >= self.len() {
            return Err(Error::InsufficientData(format!(
                "cannot shift a trajectory of length {} by {k}",
                self.len()
            )));
        }
        Trajectory::new(self.q, self.values[k * self.q..].to_vec())
    }

    /// Samples `start..start + len` as a new trajectory.
    pub fn window(&self, start: usize, len: usize) -> Result<Trajectory> {
        if len == 0 || start + len > self.len() {
            return Err(Error::InsufficientData(format!(
                "window {start}..{} outside trajectory of length {}",
                start + len,
                self.len()
            )));
        }
        Trajectory::new(self.q, self.values[start * self.q..(start + len) * self.q].to_vec())
    }
}

/// A finite-horizon behavior `B|_L ⊆ R^{qL}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHorizonBehavior {
    subspace: Subspace,
    q: usize,
    horizon: usize,
}

impl FiniteHorizonBehavior {
    pub fn new(subspace: Subspace, q: usize, horizon: usize) -> Result<Self> {
        if q == 0 || horizon == 0 {
            return Err(Error::InvalidInput("q and L must be positive".into()));
        }
        if q * horizon != subspace.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "subspace lives in R^{} but q·L = {}",
                subspace.ambient_dim(),
                q * horizon
            )));
        }
        Ok(FiniteHorizonBehavior { subspace, q, horizon })
    }

    /// The whole of `R^{qL}`.
    pub fn full(q: usize, horizon: usize) -> Result<Self> {
        Self::new(Subspace::full(q * horizon)?, q, horizon)
    }

    /// Only the zero trajectory.
    pub fn zero(q: usize, horizon: usize) -> Result<Self> {
        Self::new(Subspace::zero(q * horizon)?, q, horizon)
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn into_subspace(self) -> Subspace {
        self.subspace
    }
}

impl AsRef<Subspace> for FiniteHorizonBehavior {
    fn as_ref(&self) -> &Subspace {
        &self.subspace
    }
}

impl AsRef<Subspace> for Subspace {
    fn as_ref(&self) -> &Subspace {
        self
    }
}

/// Depth-`L` Hankel matrix, one stacked window per column.
pub fn hankel(w: &Trajectory, horizon: usize) -> Result<DMatrix<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    if w.len() < horizon {
        return Err(Error::InsufficientData(format!(
            "trajectory of length {} is shorter than horizon {horizon}",
            w.len()
        )));
    }
    let q = w.q();
    let cols = w.len() - horizon + 1;
    let rows = q * horizon;
    // Column j is the contiguous slice starting at sample j.
    Ok(DMatrix::from_fn(rows, cols, |i, j| w.values[j * q + i]))
}

/// Column space of the horizontally concatenated Hankel matrices of every
/// trajectory long enough for the horizon.
pub fn behavior_from_data(
    ws: &[Trajectory],
    horizon: usize,
    tol: RankTolerance,
) -> Result<FiniteHorizonBehavior> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    let q = ws
        .first()
        .map(Trajectory::q)
        .ok_or_else(|| Error::InsufficientData("no trajectories given".into()))?;
    if let Some(w) = ws.iter().find(|w| w.q() != q) {
        return Err(Error::InvalidInput(format!(
            "trajectories disagree on the number of variables ({} vs {q})",
            w.q()
        )));
    }
    let blocks = ws
        .iter()
        .filter(|w| w.len() >= horizon)
        .map(|w| hankel(w, horizon))
        .collect::<Result<Vec<_>>>()?;
    if blocks.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no trajectory has at least {horizon} samples"
        )));
    }
    let cols: usize = blocks.iter().map(DMatrix::ncols).sum();
    let mut mosaic = DMatrix::zeros(q * horizon, cols);
    let mut at = 0;
    for h in &blocks {
        mosaic.columns_mut(at, h.ncols()).copy_from(h);
        at += h.ncols();
    }
    FiniteHorizonBehavior::new(orthonormal_basis(&mosaic, tol)?, q, horizon)
}

/// Polynomial matrix `R(z) = R_0 + R_1 z + … + R_ℓ z^ℓ` defining `ker R(σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRep {
    coeffs: Vec<DMatrix<f64>>,
}

impl KernelRep {
    pub fn new(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("kernel representation has no coefficients".into()))?;
        let (p, q) = first.shape();
        if p == 0 || q == 0 {
            return Err(Error::InvalidInput("coefficients must be non-empty matrices".into()));
        }
        if p > q {
            return Err(Error::InvalidInput(format!("{p} rows exceed {q} variables")));
        }
        if let Some((i, c)) = coeffs.iter().enumerate().find(|(_, c)| c.shape() != (p, q)) {
            return Err(Error::InvalidInput(format!(
                "R_{i} has shape {:?}, expected {:?}",
                c.shape(),
                (p, q)
            )));
        }
        if coeffs.iter().any(|c| c.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("non-finite kernel coefficient".into()));
        }
        let lead = coeffs.last().expect("non-empty");
        if lead.amax() <= STRUCTURAL_ZERO {
            return Err(Error::InvalidInput(
                "leading coefficient is zero; the degree is not tight".into(),
            ));
        }
        Ok(KernelRep { coeffs })
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    pub fn rows(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn q(&self) -> usize {
        self.coeffs[0].ncols()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Degree of each row, ignoring structural zeros.
    pub fn row_degrees(&self) -> Result<Vec<usize>> {
        (0..self.rows())
            .map(|i| {
                self.coeffs
                    .iter()
                    .rposition(|c| c.row(i).iter().any(|x| x.abs() > STRUCTURAL_ZERO))
                    .ok_or_else(|| Error::InvalidInput(format!("row {i} of R(z) is identically zero")))
            })
            .collect()
    }
}

/// Number of inputs, lag and order of an LTI behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegerInvariants {
    pub num_inputs: usize,
    pub lag: usize,
    pub order: usize,
}

impl IntegerInvariants {
    /// `m·L + n`, the dimension of `B|_L` once `L` reaches the lag.
    pub fn restricted_dim(&self, horizon: usize) -> usize {
        self.num_inputs * horizon + self.order
    }
}

/// Reads `(m, ℓ, n)` off a kernel representation assumed minimal.
///
/// Minimality (full row rank of `R(z)` as a polynomial matrix) is trusted,
/// not verified.
pub fn integer_invariants(r: &KernelRep) -> Result<IntegerInvariants> {
    let degrees = r.row_degrees()?;
    Ok(IntegerInvariants {
        num_inputs: r.q() - r.rows(),
        lag: degrees.iter().copied().max().unwrap_or(0),
        order: degrees.iter().sum(),
    })
}

/// Block-banded matrix whose nullspace is `ker R(σ)` restricted to `L` steps.
pub fn kernel_toeplitz(r: &KernelRep, horizon: usize) -> DMatrix<f64> {
    let (p, q, ell) = (r.rows(), r.q(), r.degree());
    let block_rows = horizon.saturating_sub(ell);
    let mut t = DMatrix::zeros(p * block_rows, q * horizon);
    for i in 0..block_rows {
        for (j, c) in r.coeffs().iter().enumerate() {
            t.view_mut((i * p, (i + j) * q), (p, q)).copy_from(c);
        }
    }
    t
}

/// `ker R(σ)` restricted to `L` steps; the full space when `L ≤ ℓ`.
pub fn behavior_from_kernel(r: &KernelRep, horizon: usize) -> Result<FiniteHorizonBehavior> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    let q = r.q();
    if horizon <= r.degree() {
        return FiniteHorizonBehavior::full(q, horizon);
    }
    let t = kernel_toeplitz(r, horizon);
    let row_space = orthonormal_basis(&t.transpose(), RankTolerance::Auto)?;
    FiniteHorizonBehavior::new(row_space.orthogonal_complement(), q, horizon)
}

/// Discrete-time model `x⁺ = A x + B u`, `y = C x + D u`, with manifest
/// variables `w = (u; y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpaceModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        let p = c.nrows();
        let ok = a.ncols() == n && b.nrows() == n && c.ncols() == n && d.shape() == (p, m);
        if !ok {
            return Err(Error::InvalidInput(format!(
                "inconsistent shapes A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        if m + p == 0 {
            return Err(Error::InvalidInput("model has no manifest variables".into()));
        }
        Ok(StateSpaceModel { a, b, c, d })
    }

    /// Autonomous model `x⁺ = A x`, `y = C x`.
    pub fn autonomous(a: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let (n, p) = (a.nrows(), c.nrows());
        Self::new(a, DMatrix::zeros(n, 0), c, DMatrix::zeros(p, 0))
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn num_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn q(&self) -> usize {
        self.num_inputs() + self.num_outputs()
    }

    /// Observability index: the smallest `k` with `rank [C; CA; …; CA^{k−1}] = n`.
    /// `None` when the pair `(A, C)` is not observable.
    pub fn lag(&self) -> Option<usize> {
        let n = self.order();
        if n == 0 {
            return Some(0);
        }
        let p = self.num_outputs();
        let mut obs = DMatrix::zeros(0, n);
        let mut block = self.c.clone();
        for k in 1..=n {
            let at = obs.nrows();
            obs = obs.insert_rows(at, p, 0.0);
            obs.view_mut((at, 0), (p, n)).copy_from(&block);
            if obs.nrows() > 0 && numerical_rank(&obs, RankTolerance::Auto).ok()? == n {
                return Some(k);
            }
            block = &block * &self.a;
        }
        None
    }

    /// Simulates from `x0` with inputs given as an `m × T` matrix and
    /// returns the manifest trajectory `w_t = (u_t; y_t)`.
    pub fn simulate(&self, x0: &DVector<f64>, inputs: &DMatrix<f64>) -> Result<Trajectory> {
        if x0.len() != self.order() || inputs.nrows() != self.num_inputs() {
            return Err(Error::InvalidInput(format!(
                "initial state of size {} / inputs with {} rows do not match the model",
                x0.len(),
                inputs.nrows()
            )));
        }
        let steps = inputs.ncols();
        let (m, q) = (self.num_inputs(), self.q());
        let mut values = Vec::with_capacity(steps * q);
        let mut x = x0.clone();
        for t in 0..steps {
            let u = inputs.column(t);
            let y = &self.c * &x + &self.d * u;
            values.extend(u.iter());
            values.extend(y.iter());
            x = &self.a * &x + &self.b * u;
        }
        debug_assert_eq!(values.len(), steps * (m + self.num_outputs()));
        Trajectory::new(q, values)
    }
}

/// Span of the free responses from each canonical initial state and the
/// forced responses to an impulse in each input channel at each time step.
pub fn behavior_from_state_space(
    s: &StateSpaceModel,
    horizon: usize,
) -> Result<FiniteHorizonBehavior> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    let (n, m, q) = (s.order(), s.num_inputs(), s.q());
    let mut generators = DMatrix::zeros(q * horizon, n + m * horizon);
    let mut col = 0;
    for i in 0..n {
        let w = s.simulate(&DVector::from_fn(n, |k, _| f64::from(u8::from(k == i))), &DMatrix::zeros(m, horizon))?;
        generators.set_column(col, &DVector::from_column_slice(w.values()));
        col += 1;
    }
    for j in 0..m {
        for tau in 0..horizon {
            let mut u = DMatrix::zeros(m, horizon);
            u[(j, tau)] = 1.0;
            let w = s.simulate(&DVector::zeros(n), &u)?;
            generators.set_column(col, &DVector::from_column_slice(w.values()));
            col += 1;
        }
    }
    FiniteHorizonBehavior::new(orthonormal_basis(&generators, RankTolerance::Auto)?, q, horizon)
}

/// `dim B|_L / (qL)`.
pub fn complexity(b: &FiniteHorizonBehavior) -> f64 {
    b.dim() as f64 / (b.q() * b.horizon()) as f64
}

/// Restriction to the first `L_new` steps.
pub fn restrict(b: &FiniteHorizonBehavior, new_horizon: usize) -> Result<FiniteHorizonBehavior> {
    if new_horizon == 0 || new_horizon > b.horizon() {
        return Err(Error::InvalidInput(format!(
            "cannot restrict horizon {} to {new_horizon}",
            b.horizon()
        )));
    }
    let rows = b.q() * new_horizon;
    let truncated = b.subspace().basis().rows(0, rows).into_owned();
    FiniteHorizonBehavior::new(orthonormal_basis(&truncated, RankTolerance::Auto)?, b.q(), new_horizon)
}

/// Zero-pads basis vectors to live in `R^{n_target}`.
pub fn embed_zero_pad(b: impl AsRef<Subspace>, n_target: usize) -> Result<Subspace> {
    b.as_ref().zero_pad(n_target)
}
