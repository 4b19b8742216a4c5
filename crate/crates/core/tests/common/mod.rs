//! Test-only oracles and random generators.
//!
//! The oracles avoid the production SVD path: singular values come from a
//! hand-written one-sided Jacobi iteration, nullspaces from Gaussian
//! elimination, and principal-angle sines from the symmetric eigenvalues of a
//! projector difference.

#![allow(dead_code)]

use behavior_metrics::behaviors::{FiniteHorizonBehavior, StateSpaceModel};
use behavior_metrics::linalg::Subspace;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::prelude::*;
pub use rand::Rng as _;
use rand_chacha::ChaCha8Rng;

pub fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(behavior_metrics::seed_from_env(0x5eed_0000) ^ salt)
}

/// Singular values (descending) by one-sided Jacobi rotations.
pub fn jacobi_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut a: Vec<Vec<f64>> = if m.nrows() >= m.ncols() {
        (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
    } else {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    };
    let n = a.len();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|x| x * x).sum();
                let beta: f64 = a[q].iter().map(|x| x * x).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-300 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..a[p].len() {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = c * x - s * y;
                    a[q][k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = a.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Rank by Jacobi singular values with cutoff `rel · σ_max`.
pub fn oracle_rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let s = jacobi_singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rel * smax).count()
}

/// Basis of the nullspace by Gaussian elimination with partial pivoting.
pub fn gauss_nullspace(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        a.swap_rows(r, best);
        let pv = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= pv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                for j in 0..cols {
                    a[(i, j)] -= f * a[(r, j)];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = DVector::zeros(cols);
            v[free] = 1.0;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[(i, free)];
            }
            v
        })
        .collect()
}

/// Sines of the principal angles between equal-dimensional subspaces,
/// descending, from the eigenvalues of `P_V − P_U`.
pub fn projector_difference_sines(v: &Subspace, u: &Subspace) -> Vec<f64> {
    assert_eq!(v.dim(), u.dim());
    let diff = v.projector() - u.projector();
    let mut ev: Vec<f64> = SymmetricEigen::new(diff).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.into_iter().take(v.dim()).map(|x| x.max(0.0)).collect()
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

/// Standard normal sample (Box-Muller).
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Uniformly random `k`-dimensional subspace of `R^n`.
pub fn random_subspace(rng: &mut impl Rng, n: usize, k: usize) -> Subspace {
    if k == 0 {
        return Subspace::zero(n).unwrap();
    }
    let g = gaussian_matrix(rng, n, k);
    let q = g.qr().q();
    Subspace::from_orthonormal(q.columns(0, k).into_owned()).unwrap()
}

pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, n, n).qr().q()
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(idx[i] == j)))
}

/// Well-conditioned random invertible matrix.
pub fn random_invertible(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    loop {
        let p = gaussian_matrix(rng, n, n) + DMatrix::identity(n, n) * 2.0;
        let s = jacobi_singular_values(&p);
        if s[n - 1] > 1e-2 * s[0] {
            return p;
        }
    }
}

pub fn projector_gap(a: &Subspace, b: &Subspace) -> f64 {
    (a.projector() - b.projector()).amax()
}

/// Random stable model with `n` states, `m` inputs and `p` outputs, rejected
/// until `(A, C)` is observable.
pub fn random_model(rng: &mut impl Rng, n: usize, m: usize, p: usize) -> StateSpaceModel {
    loop {
        let mut a = gaussian_matrix(rng, n, n);
        if n > 0 {
            let s = jacobi_singular_values(&a)[0];
            a /= s / 0.9;
        }
        let model = StateSpaceModel::new(
            a,
            gaussian_matrix(rng, n, m),
            gaussian_matrix(rng, p, n),
            gaussian_matrix(rng, p, m),
        )
        .unwrap();
        if model.lag().is_some() {
            return model;
        }
    }
}

pub fn sine(freq: f64, len: usize) -> Vec<f64> {
    (0..len).map(|t| (2.0 * std::f64::consts::PI * freq * t as f64).sin()).collect()
}

pub fn same_behavior(a: &FiniteHorizonBehavior, b: &FiniteHorizonBehavior, tol: f64) -> bool {
    a.dim() == b.dim() && projector_gap(a.subspace(), b.subspace()) <= tol
}
