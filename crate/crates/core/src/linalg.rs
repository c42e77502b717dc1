//! Dense linear-algebra primitives with explicit tolerance contracts.
//!
//! Every rank decision in the crate funnels through [`Tolerance::rank_tol`]
//! (relative to the largest singular value) and every residual test through
//! [`Tolerance::residual_tol`], so rank reports, nullspaces and membership
//! certificates stay mutually consistent.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, JobSvd, Norm, SVDDC, UPLO};

use crate::error::{Error, Result};

/// Relative thresholds for rank decisions and residual tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Singular values below `rank_tol * sigma_max` count as zero.
    pub rank_tol: f64,
    /// Residuals below `residual_tol * scale` count as vanishing.
    pub residual_tol: f64,
}

impl Tolerance {
    pub fn new(rank_tol: f64, residual_tol: f64) -> Result<Self> {
        for (name, v) in [("rank_tol", rank_tol), ("residual_tol", residual_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(Self {
            rank_tol,
            residual_tol,
        })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            residual_tol: 1e-6,
        }
    }
}

/// Which singular triplets a truncated SVD retains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep every triplet with `sigma >= eps`.
    Threshold(f64),
    /// Keep the top `m` triplets (fewer when the matrix has lower rank).
    Rank(usize),
}

/// Truncated singular value decomposition `A ~ U * diag(S) * V^T`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors, orthonormal columns.
    pub u: Array2<f64>,
    /// Retained singular values, non-increasing and positive.
    pub s: Array1<f64>,
    /// Right singular vectors, orthonormal columns.
    pub v: Array2<f64>,
}

impl SvdResult {
    /// Number of retained triplets.
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// True when truncation removed every triplet.
    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `U * diag(S) * V^T`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let scaled = &self.u * &self.s;
        scaled.dot(&self.v.t())
    }
}

fn thin_svd(a: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (u, s, vt) = a.svddc(JobSvd::Some)?;
    Ok((u.expect("left vectors requested"), s, vt.expect("right vectors requested")))
}

/// Full SVD with all left and right singular vectors (`U` is N x N, `Vt` is
/// M x M); the nullspace of `A` is spanned by the trailing rows of `Vt`.
pub fn svd_full(a: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (u, s, vt) = a.svddc(JobSvd::All)?;
    Ok((u.expect("left vectors requested"), s, vt.expect("right vectors requested")))
}

/// Truncated SVD. An `eps` above the largest singular value yields an empty
/// result; callers decide whether that is an error.
pub fn svd_truncated(a: &Array2<f64>, truncation: Truncation) -> Result<SvdResult> {
    let (n, m) = a.dim();
    if n == 0 || m == 0 {
        return Ok(SvdResult {
            u: Array2::zeros((n, 0)),
            s: Array1::zeros(0),
            v: Array2::zeros((m, 0)),
        });
    }
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (u, s, vt) = thin_svd(a)?;
    let keep = match truncation {
        Truncation::Threshold(eps) => {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::Config(format!(
                    "truncation threshold must be positive and finite, got {eps}"
                )));
            }
            s.iter().take_while(|&&x| x >= eps).count()
        }
        Truncation::Rank(r) => s.iter().take(r).take_while(|&&x| x > 0.0).count(),
    };
    Ok(SvdResult {
        u: u.slice(ndarray::s![.., ..keep]).to_owned(),
        s: s.slice(ndarray::s![..keep]).to_owned(),
        v: vt.slice(ndarray::s![..keep, ..]).t().to_owned(),
    })
}

/// Singular values sorted non-increasing.
pub fn singular_values(a: &Array2<f64>) -> Result<Array1<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Array1::zeros(0));
    }
    let (_, s, _) = a.svddc(JobSvd::None)?;
    Ok(s)
}

/// Count of singular values above `rank_tol * sigma_max`; zero for the zero
/// matrix.
pub fn numerical_rank(a: &Array2<f64>, tol: &Tolerance) -> usize {
    let s = singular_values(a).expect("SVD of a finite matrix");
    match s.first() {
        None => 0,
        Some(&smax) if smax == 0.0 => 0,
        Some(&smax) => s.iter().take_while(|&&x| x > tol.rank_tol * smax).count(),
    }
}

/// Moore-Penrose pseudoinverse with singular values below
/// `rank_tol * sigma_max` treated as zero.
pub fn pinv(a: &Array2<f64>, tol: &Tolerance) -> Result<Array2<f64>> {
    let (n, m) = a.dim();
    if n == 0 || m == 0 {
        return Ok(Array2::zeros((m, n)));
    }
    let (u, s, vt) = thin_svd(a)?;
    let smax = s[0];
    if smax == 0.0 {
        return Ok(Array2::zeros((m, n)));
    }
    let inv = s.mapv(|x| if x > tol.rank_tol * smax { 1.0 / x } else { 0.0 });
    let scaled = &vt.t() * &inv; // columns of V scaled by 1/sigma
    Ok(scaled.dot(&u.t()))
}

/// Inverse square root of a symmetric positive semidefinite matrix via
/// eigendecomposition. Eigenvalues at or below `rank_tol * lambda_max` are
/// clamped to zero, so `B*A*B` is the orthogonal projector onto the range of
/// `A` rather than the identity when `A` is singular.
pub fn inv_sqrt_psd(a: &Array2<f64>, tol: &Tolerance) -> Result<Array2<f64>> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::NotSymmetric);
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = a.norm();
    if (a - &a.t()).norm() > 1e-10 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric);
    }
    let (eigvals, eigvecs) = a.eigh(UPLO::Lower)?;
    let lam_max = eigvals.iter().cloned().fold(0.0f64, f64::max);
    let neg_floor = -tol.rank_tol * lam_max.max(f64::EPSILON);
    if let Some(&bad) = eigvals.iter().find(|&&l| l < neg_floor) {
        return Err(Error::NotPositiveSemidefinite(bad));
    }
    let mapped = eigvals.mapv(|l| {
        if l > tol.rank_tol * lam_max {
            1.0 / l.sqrt()
        } else {
            0.0
        }
    });
    let scaled = &eigvecs * &mapped;
    let b = scaled.dot(&eigvecs.t());
    // symmetrize away roundoff
    Ok((&b + &b.t()) * 0.5)
}

/// Outcome of a row-span membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanCheck {
    pub contained: bool,
    /// Relative projection residual `||v - v*pinv(A)*A|| / ||v||`.
    pub residual: f64,
}

/// Tests whether `v` lies in the row span of `A`, up to `residual_tol`.
///
/// Panics when `v` does not match the column count of `A`.
pub fn rowspan_contains(a: &Array2<f64>, v: &Array1<f64>, tol: &Tolerance) -> SpanCheck {
    assert_eq!(v.len(), a.ncols(), "vector length must match column count");
    let vnorm = v.norm();
    if vnorm == 0.0 {
        return SpanCheck {
            contained: true,
            residual: 0.0,
        };
    }
    let residual = if a.nrows() == 0 {
        1.0
    } else {
        let (_, s, vt) = thin_svd(a).expect("SVD of a finite matrix");
        let smax = s.first().copied().unwrap_or(0.0);
        let r = if smax == 0.0 {
            0
        } else {
            s.iter().take_while(|&&x| x > tol.rank_tol * smax).count()
        };
        let basis = vt.slice(ndarray::s![..r, ..]);
        let coeffs = basis.dot(v);
        let proj = basis.t().dot(&coeffs);
        (v - &proj).norm() / vnorm
    };
    SpanCheck {
        contained: residual <= tol.residual_tol,
        residual,
    }
}

/// Predicate for the exact recovery of `A` through the compression `C*A*B`:
/// true iff `||A - A*B*pinv(C*A*B)*C*A||_F <= residual_tol * ||A||_F`.
/// This holds exactly when `rank(A) = rank(C*A*B)`.
pub fn compression_recovers(
    a: &Array2<f64>,
    b: &Array2<f64>,
    c: &Array2<f64>,
    tol: &Tolerance,
) -> Result<bool> {
    if a.ncols() != b.nrows() || c.ncols() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}, C is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let anorm = a.norm();
    if anorm == 0.0 {
        return Ok(true);
    }
    let ab = a.dot(b);
    let ca = c.dot(a);
    let middle = pinv(&c.dot(&ab), tol)?;
    let recovered = ab.dot(&middle).dot(&ca);
    Ok((a - &recovered).norm() <= tol.residual_tol * anorm)
}
