//! Polynomials as coefficient vectors over the monomial basis, the scalar
//! product under which kernel decision functions reproduce point evaluation,
//! and vanishing-ideal extraction from cross-kernel matrices.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Eigh, Norm, UPLO};

use crate::basis::FeatureBasis;
use crate::error::{Error, Result};
use crate::kernel::{cross_kernel_matrix, kernel_eval, kernel_matrix, Dataset, KernelParams};
use crate::linalg::{rowspan_contains, svd_full, SpanCheck, Tolerance};

/// Polynomial of degree at most `d` as a dense coefficient vector in basis
/// order.
#[derive(Debug, Clone)]
pub struct Poly {
    basis: Arc<FeatureBasis>,
    coeffs: Array1<f64>,
}

impl Poly {
    pub fn new(basis: Arc<FeatureBasis>, coeffs: Array1<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Self { basis, coeffs })
    }

    /// The constant polynomial `c`.
    pub fn constant(basis: Arc<FeatureBasis>, c: f64) -> Self {
        let mut coeffs = Array1::zeros(basis.len());
        coeffs[0] = c;
        Self { basis, coeffs }
    }

    /// A single monomial `c * t^alpha`; `None` when the exponents are not in
    /// the basis.
    pub fn monomial(basis: Arc<FeatureBasis>, exponents: &[u32], c: f64) -> Option<Self> {
        let pos = basis.find(exponents)?;
        let mut coeffs = Array1::zeros(basis.len());
        coeffs[pos] = c;
        Some(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<FeatureBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &Array1<f64> {
        &self.coeffs
    }

    /// Evaluates `sum_alpha c_alpha * x^alpha`.
    pub fn eval(&self, x: ArrayView1<'_, f64>) -> f64 {
        let xs = x.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| x.to_vec());
        assert_eq!(xs.len(), self.basis.dim(), "point dimension mismatch");
        self.basis
            .indices()
            .iter()
            .zip(&self.coeffs)
            .map(|(alpha, &c)| c * alpha.monomial(&xs))
            .sum()
    }

    /// Feature-space embedding with entries `c_alpha / gamma_alpha`; satisfies
    /// `<embedding(f), feature_map(x)> = f(x)`.
    pub fn feature_embedding(&self) -> Array1<f64> {
        Array1::from_iter(
            self.coeffs
                .iter()
                .zip(self.basis.gammas())
                .map(|(&c, &g)| c / g),
        )
    }
}

/// The kernel decision function `t -> k(z, t)` expanded over the monomial
/// basis: the coefficient of `t^alpha` is `gamma_alpha^2 * z^alpha`.
pub fn kernel_decision(basis: &Arc<FeatureBasis>, z: ArrayView1<'_, f64>) -> Poly {
    let zs = z.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| z.to_vec());
    assert_eq!(zs.len(), basis.dim(), "point dimension mismatch");
    let coeffs = Array1::from_iter(
        basis
            .indices()
            .iter()
            .zip(basis.gammas())
            .map(|(alpha, &g)| g * g * alpha.monomial(&zs)),
    );
    Poly {
        basis: Arc::clone(basis),
        coeffs,
    }
}

/// Scalar product under which kernel decision functions reproduce point
/// evaluation: `sum_alpha c_alpha * c'_alpha / gamma_alpha^2`.
pub fn rkhs_inner(f: &Poly, g: &Poly) -> Result<f64> {
    if !f.basis.compatible(&g.basis) {
        return Err(Error::BasisMismatch(
            "polynomials live over different kernel instances".into(),
        ));
    }
    Ok(f.coeffs
        .iter()
        .zip(&g.coeffs)
        .zip(f.basis.gammas())
        .map(|((&a, &b), &gamma)| a * b / (gamma * gamma))
        .sum())
}

pub fn rkhs_norm(f: &Poly) -> f64 {
    rkhs_inner(f, f).expect("same basis").sqrt()
}

/// Orthonormal generators of the degree-bounded vanishing ideal of a dataset,
/// as extracted from a cross-kernel nullspace.
#[derive(Debug, Clone)]
pub struct IdealBasis {
    generators: Vec<Poly>,
    z_coeffs: Array2<f64>,
    residual_scale: Vec<f64>,
}

impl IdealBasis {
    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    /// Coefficients of each generator over the kernel decision functions of
    /// the Z points (one row per generator).
    pub fn z_coeffs(&self) -> &Array2<f64> {
        &self.z_coeffs
    }

    /// Per-generator `max_i |f(x_i)|` over the training points.
    pub fn residual_scale(&self) -> &[f64] {
        &self.residual_scale
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Extracts the vanishing ideal of `X` (up to the kernel degree) from the
/// nullspace of `K(X,Z)`.
///
/// Right singular vectors with `sigma <= rank_tol * sigma_max` span the
/// nullspace; each maps to the polynomial `sum_j c_j * k(z_j, t)`. Directions
/// that collapse to the zero polynomial (possible when the Z points are
/// feature-dependent) are dropped, and the survivors are orthonormalized
/// under the reproducing scalar product.
pub fn vanishing_basis(
    x: &Dataset,
    z: &Dataset,
    params: &KernelParams,
    tol: &Tolerance,
) -> Result<IdealBasis> {
    if z.is_empty() {
        return Err(Error::Config("need at least one Z point".into()));
    }
    let kxz = cross_kernel_matrix(x, z, params)?;
    let m_pts = z.len();
    let (_, s, vt) = svd_full(&kxz)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        s.iter().take_while(|&&x| x > tol.rank_tol * smax).count()
    };
    let nullity = m_pts - rank;
    let basis = Arc::new(params.feature_basis()?);
    if nullity == 0 {
        return Ok(IdealBasis {
            generators: Vec::new(),
            z_coeffs: Array2::zeros((0, m_pts)),
            residual_scale: Vec::new(),
        });
    }
    let null = vt.slice(ndarray::s![rank.., ..]).to_owned(); // nullity x M

    // Gram matrix of the candidate polynomials under the reproducing product:
    // <f_a, f_b> = c_a^T * K(Z,Z) * c_b.
    let kzz = kernel_matrix(z, params)?;
    let gram = null.dot(&kzz).dot(&null.t());
    let (eigvals, eigvecs) = gram.eigh(UPLO::Lower)?;
    let lam_max = eigvals.iter().cloned().fold(0.0f64, f64::max);
    // descending, keeping only directions with a nonzero polynomial image
    let kept: Vec<usize> = (0..eigvals.len())
        .rev()
        .filter(|&i| eigvals[i] > tol.rank_tol * lam_max.max(f64::EPSILON))
        .collect();
    let mut z_coeffs = Array2::zeros((kept.len(), m_pts));
    for (row, &i) in kept.iter().enumerate() {
        let w = eigvecs.column(i).dot(&null) / eigvals[i].sqrt();
        z_coeffs.row_mut(row).assign(&w);
    }

    let mut generators = Vec::with_capacity(kept.len());
    let mut residual_scale = Vec::with_capacity(kept.len());
    for row in z_coeffs.rows() {
        let mut coeffs = Array1::zeros(basis.len());
        for (j, &w) in row.iter().enumerate() {
            let kdf = kernel_decision(&basis, z.point(j));
            coeffs = coeffs + w * kdf.coeffs();
        }
        generators.push(Poly::new(Arc::clone(&basis), coeffs)?);
        // f(x_i) = (K(X,Z) * c)_i, so the training residual comes for free
        let evals = kxz.dot(&row);
        residual_scale.push(evals.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
    }
    Ok(IdealBasis {
        generators,
        z_coeffs,
        residual_scale,
    })
}

/// Certifies whether a point lies on the data manifold spanned by `X`: builds
/// the evaluation vector `(k(c, z_1), ..., k(c, z_M))` and tests membership
/// in the row span of `K(X,Z)`.
pub fn membership_certificate(
    c: ArrayView1<'_, f64>,
    x: &Dataset,
    z: &Dataset,
    params: &KernelParams,
    tol: &Tolerance,
) -> Result<SpanCheck> {
    if c.len() != params.dim {
        return Err(Error::DimensionMismatch(format!(
            "point dimension {} vs kernel dimension {}",
            c.len(),
            params.dim
        )));
    }
    let kxz = cross_kernel_matrix(x, z, params)?;
    let kappa = Array1::from_iter((0..z.len()).map(|j| kernel_eval(c, z.point(j), params)));
    Ok(rowspan_contains(&kxz, &kappa, tol))
}

impl fmt::Display for Poly {
    /// Monomial form with fixed 6-decimal coefficients, terms in basis order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (alpha, &c) in self.basis.indices().iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono: Vec<String> = alpha
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("t{}", i + 1)
                    } else {
                        format!("t{}^{}", i + 1, e)
                    }
                })
                .collect();
            write!(f, "{:.6}", c.abs())?;
            if !mono.is_empty() {
                write!(f, "*{}", mono.join("*"))?;
            }
        }
        if first {
            write!(f, "{:.6}", 0.0)?;
        }
        Ok(())
    }
}
