//! Ideal PCA: the truncated SVD of `K(X,Z) * K(Z,Z)^{-1/2}`, point-wise
//! feature evaluation, the kernel PCA baseline it replaces, and the exact
//! kernel-matrix decomposition check.
//!
//! The left singular vectors carry the same principal features as kernel PCA
//! of `K(X,X)` (with squared singular values as eigenvalues), while the
//! orthogonal complement of the right singular vectors certifies membership
//! in the data manifold.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use ndarray_linalg::{Eigh, Norm, UPLO};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{cross_kernel_matrix, kernel_eval, kernel_matrix, Dataset, KernelParams};
use crate::linalg::{inv_sqrt_psd, pinv, svd_truncated, Tolerance, Truncation};

/// Fitted Ideal PCA model.
///
/// Holds everything evaluation needs: the feature-generating points `Z`, the
/// precomputed `K(Z,Z)^{-1/2}`, the truncated SVD factors, and the training
/// points (for the X-side evaluation vector).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IpcaModel {
    params: KernelParams,
    z: Array2<f64>,
    kzz_inv_sqrt: Array2<f64>,
    u: Array2<f64>,
    s: Array1<f64>,
    v: Array2<f64>,
    centered: bool,
    /// Column means of the uncentered `K(X,Z) * K(Z,Z)^{-1/2}`; present iff
    /// `centered`, and applied to evaluation rows exactly as during the fit.
    row_center: Option<Array1<f64>>,
    x: Array2<f64>,
}

/// Per-point Ideal PCA features.
#[derive(Debug, Clone, PartialEq)]
pub struct IpcaFeatures {
    /// Left principal features (kernel-PCA-like, X basis).
    pub left: Array1<f64>,
    /// Right principal features (Z basis).
    pub right: Array1<f64>,
    /// Certifying features: the component of the whitened evaluation vector
    /// orthogonal to the principal right subspace. Near zero on the manifold.
    pub certifying: Array1<f64>,
    pub certifying_norm: f64,
}

impl IpcaModel {
    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn z(&self) -> &Array2<f64> {
        &self.z
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn kzz_inv_sqrt(&self) -> &Array2<f64> {
        &self.kzz_inv_sqrt
    }

    /// Left singular vectors, one column per retained component.
    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    /// Retained singular values, non-increasing.
    pub fn s(&self) -> &Array1<f64> {
        &self.s
    }

    /// Right singular vectors, one column per retained component.
    pub fn v(&self) -> &Array2<f64> {
        &self.v
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    /// Number of retained components.
    pub fn retained(&self) -> usize {
        self.s.len()
    }

    /// Serializes the model as JSON. Finite floats round-trip bit-exactly
    /// through the shortest-representation encoding.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = File::create(path)?;
        serde_json::to_writer(BufWriter::new(file), self)
            .map_err(|e| Error::Config(format!("model serialization failed: {e}")))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = File::open(path)?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Parse {
                line: 0,
                msg: format!("model deserialization failed: {e}"),
            })
    }
}

/// Fits an Ideal PCA model: assembles `K(X,Z)` and `K(Z,Z)`, whitens by
/// `K(Z,Z)^{-1/2}`, optionally centers rows, and truncates the SVD.
pub fn ipca_fit(
    x: &Dataset,
    z: &Dataset,
    params: &KernelParams,
    truncation: Truncation,
    center: bool,
) -> Result<IpcaModel> {
    if x.is_empty() || z.is_empty() {
        return Err(Error::Config("fit needs non-empty X and Z".into()));
    }
    let kxz = cross_kernel_matrix(x, z, params)?;
    let kzz = kernel_matrix(z, params)?;
    let kzz_inv_sqrt = inv_sqrt_psd(&kzz, &Tolerance::default())?;
    let mut ktilde = kxz.dot(&kzz_inv_sqrt);
    let row_center = if center {
        let mu = ktilde
            .mean_axis(Axis(0))
            .expect("non-empty rows");
        ktilde = ktilde - mu.view().insert_axis(Axis(0));
        Some(mu)
    } else {
        None
    };
    let svd = svd_truncated(&ktilde, truncation)?;
    if svd.is_empty() {
        let sigma_max = crate::linalg::singular_values(&ktilde)?
            .first()
            .copied()
            .unwrap_or(0.0);
        let eps = match truncation {
            Truncation::Threshold(e) => e,
            Truncation::Rank(_) => 0.0,
        };
        return Err(Error::NoComponents { eps, sigma_max });
    }
    Ok(IpcaModel {
        params: *params,
        z: z.points().clone(),
        kzz_inv_sqrt,
        u: svd.u,
        s: svd.s,
        v: svd.v,
        centered: center,
        row_center,
        x: x.points().clone(),
    })
}

/// Evaluates Ideal PCA features for one point.
pub fn ipca_eval(model: &IpcaModel, x_t: ArrayView1<'_, f64>) -> Result<IpcaFeatures> {
    let n = model.params.dim;
    if x_t.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "point dimension {} vs model dimension {}",
            x_t.len(),
            n
        )));
    }
    if !x_t.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let kappa_z = Array1::from_iter(
        model
            .z
            .rows()
            .into_iter()
            .map(|zj| kernel_eval(x_t, zj, &model.params)),
    );
    let mut row = kappa_z.dot(&model.kzz_inv_sqrt);
    if let Some(mu) = &model.row_center {
        row = row - mu;
    }

    let left = if model.centered {
        // centered rows relate to U through V exactly as during the fit
        row.dot(&model.v)
    } else {
        let kappa_x = Array1::from_iter(
            model
                .x
                .rows()
                .into_iter()
                .map(|xi| kernel_eval(x_t, xi, &model.params)),
        );
        &kappa_x.dot(&model.u) / &model.s
    };
    let right = &kappa_z.dot(&model.v) / &model.s;
    let projected = model.v.dot(&row.dot(&model.v));
    let certifying = &row - &projected;
    let certifying_norm = certifying.norm();
    Ok(IpcaFeatures {
        left,
        right,
        certifying,
        certifying_norm,
    })
}

/// Kernel PCA baseline: top eigenpairs of `K(X,X)`, optionally with the
/// double-centered kernel matrix (the symmetric counterpart of the fit-time
/// row centering, so centered eigenvalues match centered squared singular
/// values).
pub fn kernel_pca(
    x: &Dataset,
    params: &KernelParams,
    cutoff_m: usize,
    center: bool,
) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = x.len();
    if cutoff_m < 1 || cutoff_m > n {
        return Err(Error::Config(format!(
            "cutoff {cutoff_m} must lie in 1..={n}"
        )));
    }
    let mut k = kernel_matrix(x, params)?;
    if center {
        let col_means = k.mean_axis(Axis(0)).expect("non-empty");
        let grand = col_means.mean().expect("non-empty");
        let row_means = k.mean_axis(Axis(1)).expect("non-empty");
        for i in 0..n {
            for j in 0..n {
                k[[i, j]] += grand - row_means[i] - col_means[j];
            }
        }
    }
    let (eigvals, eigvecs) = k.eigh(UPLO::Lower)?; // ascending
    let mut vals = Array1::zeros(cutoff_m);
    let mut vecs = Array2::zeros((n, cutoff_m));
    for i in 0..cutoff_m {
        let src = n - 1 - i;
        vals[i] = eigvals[src];
        vecs.column_mut(i).assign(&eigvecs.column(src));
    }
    Ok((vals, vecs))
}

/// Relative error of the exact decomposition
/// `K(X,X) = K(X,Z) * K(Z,Z)^+ * K(Z,X)`; zero (up to roundoff) exactly when
/// the feature span of X is contained in the feature span of Z.
pub fn decomposition_error(x: &Dataset, z: &Dataset, params: &KernelParams) -> Result<f64> {
    let kxx = kernel_matrix(x, params)?;
    let kxz = cross_kernel_matrix(x, z, params)?;
    let kzz = kernel_matrix(z, params)?;
    let reconstructed = kxz.dot(&pinv(&kzz, &Tolerance::default())?).dot(&kxz.t());
    Ok((&kxx - &reconstructed).norm() / kxx.norm())
}
