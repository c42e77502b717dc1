//! Inhomogeneous polynomial kernel, its explicit feature map, and kernel /
//! cross-kernel matrix assembly.
//!
//! Matrix assembly uses the closed form `(theta*<x,y> + 1)^d`, which costs
//! `O(n)` per entry. The explicit feature map is exposed separately so tests
//! can cross-check the two routes against each other.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::basis::FeatureBasis;
use crate::error::{Error, Result};

/// One kernel instance `k(x,y) = (theta*<x,y> + 1)^degree` on `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub degree: u32,
    pub theta: f64,
    pub dim: usize,
}

impl KernelParams {
    pub fn new(degree: u32, theta: f64, dim: usize) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Config("kernel degree must be >= 1".into()));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Config("theta must be positive and finite".into()));
        }
        if dim < 1 {
            return Err(Error::Config("ambient dimension must be >= 1".into()));
        }
        Ok(Self { degree, theta, dim })
    }

    /// Monomial basis of the associated feature space.
    pub fn feature_basis(&self) -> Result<FeatureBasis> {
        FeatureBasis::new(self.dim, self.degree, self.theta)
    }
}

/// Row-major set of points with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Array2<f64>,
    labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        if !points.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            points,
            labels: None,
        })
    }

    pub fn with_labels(points: Array2<f64>, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != points.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                points.nrows()
            )));
        }
        let mut ds = Self::new(points)?;
        ds.labels = Some(labels);
        Ok(ds)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Distinct labels in ascending order, with the row indices of each class.
    pub fn split_by_label(&self) -> Result<Vec<(i64, Dataset)>> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::Config("dataset has no labels".into()))?;
        let mut ids: Vec<i64> = labels.clone();
        ids.sort_unstable();
        ids.dedup();
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let rows: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter_map(|(i, &l)| (l == id).then_some(i))
                .collect();
            let mut pts = Array2::zeros((rows.len(), self.dim()));
            for (r, &i) in rows.iter().enumerate() {
                pts.row_mut(r).assign(&self.points.row(i));
            }
            out.push((id, Dataset::new(pts)?));
        }
        Ok(out)
    }
}

/// Kernel evaluation `(theta*<x,y> + 1)^d`.
///
/// Panics on mismatched vector lengths.
pub fn kernel_eval(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>, params: &KernelParams) -> f64 {
    assert_eq!(x.len(), y.len(), "kernel arguments must share a dimension");
    (params.theta * x.dot(&y) + 1.0).powi(params.degree as i32)
}

/// Explicit feature map: `(gamma_alpha * x^alpha)` in basis order.
pub fn feature_map(x: ArrayView1<'_, f64>, basis: &FeatureBasis) -> Array1<f64> {
    let x = x.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| x.to_vec());
    assert_eq!(x.len(), basis.dim(), "point dimension mismatch");
    Array1::from_iter(
        basis
            .indices()
            .iter()
            .zip(basis.gammas())
            .map(|(alpha, &g)| g * alpha.monomial(&x)),
    )
}

/// Rows are feature-map images of the dataset points.
pub fn feature_matrix(x: &Dataset, basis: &FeatureBasis) -> Result<Array2<f64>> {
    if x.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data dimension {} vs basis dimension {}",
            x.dim(),
            basis.dim()
        )));
    }
    let mut out = Array2::zeros((x.len(), basis.len()));
    for i in 0..x.len() {
        out.row_mut(i).assign(&feature_map(x.point(i), basis));
    }
    Ok(out)
}

/// Cross-kernel matrix with entry `(i,j) = k(x_i, z_j)`.
pub fn cross_kernel_matrix(
    x: &Dataset,
    z: &Dataset,
    params: &KernelParams,
) -> Result<Array2<f64>> {
    if x.dim() != params.dim || z.dim() != params.dim {
        return Err(Error::DimensionMismatch(format!(
            "data dimensions {} and {} vs kernel dimension {}",
            x.dim(),
            z.dim(),
            params.dim
        )));
    }
    let mut out = Array2::zeros((x.len(), z.len()));
    for i in 0..x.len() {
        let xi = x.point(i);
        for j in 0..z.len() {
            out[[i, j]] = kernel_eval(xi, z.point(j), params);
        }
    }
    Ok(out)
}

/// Kernel matrix of one dataset, `K(X,X)`.
pub fn kernel_matrix(x: &Dataset, params: &KernelParams) -> Result<Array2<f64>> {
    cross_kernel_matrix(x, x, params)
}
