use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::covariance::CovarianceEstimate;
use super::{Result, SurrogateError};

/// Default minimum ratio `lambda_m / lambda_{m+1}` for a spectral gap to count.
pub const DEFAULT_GAP_RATIO: f64 = 10.0;

const SYMMETRY_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;

/// Eigendecomposition of the gradient covariance with a chosen split
/// `W = [W1 W2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSubspace {
    eigenvalues: Vec<f64>,
    w: DMatrix<f64>,
    m: Option<usize>,
    degenerate: bool,
}

impl ActiveSubspace {
    /// Rebuild a subspace from stored parts (e.g. an export file). Checks
    /// ordering and orthonormality.
    pub fn from_parts(eigenvalues: Vec<f64>, w: DMatrix<f64>, m: Option<usize>, degenerate: bool) -> Result<Self> {
        let d = eigenvalues.len();
        if w.nrows() != d || w.ncols() != d {
            return Err(SurrogateError::LengthMismatch {
                expected: d,
                found: w.nrows().max(w.ncols()),
            });
        }
        if eigenvalues.windows(2).any(|p| p[0] < p[1]) {
            return Err(SurrogateError::NotSorted);
        }
        let deviation = (w.transpose() * &w - DMatrix::identity(d, d)).amax();
        if deviation > 1e-10 {
            return Err(SurrogateError::InvalidDimension(format!(
                "eigenvector matrix is not orthonormal (deviation {deviation:e})"
            )));
        }
        let subspace = Self {
            eigenvalues,
            w,
            m: None,
            degenerate,
        };
        match m {
            Some(m) => subspace.with_dimension(m, degenerate),
            None => Ok(subspace),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// All eigenvectors, one per column, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn m(&self) -> Option<usize> {
        self.m
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn with_dimension(mut self, m: usize, degenerate: bool) -> Result<Self> {
        if m == 0 || m > self.dim() {
            return Err(SurrogateError::InvalidDimension(format!(
                "m = {m} outside 1..={}",
                self.dim()
            )));
        }
        self.m = Some(m);
        self.degenerate = degenerate;
        Ok(self)
    }

    /// The first `m` eigenvectors.
    pub fn active(&self) -> Result<DMatrix<f64>> {
        let m = self.m.ok_or(SurrogateError::DimensionUnset)?;
        Ok(self.w.columns(0, m).into_owned())
    }

    /// The remaining `d - m` eigenvectors.
    pub fn inactive(&self) -> Result<DMatrix<f64>> {
        let m = self.m.ok_or(SurrogateError::DimensionUnset)?;
        Ok(self.w.columns(m, self.dim() - m).into_owned())
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted descending and each
/// eigenvector signed so its largest-magnitude component is positive.
pub fn eigendecompose(cov: &CovarianceEstimate) -> Result<ActiveSubspace> {
    let c = cov.matrix();
    let d = c.nrows();
    let scale = c.amax();
    let asymmetry = (c - c.transpose()).amax();
    if asymmetry > SYMMETRY_TOL * scale.max(1.0) {
        return Err(SurrogateError::NotSymmetric(asymmetry));
    }
    let eig = SymmetricEigen::new(c.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut w = DMatrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        w.set_column(col, &v);
    }

    let residual = (c * &w - &w * DMatrix::from_diagonal(&DVector::from_column_slice(&eigenvalues))).amax();
    let tolerance = RESIDUAL_TOL * scale;
    if residual > tolerance {
        return Err(SurrogateError::EigenResidual { residual, tolerance });
    }
    Ok(ActiveSubspace {
        eigenvalues,
        w,
        m: None,
        degenerate: false,
    })
}

/// [`select_dimension_with`] at the default gap ratio of 10.
pub fn select_dimension(eigenvalues: &[f64], max_m: usize) -> Result<(usize, bool)> {
    select_dimension_with(eigenvalues, max_m, DEFAULT_GAP_RATIO)
}

/// Pick `m` maximizing `(lambda_k + eps) / (lambda_{k+1} + eps)` over
/// `1 <= k <= max_m`, with `eps = 1e-15 lambda_1`. Returns `(max_m, true)`
/// when no ratio reaches `gap_ratio`.
pub fn select_dimension_with(eigenvalues: &[f64], max_m: usize, gap_ratio: f64) -> Result<(usize, bool)> {
    let d = eigenvalues.len();
    if d < 2 {
        return Err(SurrogateError::InvalidDimension(format!(
            "need at least 2 eigenvalues, got {d}"
        )));
    }
    if max_m == 0 || max_m >= d {
        return Err(SurrogateError::InvalidDimension(format!(
            "max_m = {max_m} must satisfy 1 <= max_m < {d}"
        )));
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(SurrogateError::NonFinite("eigenvalues"));
    }
    if eigenvalues.windows(2).any(|p| p[0] < p[1]) {
        return Err(SurrogateError::NotSorted);
    }
    let lead = eigenvalues[0];
    if lead <= 0.0 {
        return Ok((max_m, true));
    }
    let eps = 1e-15 * lead;
    // round-off can leave trailing eigenvalues slightly negative
    let level = |k: usize| eigenvalues[k].max(0.0) + eps;
    let (mut best_m, mut best_ratio) = (1, f64::NEG_INFINITY);
    for k in 1..=max_m {
        let ratio = level(k - 1) / level(k);
        if ratio > best_ratio {
            best_ratio = ratio;
            best_m = k;
        }
    }
    if best_ratio < gap_ratio {
        Ok((max_m, true))
    } else {
        Ok((best_m, false))
    }
}

/// `W1' x`.
pub fn project(subspace: &ActiveSubspace, x: &DVector<f64>) -> Result<DVector<f64>> {
    let m = subspace.m.ok_or(SurrogateError::DimensionUnset)?;
    if x.len() != subspace.dim() {
        return Err(SurrogateError::LengthMismatch {
            expected: subspace.dim(),
            found: x.len(),
        });
    }
    Ok(subspace.w.columns(0, m).tr_mul(x))
}

/// Largest principal angle (radians) between the column spans of two
/// matrices with orthonormal columns of equal count.
///
/// Computed as `asin |(I - A A') B|_2`, which stays accurate for tiny angles
/// where the cosine form loses all precision.
pub fn subspace_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows(), "subspaces live in different spaces");
    assert_eq!(a.ncols(), b.ncols(), "subspaces have different dimensions");
    let residual = b - a * a.tr_mul(b);
    let sine = residual.svd(false, false).singular_values.max();
    sine.min(1.0).asin()
}
