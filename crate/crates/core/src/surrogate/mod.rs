//! Quadratic-surrogate active subspaces.
//!
//! The pipeline fits `f(x) ~ 1/2 x'Ax + c'x + d0` by least squares, takes the
//! closed-form average outer product of its gradient `Ax + c` over the uniform
//! hypercube, and eigendecomposes it. The leading eigenvectors span the ridge
//! subspace onto which designs are projected for sufficient summary plots.

mod covariance;
pub mod export;
mod lstsq;
mod quadratic;
mod subspace;
mod summary;

pub use covariance::{covariance_analytic, covariance_monte_carlo, CovarianceEstimate, CovarianceMethod};
pub use lstsq::{solve_least_squares, LeastSquares, RANK_TOLERANCE};
pub use quadratic::{fit_quadratic, fit_quadratic_points, gradient, quadratic_term_count, FitOptions, QuadraticModel};
pub use subspace::{
    eigendecompose, project, select_dimension, select_dimension_with, subspace_angle, ActiveSubspace,
    DEFAULT_GAP_RATIO,
};
pub use summary::{
    build_summary_plot, fit_ridge_profile, monomial_exponents, predict_ridge, RidgeProfile, SummaryPlot,
    SummaryPoint,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error("unknown quantity of interest `{0}`")]
    UnknownQoi(String),
    #[error("expected length {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{samples} samples cannot determine {terms} coefficients without regularization")]
    TooFewSamples { samples: usize, terms: usize },
    #[error("design matrix is rank deficient: estimated rank {rank} of {terms} columns")]
    RankDeficient { rank: usize, terms: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("eigenvalues are not sorted in descending order")]
    NotSorted,
    #[error("invalid dimension request: {0}")]
    InvalidDimension(String),
    #[error("active subspace dimension has not been chosen")]
    DimensionUnset,
    #[error("summary plots support 1 or 2 projected axes, got m = {0}")]
    PlotDimension(usize),
    #[error("{points} points cannot determine {coefficients} profile coefficients")]
    Underdetermined { points: usize, coefficients: usize },
    #[error("all projected coordinates coincide; the ridge profile is not identifiable")]
    DegenerateProjection,
    #[error("eigendecomposition residual {residual:e} exceeds tolerance {tolerance:e}")]
    EigenResidual { residual: f64, tolerance: f64 },
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("invalid option: {0}")]
    InvalidOption(String),
}

impl SurrogateError {
    /// Failures of the numerics themselves, as opposed to malformed requests.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SurrogateError::TooFewSamples { .. }
                | SurrogateError::RankDeficient { .. }
                | SurrogateError::DegenerateProjection
                | SurrogateError::Underdetermined { .. }
                | SurrogateError::EigenResidual { .. }
                | SurrogateError::NonFinite(_)
        )
    }
}

pub type Result<T, E = SurrogateError> = std::result::Result<T, E>;
