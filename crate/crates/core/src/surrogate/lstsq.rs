use nalgebra::{DMatrix, DVector};

use super::{Result, SurrogateError};

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: DVector<f64>,
    pub rank: usize,
    pub residual_rms: f64,
}

/// Minimum-residual solution of `X b ~ y` via the SVD.
///
/// With `regularization > 0` the columns listed in `penalized` get a ridge
/// penalty `regularization * |b_j|^2`, which makes the system solvable for
/// any sample count. Without it a numerically rank-deficient `X` is an error.
pub fn solve_least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    regularization: f64,
    penalized: &[usize],
) -> Result<LeastSquares> {
    if x.nrows() != y.len() {
        return Err(SurrogateError::LengthMismatch {
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if !regularization.is_finite() || regularization < 0.0 {
        return Err(SurrogateError::InvalidOption(format!(
            "ridge regularization must be >= 0, got {regularization}"
        )));
    }
    let terms = x.ncols();
    if regularization == 0.0 && x.nrows() < terms {
        return Err(SurrogateError::TooFewSamples {
            samples: x.nrows(),
            terms,
        });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(SurrogateError::NonFinite("least-squares system"));
    }

    let (system, rhs) = if regularization > 0.0 {
        let extra = penalized.len();
        let mut a = DMatrix::zeros(x.nrows() + extra, terms);
        a.rows_mut(0, x.nrows()).copy_from(x);
        let scale = regularization.sqrt();
        for (row, &col) in penalized.iter().enumerate() {
            a[(x.nrows() + row, col)] = scale;
        }
        let mut b = DVector::zeros(x.nrows() + extra);
        b.rows_mut(0, y.len()).copy_from(y);
        (a, b)
    } else {
        (x.clone(), y.clone())
    };

    let svd = system.svd(true, true);
    let largest = svd.singular_values.max();
    let cutoff = RANK_TOLERANCE * largest;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < terms {
        return Err(SurrogateError::RankDeficient { rank, terms });
    }
    let coefficients = svd
        .solve(&rhs, cutoff)
        .map_err(|_| SurrogateError::RankDeficient { rank, terms })?;
    let residual = x * &coefficients - y;
    let residual_rms = (residual.norm_squared() / y.len().max(1) as f64).sqrt();
    Ok(LeastSquares {
        coefficients,
        rank,
        residual_rms,
    })
}
