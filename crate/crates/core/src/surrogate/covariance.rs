use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::quadratic::QuadraticModel;
use super::{Result, SurrogateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceMethod {
    Analytic,
    MonteCarlo { samples: usize, seed: u64 },
}

/// Estimate of the average outer product of the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    matrix: DMatrix<f64>,
    method: CovarianceMethod,
}

impl CovarianceEstimate {
    /// Wrap a caller-supplied matrix; it must be square and finite.
    pub fn from_matrix(matrix: DMatrix<f64>, method: CovarianceMethod) -> Result<Self> {
        if !matrix.is_square() {
            return Err(SurrogateError::LengthMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(SurrogateError::NonFinite("covariance matrix"));
        }
        Ok(Self { matrix, method })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn method(&self) -> CovarianceMethod {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `C = (1/3) A A + c c'`.
///
/// For `x` uniform on `[-1, 1]^d`, `E[x] = 0` and `E[x x'] = I/3`, so the
/// cross terms of `E[(Ax + c)(Ax + c)']` vanish.
pub fn covariance_analytic(model: &QuadraticModel) -> CovarianceEstimate {
    let a = model.curvature();
    let c = model.linear();
    let mut matrix = (a * a) / 3.0 + c * c.transpose();
    symmetrize(&mut matrix);
    CovarianceEstimate {
        matrix,
        method: CovarianceMethod::Analytic,
    }
}

/// `(1/n) sum g(x_i) g(x_i)'` over i.i.d. uniform draws, deterministic per seed.
pub fn covariance_monte_carlo(model: &QuadraticModel, n: usize, seed: u64) -> Result<CovarianceEstimate> {
    if n == 0 {
        return Err(SurrogateError::ZeroSamples);
    }
    let d = model.dim();
    let a = model.curvature();
    let c = model.linear();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; d];
    let mut g = vec![0.0; d];
    // Running mean of the upper triangle; a constant integrand stays exact.
    let mut mean = vec![0.0; d * (d + 1) / 2];
    for k in 1..=n {
        for xi in &mut x {
            *xi = rng.random_range(-1.0..=1.0);
        }
        for (i, gi) in g.iter_mut().enumerate() {
            let mut acc = c[i];
            for (j, xj) in x.iter().enumerate() {
                acc += a[(i, j)] * xj;
            }
            *gi = acc;
        }
        let weight = 1.0 / k as f64;
        let mut idx = 0;
        for i in 0..d {
            for j in i..d {
                mean[idx] += (g[i] * g[j] - mean[idx]) * weight;
                idx += 1;
            }
        }
    }
    let mut matrix = DMatrix::zeros(d, d);
    let mut idx = 0;
    for i in 0..d {
        for j in i..d {
            matrix[(i, j)] = mean[idx];
            matrix[(j, i)] = mean[idx];
            idx += 1;
        }
    }
    Ok(CovarianceEstimate {
        matrix,
        method: CovarianceMethod::MonteCarlo { samples: n, seed },
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
