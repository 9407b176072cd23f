use nalgebra::{DMatrix, DVector};

use super::lstsq::solve_least_squares;
use super::{Result, SurrogateError};
use crate::dataset::DesignTable;

/// Global quadratic surrogate `f(x) ~ 1/2 x'Ax + c'x + d0` with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    a: DMatrix<f64>,
    c: DVector<f64>,
    d0: f64,
}

impl QuadraticModel {
    /// Builds a model, storing `(A + A')/2` so that `A` is exactly symmetric.
    pub fn new(a: DMatrix<f64>, c: DVector<f64>, d0: f64) -> Result<Self> {
        let d = c.len();
        if a.nrows() != d || a.ncols() != d {
            return Err(SurrogateError::LengthMismatch {
                expected: d,
                found: a.nrows().max(a.ncols()),
            });
        }
        if a.iter().chain(c.iter()).any(|v| !v.is_finite()) || !d0.is_finite() {
            return Err(SurrogateError::NonFinite("quadratic model"));
        }
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self { a, c, d0 })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn curvature(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn constant(&self) -> f64 {
        self.d0
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(0.5 * x.dot(&(&self.a * x)) + self.c.dot(x) + self.d0)
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(SurrogateError::LengthMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// `A x + c`, the exact gradient of the quadratic surrogate.
pub fn gradient(model: &QuadraticModel, x: &DVector<f64>) -> Result<DVector<f64>> {
    model.check_len(x.len())?;
    Ok(&model.a * x + &model.c)
}

/// Number of distinct monomials `{1, x_i, x_i x_j (i <= j)}` in `d` variables.
pub fn quadratic_term_count(d: usize) -> usize {
    1 + d + d * (d + 1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Ridge penalty on the non-constant coefficients; zero means plain
    /// least squares, which requires `N >= p` and a full-rank design matrix.
    pub ridge_regularization: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            ridge_regularization: 0.0,
        }
    }
}

/// Fit the global quadratic to the `qoi_name` column of a design table.
pub fn fit_quadratic(table: &DesignTable, qoi_name: &str, options: FitOptions) -> Result<QuadraticModel> {
    let f = table
        .qoi_column(qoi_name)
        .map_err(|_| SurrogateError::UnknownQoi(qoi_name.to_string()))?;
    fit_quadratic_points(&table.design_matrix(), &f, options)
}

/// Fit the global quadratic to `N` points given as the rows of `x`.
pub fn fit_quadratic_points(x: &DMatrix<f64>, f: &[f64], options: FitOptions) -> Result<QuadraticModel> {
    let (n, d) = x.shape();
    if f.len() != n {
        return Err(SurrogateError::LengthMismatch {
            expected: n,
            found: f.len(),
        });
    }
    let terms = quadratic_term_count(d);
    let mut basis = DMatrix::zeros(n, terms);
    for i in 0..n {
        basis[(i, 0)] = 1.0;
        for j in 0..d {
            basis[(i, 1 + j)] = x[(i, j)];
        }
        let mut col = 1 + d;
        for j in 0..d {
            for k in j..d {
                basis[(i, col)] = x[(i, j)] * x[(i, k)];
                col += 1;
            }
        }
    }
    let penalized: Vec<usize> = (1..terms).collect();
    let fit = solve_least_squares(
        &basis,
        &DVector::from_column_slice(f),
        options.ridge_regularization,
        &penalized,
    )?;
    let beta = fit.coefficients;

    // beta_jj x_j^2 = 1/2 A_jj x_j^2 and beta_jk x_j x_k = A_jk x_j x_k (j < k).
    let mut a = DMatrix::zeros(d, d);
    let mut col = 1 + d;
    for j in 0..d {
        for k in j..d {
            if j == k {
                a[(j, j)] = 2.0 * beta[col];
            } else {
                a[(j, k)] = beta[col];
                a[(k, j)] = beta[col];
            }
            col += 1;
        }
    }
    let c = beta.rows(1, d).into_owned();
    QuadraticModel::new(a, c, beta[0])
}
