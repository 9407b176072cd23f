use nalgebra::{DMatrix, DVector};

use super::lstsq::solve_least_squares;
use super::subspace::{project, ActiveSubspace};
use super::{Result, SurrogateError};
use crate::dataset::DesignTable;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryPoint {
    pub index: usize,
    pub y: Vec<f64>,
    pub f: f64,
}

/// Designs projected onto the active subspace, paired with one quantity of
/// interest. Point `i` is design `i` of the source table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryPlot {
    pub qoi_name: String,
    pub m: usize,
    pub points: Vec<SummaryPoint>,
}

impl SummaryPlot {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> Option<&SummaryPoint> {
        self.points.get(index).filter(|p| p.index == index)
    }
}

pub fn build_summary_plot(table: &DesignTable, subspace: &ActiveSubspace, qoi_name: &str) -> Result<SummaryPlot> {
    let m = subspace.m().ok_or(SurrogateError::DimensionUnset)?;
    if m > 2 {
        return Err(SurrogateError::PlotDimension(m));
    }
    let f = table
        .qoi_column(qoi_name)
        .map_err(|_| SurrogateError::UnknownQoi(qoi_name.to_string()))?;
    let points = table
        .samples()
        .iter()
        .zip(f)
        .enumerate()
        .map(|(index, (sample, f))| {
            let y = project(subspace, &DVector::from_column_slice(&sample.x))?;
            Ok(SummaryPoint {
                index,
                y: y.as_slice().to_vec(),
                f,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SummaryPlot {
        qoi_name: qoi_name.to_string(),
        m,
        points,
    })
}

/// Exponent tuples of the total-degree monomial basis in `m` variables,
/// graded by degree and reverse-lexicographic within a degree
/// (`1, y1, y2, y1^2, y1 y2, y2^2, ...`).
pub fn monomial_exponents(m: usize, degree: usize) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, remaining_vars: usize, remaining_deg: u32, out: &mut Vec<Vec<u32>>) {
        if remaining_vars == 1 {
            prefix.push(remaining_deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=remaining_deg).rev() {
            prefix.push(e);
            fill(prefix, remaining_vars - 1, remaining_deg - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        out.push(Vec::new());
        return out;
    }
    for total in 0..=degree as u32 {
        fill(&mut Vec::with_capacity(m), m, total, &mut out);
    }
    out
}

fn eval_monomials(exponents: &[Vec<u32>], y: &[f64]) -> Vec<f64> {
    exponents
        .iter()
        .map(|e| e.iter().zip(y).map(|(&p, &v)| v.powi(p as i32)).product())
        .collect()
}

/// Polynomial ridge profile `g` over the projected coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeProfile {
    pub qoi_name: String,
    pub m: usize,
    pub degree: usize,
    /// Coefficients in [`monomial_exponents`] order.
    pub coefficients: Vec<f64>,
    pub training_rmse: f64,
}

impl RidgeProfile {
    /// `g(y)`.
    pub fn evaluate(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.m {
            return Err(SurrogateError::LengthMismatch {
                expected: self.m,
                found: y.len(),
            });
        }
        let basis = eval_monomials(&monomial_exponents(self.m, self.degree), y);
        Ok(basis.iter().zip(&self.coefficients).map(|(b, c)| b * c).sum())
    }
}

/// Least-squares fit of `g` with the ridge directions held fixed at `W1`.
pub fn fit_ridge_profile(plot: &SummaryPlot, degree: usize) -> Result<RidgeProfile> {
    let exponents = monomial_exponents(plot.m, degree);
    let terms = exponents.len();
    if plot.points.len() < terms {
        return Err(SurrogateError::Underdetermined {
            points: plot.points.len(),
            coefficients: terms,
        });
    }
    if degree > 0 {
        let first = &plot.points[0].y;
        if plot.points.iter().all(|p| &p.y == first) {
            return Err(SurrogateError::DegenerateProjection);
        }
    }
    let basis = DMatrix::from_fn(plot.points.len(), terms, |i, j| {
        exponents[j]
            .iter()
            .zip(&plot.points[i].y)
            .map(|(&p, &v)| v.powi(p as i32))
            .product()
    });
    let f = DVector::from_iterator(plot.points.len(), plot.points.iter().map(|p| p.f));
    let fit = solve_least_squares(&basis, &f, 0.0, &[])?;
    Ok(RidgeProfile {
        qoi_name: plot.qoi_name.clone(),
        m: plot.m,
        degree,
        coefficients: fit.coefficients.as_slice().to_vec(),
        training_rmse: fit.residual_rms,
    })
}

/// `g(W1' x)`.
pub fn predict_ridge(profile: &RidgeProfile, subspace: &ActiveSubspace, x: &DVector<f64>) -> Result<f64> {
    let m = subspace.m().ok_or(SurrogateError::DimensionUnset)?;
    if m != profile.m {
        return Err(SurrogateError::LengthMismatch {
            expected: profile.m,
            found: m,
        });
    }
    let y = project(subspace, x)?;
    profile.evaluate(y.as_slice())
}
