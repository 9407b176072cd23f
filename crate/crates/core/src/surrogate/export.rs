//! File formats for computed subspaces and summary plots:
//! `subspace-<qoi>.json` and `plot-<qoi>.json`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ActiveSubspace, Result, SummaryPlot, SummaryPoint, SurrogateError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceFile {
    pub qoi: String,
    pub eigenvalues: Vec<f64>,
    /// Row-major: `W[i][j]` is component `i` of eigenvector `j`.
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub m: usize,
    pub degenerate: bool,
}

impl SubspaceFile {
    pub fn new(qoi: &str, subspace: &ActiveSubspace) -> Result<Self> {
        let m = subspace.m().ok_or(SurrogateError::DimensionUnset)?;
        let w = subspace.eigenvectors();
        Ok(Self {
            qoi: qoi.to_string(),
            eigenvalues: subspace.eigenvalues().to_vec(),
            w: w.row_iter().map(|r| r.iter().copied().collect()).collect(),
            m,
            degenerate: subspace.is_degenerate(),
        })
    }

    pub fn to_subspace(&self) -> Result<ActiveSubspace> {
        let d = self.eigenvalues.len();
        if self.w.len() != d || self.w.iter().any(|r| r.len() != d) {
            return Err(SurrogateError::LengthMismatch {
                expected: d,
                found: self.w.len(),
            });
        }
        let w = DMatrix::from_fn(d, d, |i, j| self.w[i][j]);
        ActiveSubspace::from_parts(self.eigenvalues.clone(), w, Some(self.m), self.degenerate)
    }

    pub fn file_name(qoi: &str) -> String {
        format!("subspace-{qoi}.json")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPointRecord {
    pub i: usize,
    pub y: Vec<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotFile {
    pub qoi: String,
    pub m: usize,
    pub points: Vec<PlotPointRecord>,
}

impl PlotFile {
    pub fn file_name(qoi: &str) -> String {
        format!("plot-{qoi}.json")
    }

    pub fn to_plot(&self) -> SummaryPlot {
        SummaryPlot {
            qoi_name: self.qoi.clone(),
            m: self.m,
            points: self
                .points
                .iter()
                .map(|p| SummaryPoint {
                    index: p.i,
                    y: p.y.clone(),
                    f: p.f,
                })
                .collect(),
        }
    }
}

impl From<&SummaryPlot> for PlotFile {
    fn from(plot: &SummaryPlot) -> Self {
        Self {
            qoi: plot.qoi_name.clone(),
            m: plot.m,
            points: plot
                .points
                .iter()
                .map(|p| PlotPointRecord {
                    i: p.index,
                    y: p.y.clone(),
                    f: p.f,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::random_orthonormal;
    use crate::json;

    #[test]
    fn subspace_file_round_trip() {
        let w = random_orthonormal(4, 4, 3);
        let s = ActiveSubspace::from_parts(vec![4.0, 1.0, 0.5, 0.0], w, Some(1), false).unwrap();
        let file = SubspaceFile::new("pr", &s).unwrap();
        let text = json::to_string(&file).unwrap();
        assert!(text.starts_with(r#"{"qoi":"pr","eigenvalues":[4.0000000000000000e0,"#));
        let back: SubspaceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_subspace().unwrap(), s);
    }

    #[test]
    fn plot_file_shape() {
        let plot = SummaryPlot {
            qoi_name: "eff".into(),
            m: 1,
            points: vec![SummaryPoint {
                index: 0,
                y: vec![0.5],
                f: 2.0,
            }],
        };
        let text = json::to_string(&PlotFile::from(&plot)).unwrap();
        assert_eq!(
            text,
            r#"{"qoi":"eff","m":1,"points":[{"i":0,"y":[5.0000000000000000e-1],"f":2.0000000000000000e0}]}"#
        );
        assert_eq!(PlotFile::file_name("eff"), "plot-eff.json");
    }
}
