//! Design-of-experiment tables.
//!
//! Every design lives in the normalized hypercube `[-1, 1]^d` with a uniform
//! input density; raw engineering values are mapped per variable with an
//! affine transform (`lower -> -1`, `upper -> +1`). The row order of a
//! [`DesignTable`] is the canonical design index shared by the plots, the
//! geometry catalog and the session state.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surrogate::QuadraticModel;

/// Density tag accepted in `domain.json`.
pub const UNIFORM_HYPERCUBE: &str = "uniform-hypercube";

/// Name of the optional CSV column carrying a mesh key per design.
pub const GEOMETRY_KEY_COLUMN: &str = "geometry_key";

const RANGE_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: invalid domain file: {source}", path.display())]
    DomainJson {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("unsupported input density `{0}` (only `uniform-hypercube` is supported)")]
    UnsupportedDensity(String),
    #[error("duplicate header column `{0}`")]
    DuplicateHeader(String),
    #[error("header has {found} columns but the domain declares d = {d} design variables")]
    HeaderTooShort { d: usize, found: usize },
    #[error("row {row}: expected {expected} fields, found {found}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column `{column}`: non-finite value")]
    NonFinite { row: usize, column: String },
    #[error("component {index}: value {value} outside bounds [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<DatasetError>,
    },
    #[error("expected a vector of length {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("design table must contain at least one sample")]
    Empty,
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("unknown quantity of interest `{0}`")]
    UnknownQoi(String),
    #[error("design table invariant violated: {0}")]
    Invalid(String),
    #[error("oracle directions have {found} rows but the table has d = {expected}")]
    DirectionMismatch { expected: usize, found: usize },
    #[error("oracle directions are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("invalid oracle: {0}")]
    InvalidOracle(String),
}

pub type Result<T, E = DatasetError> = std::result::Result<T, E>;

/// The design space: `d` variables with raw engineering bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainFile", into = "DomainFile")]
pub struct DomainSpec {
    bounds: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct DomainFile {
    d: usize,
    bounds: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<String>,
}

impl TryFrom<DomainFile> for DomainSpec {
    type Error = DatasetError;

    fn try_from(file: DomainFile) -> Result<Self> {
        if let Some(density) = file.density {
            if density != UNIFORM_HYPERCUBE {
                return Err(DatasetError::UnsupportedDensity(density));
            }
        }
        if file.bounds.len() != file.d {
            return Err(DatasetError::InvalidDomain(format!(
                "d = {} but {} bound pairs given",
                file.d,
                file.bounds.len()
            )));
        }
        DomainSpec::new(file.bounds.into_iter().map(|[lo, hi]| (lo, hi)).collect())
    }
}

impl From<DomainSpec> for DomainFile {
    fn from(spec: DomainSpec) -> Self {
        DomainFile {
            d: spec.bounds.len(),
            bounds: spec.bounds.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            density: Some(UNIFORM_HYPERCUBE.to_string()),
        }
    }
}

impl DomainSpec {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(DatasetError::InvalidDomain("d must be at least 1".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(DatasetError::InvalidDomain(format!(
                    "bound {i}: need finite lower < upper, got ({lo}, {hi})"
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// The normalized hypercube itself, `[-1, 1]^d`.
    pub fn unit(d: usize) -> Result<Self> {
        Self::new(vec![(-1.0, 1.0); d])
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|e| match e {
            DatasetError::DomainJson { source, .. } => DatasetError::DomainJson {
                path: path.to_owned(),
                source,
            },
            other => other,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        // serde_json reports our TryFrom errors as custom messages; parse the
        // raw shape first so density/bounds errors keep their variants.
        let file: DomainFile =
            serde_json::from_str(text).map_err(|source| DatasetError::DomainJson {
                path: PathBuf::from("domain.json"),
                source,
            })?;
        DomainSpec::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&DomainFile::from(self.clone())).expect("domain serializes")
    }

    pub fn d(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }
}

/// Map raw engineering values onto `[-1, 1]^d`.
pub fn normalize_design(raw: &[f64], domain: &DomainSpec) -> Result<Vec<f64>> {
    if raw.len() != domain.d() {
        return Err(DatasetError::LengthMismatch {
            expected: domain.d(),
            found: raw.len(),
        });
    }
    raw.iter()
        .zip(domain.bounds())
        .enumerate()
        .map(|(index, (&value, &(lower, upper)))| {
            if !(lower..=upper).contains(&value) {
                return Err(DatasetError::OutOfBounds {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
            Ok(2.0 * (value - lower) / (upper - lower) - 1.0)
        })
        .collect()
}

/// Inverse of [`normalize_design`].
pub fn denormalize_design(x: &[f64], domain: &DomainSpec) -> Result<Vec<f64>> {
    if x.len() != domain.d() {
        return Err(DatasetError::LengthMismatch {
            expected: domain.d(),
            found: x.len(),
        });
    }
    Ok(x.iter()
        .zip(domain.bounds())
        .map(|(&xi, &(lower, upper))| lower + 0.5 * (xi + 1.0) * (upper - lower))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSample {
    /// Normalized coordinates.
    pub x: Vec<f64>,
    /// Quantity-of-interest values, aligned with [`DesignTable::qoi_names`].
    pub qoi: Vec<f64>,
    pub geometry_key: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignTable {
    domain: DomainSpec,
    qoi_names: Vec<String>,
    samples: Vec<DesignSample>,
}

impl DesignTable {
    pub fn new(
        domain: DomainSpec,
        qoi_names: Vec<String>,
        samples: Vec<DesignSample>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(DatasetError::Empty);
        }
        let mut seen = HashSet::new();
        for name in &qoi_names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateHeader(name.clone()));
            }
        }
        let d = domain.d();
        for (row, sample) in samples.iter().enumerate() {
            if sample.x.len() != d || sample.qoi.len() != qoi_names.len() {
                return Err(DatasetError::DimensionMismatch {
                    row,
                    expected: d + qoi_names.len(),
                    found: sample.x.len() + sample.qoi.len(),
                });
            }
            if let Some(i) = sample
                .x
                .iter()
                .position(|v| !v.is_finite() || v.abs() > 1.0 + RANGE_TOL)
            {
                return Err(DatasetError::Invalid(format!(
                    "row {row}: normalized component {i} = {} outside [-1, 1]",
                    sample.x[i]
                )));
            }
            if let Some(k) = sample.qoi.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite {
                    row,
                    column: qoi_names[k].clone(),
                });
            }
        }
        Ok(Self {
            domain,
            qoi_names,
            samples,
        })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn d(&self) -> usize {
        self.domain.d()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn qoi_names(&self) -> &[String] {
        &self.qoi_names
    }

    pub fn samples(&self) -> &[DesignSample] {
        &self.samples
    }

    pub fn qoi_index(&self, name: &str) -> Result<usize> {
        self.qoi_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DatasetError::UnknownQoi(name.to_string()))
    }

    pub fn qoi_column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.qoi_index(name)?;
        Ok(self.samples.iter().map(|s| s.qoi[k]).collect())
    }

    /// Designs as an `N x d` matrix, one row per design.
    pub fn design_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.d(), |i, j| self.samples[i].x[j])
    }

    /// Mesh key of design `index`: the `geometry_key` column when present,
    /// otherwise `design_0000.stl` style.
    pub fn geometry_key(&self, index: usize) -> Option<String> {
        self.samples.get(index).map(|s| {
            s.geometry_key
                .clone()
                .unwrap_or_else(|| default_geometry_key(index))
        })
    }

    /// Table with rows reordered so that row `k` is the old row `order[k]`.
    pub fn reorder(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if order.len() != self.len() {
            return Err(DatasetError::LengthMismatch {
                expected: self.len(),
                found: order.len(),
            });
        }
        for &i in order {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(DatasetError::Invalid(format!(
                    "row order is not a permutation (index {i})"
                )));
            }
        }
        Ok(Self {
            domain: self.domain.clone(),
            qoi_names: self.qoi_names.clone(),
            samples: order.iter().map(|&i| self.samples[i].clone()).collect(),
        })
    }

    /// Add (or overwrite) a quantity of interest column.
    pub fn with_qoi(&self, name: &str, values: &[f64]) -> Result<Self> {
        if values.len() != self.len() {
            return Err(DatasetError::LengthMismatch {
                expected: self.len(),
                found: values.len(),
            });
        }
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::NonFinite {
                row,
                column: name.to_string(),
            });
        }
        let mut table = self.clone();
        match table.qoi_names.iter().position(|n| n == name) {
            Some(k) => {
                for (s, &v) in table.samples.iter_mut().zip(values) {
                    s.qoi[k] = v;
                }
            }
            None => {
                table.qoi_names.push(name.to_string());
                for (s, &v) in table.samples.iter_mut().zip(values) {
                    s.qoi.push(v);
                }
            }
        }
        Ok(table)
    }

    pub fn with_geometry_keys(mut self, keys: Vec<Option<String>>) -> Result<Self> {
        if keys.len() != self.len() {
            return Err(DatasetError::LengthMismatch {
                expected: self.len(),
                found: keys.len(),
            });
        }
        for (s, k) in self.samples.iter_mut().zip(keys) {
            s.geometry_key = k;
        }
        Ok(self)
    }

    /// Write the table as CSV in raw engineering units.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let path = PathBuf::from("<csv output>");
        let csv_err = |source| DatasetError::Csv {
            path: path.clone(),
            source,
        };
        let with_keys = self.samples.iter().any(|s| s.geometry_key.is_some());
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.d()).map(|i| format!("x{i}")).collect();
        header.extend(self.qoi_names.iter().cloned());
        if with_keys {
            header.push(GEOMETRY_KEY_COLUMN.to_string());
        }
        out.write_record(&header).map_err(csv_err)?;
        for (i, sample) in self.samples.iter().enumerate() {
            let raw = denormalize_design(&sample.x, &self.domain)?;
            let mut record: Vec<String> = raw
                .iter()
                .chain(&sample.qoi)
                .map(|v| format!("{v:?}"))
                .collect();
            if with_keys {
                record.push(self.geometry_key(i).unwrap_or_default());
            }
            out.write_record(&record).map_err(csv_err)?;
        }
        out.flush().map_err(|source| DatasetError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(())
    }
}

pub fn default_geometry_key(index: usize) -> String {
    format!("design_{index:04}.stl")
}

/// Load a CSV design table, normalizing raw values into `[-1, 1]^d`.
pub fn load_design_table(path: &Path, domain: &DomainSpec) -> Result<DesignTable> {
    let mut file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)
        .map_err(|source| DatasetError::Io {
            path: path.to_owned(),
            source,
        })?;
    parse_design_table(&bytes, domain).map_err(|e| match e {
        DatasetError::Csv { source, .. } => DatasetError::Csv {
            path: path.to_owned(),
            source,
        },
        other => other,
    })
}

/// Parse CSV bytes; see [`load_design_table`].
pub fn parse_design_table(bytes: &[u8], domain: &DomainSpec) -> Result<DesignTable> {
    let csv_err = |source| DatasetError::Csv {
        path: PathBuf::from("<csv input>"),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(DatasetError::DuplicateHeader(name.clone()));
        }
    }
    let d = domain.d();
    if header.len() < d {
        return Err(DatasetError::HeaderTooShort {
            d,
            found: header.len(),
        });
    }
    let key_column = header.iter().position(|h| h == GEOMETRY_KEY_COLUMN);
    if key_column.is_some_and(|k| k < d) {
        return Err(DatasetError::Invalid(format!(
            "`{GEOMETRY_KEY_COLUMN}` must follow the {d} design columns"
        )));
    }
    let qoi_columns: Vec<usize> = (d..header.len()).filter(|&c| Some(c) != key_column).collect();
    let qoi_names: Vec<String> = qoi_columns.iter().map(|&c| header[c].clone()).collect();

    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(DatasetError::DimensionMismatch {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        let number = |c: usize| -> Result<f64> {
            let text = &record[c];
            let value: f64 = text.parse().map_err(|_| DatasetError::Parse {
                row,
                column: header[c].clone(),
                value: text.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DatasetError::NonFinite {
                    row,
                    column: header[c].clone(),
                });
            }
            Ok(value)
        };
        let raw = (0..d).map(number).collect::<Result<Vec<_>>>()?;
        let qoi = qoi_columns
            .iter()
            .map(|&c| number(c))
            .collect::<Result<Vec<_>>>()?;
        let x = normalize_design(&raw, domain).map_err(|e| DatasetError::Row {
            row,
            source: Box::new(e),
        })?;
        let geometry_key = key_column
            .map(|c| record[c].to_string())
            .filter(|k| !k.is_empty());
        samples.push(DesignSample {
            x,
            qoi,
            geometry_key,
        });
    }
    DesignTable::new(domain.clone(), qoi_names, samples)
}

/// `n` i.i.d. uniform draws on `[-1, 1]^d`; deterministic in `seed`.
pub fn sample_uniform_doe(domain: &DomainSpec, n: usize, seed: u64) -> Result<DesignTable> {
    if n == 0 {
        return Err(DatasetError::ZeroSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| DesignSample {
            x: (0..domain.d())
                .map(|_| rng.random_range(-1.0..=1.0))
                .collect(),
            qoi: Vec::new(),
            geometry_key: None,
        })
        .collect();
    DesignTable::new(domain.clone(), Vec::new(), samples)
}

/// `k` orthonormal columns in `R^d`, drawn from the Haar measure via QR.
pub fn random_orthonormal(d: usize, k: usize, seed: u64) -> DMatrix<f64> {
    assert!(k <= d, "cannot draw {k} orthonormal columns in R^{d}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
    let q = gaussian.qr().q();
    q.columns(0, k).into_owned()
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleKind {
    /// `f = (u1'x + 0.2)^2`
    ExactRidge1d,
    /// `f = (u1'x)^2 + 0.5 (u2'x)^2`
    ExactRidge2d,
    /// A stored quadratic model evaluated exactly.
    FullQuadratic(QuadraticModel),
}

/// Synthetic quantity of interest with a known ridge structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticOracle {
    kind: OracleKind,
    directions: DMatrix<f64>,
    noise_sd: f64,
    seed: u64,
}

impl SyntheticOracle {
    pub fn new(kind: OracleKind, directions: DMatrix<f64>, noise_sd: f64, seed: u64) -> Result<Self> {
        if !noise_sd.is_finite() || noise_sd < 0.0 {
            return Err(DatasetError::InvalidOracle(format!(
                "noise_sd must be finite and nonnegative, got {noise_sd}"
            )));
        }
        let required = match &kind {
            OracleKind::ExactRidge1d => 1,
            OracleKind::ExactRidge2d => 2,
            OracleKind::FullQuadratic(model) => {
                if directions.nrows() != model.dim() {
                    return Err(DatasetError::DirectionMismatch {
                        expected: model.dim(),
                        found: directions.nrows(),
                    });
                }
                directions.ncols()
            }
        };
        if directions.ncols() != required {
            return Err(DatasetError::InvalidOracle(format!(
                "{kind:?} needs {required} direction(s), got {}",
                directions.ncols()
            )));
        }
        let gram = directions.transpose() * &directions;
        let deviation = (gram - DMatrix::identity(required, required)).amax();
        if deviation > ORTHONORMAL_TOL {
            return Err(DatasetError::NotOrthonormal(deviation));
        }
        Ok(Self {
            kind,
            directions,
            noise_sd,
            seed,
        })
    }

    /// Oracle of the given ridge kind with random orthonormal directions.
    pub fn random_ridge(kind: OracleKind, d: usize, noise_sd: f64, seed: u64) -> Result<Self> {
        let k = match kind {
            OracleKind::ExactRidge1d => 1,
            OracleKind::ExactRidge2d => 2,
            OracleKind::FullQuadratic(_) => {
                return Err(DatasetError::InvalidOracle(
                    "use SyntheticOracle::full_quadratic".into(),
                ))
            }
        };
        if d < k {
            return Err(DatasetError::InvalidOracle(format!(
                "d = {d} is too small for {k} ridge directions"
            )));
        }
        // Directions and noise use independent streams of the same seed.
        let directions = random_orthonormal(d, k, seed ^ 0x9e37_79b9_7f4a_7c15);
        Self::new(kind, directions, noise_sd, seed)
    }

    pub fn full_quadratic(model: QuadraticModel, noise_sd: f64, seed: u64) -> Result<Self> {
        let d = model.dim();
        Self::new(
            OracleKind::FullQuadratic(model),
            DMatrix::zeros(d, 0),
            noise_sd,
            seed,
        )
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.directions.nrows()
    }

    /// Noise-free value at `x`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(DatasetError::LengthMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let proj = |j: usize| -> f64 {
            self.directions
                .column(j)
                .iter()
                .zip(x)
                .map(|(u, v)| u * v)
                .sum()
        };
        Ok(match &self.kind {
            OracleKind::ExactRidge1d => (proj(0) + 0.2).powi(2),
            OracleKind::ExactRidge2d => proj(0).powi(2) + 0.5 * proj(1).powi(2),
            OracleKind::FullQuadratic(model) => model
                .evaluate(&DVector::from_column_slice(x))
                .expect("dimension checked above"),
        })
    }
}

/// Fill `qoi_name` for every sample from a synthetic oracle.
pub fn evaluate_oracle(
    oracle: &SyntheticOracle,
    table: &DesignTable,
    qoi_name: &str,
) -> Result<DesignTable> {
    if oracle.dim() != table.d() {
        return Err(DatasetError::DirectionMismatch {
            expected: table.d(),
            found: oracle.dim(),
        });
    }
    let mut values = table
        .samples()
        .iter()
        .map(|s| oracle.value(&s.x))
        .collect::<Result<Vec<_>>>()?;
    if oracle.noise_sd > 0.0 {
        let normal = Normal::new(0.0, oracle.noise_sd)
            .map_err(|e| DatasetError::InvalidOracle(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(oracle.seed);
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    table.with_qoi(qoi_name, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn domain(bounds: &[(f64, f64)]) -> DomainSpec {
        DomainSpec::new(bounds.to_vec()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let d = domain(&[(0.0, 10.0)]);
        assert_eq!(normalize_design(&[5.0], &d).unwrap(), vec![0.0]);
        assert_eq!(normalize_design(&[0.0], &d).unwrap(), vec![-1.0]);
        assert_eq!(normalize_design(&[10.0], &d).unwrap(), vec![1.0]);
        let d = domain(&[(-2.0, 2.0)]);
        assert_eq!(normalize_design(&[1.0], &d).unwrap(), vec![0.5]);
    }

    #[test]
    fn normalize_rejects_out_of_bounds() {
        let d = domain(&[(0.0, 1.0), (0.0, 10.0)]);
        match normalize_design(&[0.5, 10.5], &d) {
            Err(DatasetError::OutOfBounds { index, value, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(value, 10.5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            normalize_design(&[0.5], &d),
            Err(DatasetError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn domain_rejects_bad_bounds_and_density() {
        assert!(DomainSpec::new(vec![]).is_err());
        assert!(DomainSpec::new(vec![(1.0, 1.0)]).is_err());
        assert!(DomainSpec::new(vec![(2.0, 1.0)]).is_err());
        let err = DomainSpec::from_json_str(
            r#"{"d": 1, "bounds": [[0, 1]], "density": "gaussian"}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::UnsupportedDensity(_)));
        let err = DomainSpec::from_json_str(r#"{"d": 2, "bounds": [[0, 1]]}"#).unwrap_err();
        assert!(matches!(err, DatasetError::InvalidDomain(_)));
        let spec = DomainSpec::from_json_str(r#"{"d": 2, "bounds": [[0, 1], [-3, 4]]}"#).unwrap();
        assert_eq!(spec.bounds(), &[(0.0, 1.0), (-3.0, 4.0)]);
        assert_eq!(DomainSpec::from_json_str(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn parse_small_table() {
        let d = domain(&[(0.0, 10.0), (-1.0, 1.0)]);
        let csv = "x1,x2,efficiency\n5,0,0.9\n0,1,0.8\n10,-1,0.85\n";
        let table = parse_design_table(csv.as_bytes(), &d).unwrap();
        assert_eq!(table.len(), 3);
        assert_eq!(table.qoi_names(), &["efficiency".to_string()]);
        assert_eq!(table.samples()[1].x, vec![-1.0, 1.0]);
        assert_eq!(table.qoi_column("efficiency").unwrap(), vec![0.9, 0.8, 0.85]);
        assert_eq!(table.geometry_key(2).unwrap(), "design_0002.stl");
    }

    #[test]
    fn parse_geometry_key_column() {
        let d = domain(&[(0.0, 1.0)]);
        let csv = "x1,pr,geometry_key,eff\n0.5,1.2,blade_a.stl,0.9\n";
        let table = parse_design_table(csv.as_bytes(), &d).unwrap();
        assert_eq!(table.qoi_names(), &["pr".to_string(), "eff".to_string()]);
        assert_eq!(table.geometry_key(0).unwrap(), "blade_a.stl");
        assert_eq!(table.samples()[0].qoi, vec![1.2, 0.9]);
    }

    #[test]
    fn parse_errors() {
        let d = domain(&[(0.0, 10.0), (-1.0, 1.0)]);
        let nan = "x1,x2,eff\n1,0,0.5\n2,NaN,0.5\n";
        match parse_design_table(nan.as_bytes(), &d) {
            Err(DatasetError::NonFinite { row, column }) => {
                assert_eq!(row, 1);
                assert_eq!(column, "x2");
            }
            other => panic!("unexpected {other:?}"),
        }
        let short = "x1,x2,eff\n1,0\n";
        assert!(matches!(
            parse_design_table(short.as_bytes(), &d),
            Err(DatasetError::DimensionMismatch { row: 0, expected: 3, found: 2 })
        ));
        let dup = "x1,x1,eff\n1,0,0.5\n";
        assert!(matches!(
            parse_design_table(dup.as_bytes(), &d),
            Err(DatasetError::DuplicateHeader(_))
        ));
        let oob = "x1,x2,eff\n11,0,0.5\n";
        match parse_design_table(oob.as_bytes(), &d) {
            Err(DatasetError::Row { row: 0, source }) => {
                assert!(matches!(*source, DatasetError::OutOfBounds { index: 0, .. }))
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "x1,x2,eff\n1,zero,0.5\n";
        assert!(matches!(
            parse_design_table(text.as_bytes(), &d),
            Err(DatasetError::Parse { .. })
        ));
        let empty = "x1,x2,eff\n";
        assert!(matches!(
            parse_design_table(empty.as_bytes(), &d),
            Err(DatasetError::Empty)
        ));
    }

    #[test]
    fn csv_round_trip_through_raw_units() {
        let d = domain(&[(0.0, 10.0), (-2.0, 2.0)]);
        let table = sample_uniform_doe(&d, 20, 3).unwrap();
        let oracle = SyntheticOracle::random_ridge(OracleKind::ExactRidge1d, 2, 0.0, 1).unwrap();
        let table = evaluate_oracle(&oracle, &table, "pr").unwrap();
        let mut bytes = Vec::new();
        table.write_csv(&mut bytes).unwrap();
        let back = parse_design_table(&bytes, &d).unwrap();
        assert_eq!(back.qoi_names(), table.qoi_names());
        for (a, b) in back.samples().iter().zip(table.samples()) {
            for (u, v) in a.x.iter().zip(&b.x) {
                assert!((u - v).abs() <= 1e-12);
            }
            assert_eq!(a.qoi, b.qoi);
        }
    }

    #[test]
    fn doe_is_deterministic_and_in_range() {
        let d = DomainSpec::unit(3).unwrap();
        let a = sample_uniform_doe(&d, 10, 7).unwrap();
        let b = sample_uniform_doe(&d, 10, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_uniform_doe(&d, 10, 8).unwrap());
        assert!(matches!(
            sample_uniform_doe(&d, 0, 7),
            Err(DatasetError::ZeroSamples)
        ));
    }

    #[test]
    fn doe_moments_match_uniform() {
        // mean 0 and variance 1/3 of U(-1, 1), computed directly from the draws
        let d = DomainSpec::unit(1).unwrap();
        let table = sample_uniform_doe(&d, 100_000, 1).unwrap();
        let xs: Vec<f64> = table.samples().iter().map(|s| s.x[0]).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0 / 3.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn doe_in_paper_regime() {
        let d = DomainSpec::unit(25).unwrap();
        let table = sample_uniform_doe(&d, 548, 42).unwrap();
        assert_eq!(table.len(), 548);
        assert_eq!(table.d(), 25);
        assert!(table.qoi_names().is_empty());
    }

    fn unit_vector(d: usize, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(d, 1, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn oracle_examples() {
        let d = DomainSpec::unit(3).unwrap();
        let sample = |x: Vec<f64>| DesignSample {
            x,
            qoi: vec![],
            geometry_key: None,
        };
        let table = DesignTable::new(
            d.clone(),
            vec![],
            vec![sample(vec![0.8, -0.4, 0.9]), sample(vec![1.0, 1.0, 0.0])],
        )
        .unwrap();

        let o1 = SyntheticOracle::new(OracleKind::ExactRidge1d, unit_vector(3, 0), 0.0, 0).unwrap();
        let t1 = evaluate_oracle(&o1, &table, "f").unwrap();
        assert!((t1.qoi_column("f").unwrap()[0] - 1.0).abs() < 1e-15);

        let u = DMatrix::from_fn(3, 2, |r, c| if r == c { 1.0 } else { 0.0 });
        let o2 = SyntheticOracle::new(OracleKind::ExactRidge2d, u, 0.0, 0).unwrap();
        let t2 = evaluate_oracle(&o2, &table, "f").unwrap();
        assert_eq!(t2.qoi_column("f").unwrap()[1], 1.5);
    }

    #[test]
    fn noisy_oracle_is_seeded() {
        let d = DomainSpec::unit(4).unwrap();
        let table = sample_uniform_doe(&d, 50, 1).unwrap();
        let oracle = SyntheticOracle::random_ridge(OracleKind::ExactRidge2d, 4, 0.1, 9).unwrap();
        let a = evaluate_oracle(&oracle, &table, "q").unwrap();
        let b = evaluate_oracle(&oracle, &table, "q").unwrap();
        assert_eq!(a.qoi_column("q").unwrap(), b.qoi_column("q").unwrap());
        let clean = SyntheticOracle::new(
            OracleKind::ExactRidge2d,
            oracle.directions().clone(),
            0.0,
            9,
        )
        .unwrap();
        let c = evaluate_oracle(&clean, &table, "q").unwrap();
        assert_ne!(a.qoi_column("q").unwrap(), c.qoi_column("q").unwrap());
    }

    #[test]
    fn oracle_validation() {
        let skewed = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(
            SyntheticOracle::new(OracleKind::ExactRidge1d, skewed, 0.0, 0),
            Err(DatasetError::NotOrthonormal(_))
        ));
        assert!(SyntheticOracle::new(OracleKind::ExactRidge2d, unit_vector(3, 0), 0.0, 0).is_err());
        assert!(SyntheticOracle::new(OracleKind::ExactRidge1d, unit_vector(3, 0), -1.0, 0).is_err());
        let oracle = SyntheticOracle::new(OracleKind::ExactRidge1d, unit_vector(3, 0), 0.0, 0).unwrap();
        let table = sample_uniform_doe(&DomainSpec::unit(2).unwrap(), 3, 0).unwrap();
        assert!(matches!(
            evaluate_oracle(&oracle, &table, "f"),
            Err(DatasetError::DirectionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn random_orthonormal_columns() {
        let u = random_orthonormal(25, 2, 5);
        let gram = u.transpose() * &u;
        assert!((gram - DMatrix::<f64>::identity(2, 2)).amax() < 1e-13);
    }

    proptest! {
        #[test]
        fn normalize_round_trip(
            pairs in prop::collection::vec((-1e3f64..1e3, 1e-3f64..1e3, 0.0f64..=1.0), 1..8)
        ) {
            let bounds: Vec<_> = pairs.iter().map(|&(lo, w, _)| (lo, lo + w)).collect();
            let raw: Vec<_> = pairs.iter().map(|&(lo, w, t)| (lo + t * w).min(lo + w)).collect();
            let d = DomainSpec::new(bounds).unwrap();
            let x = normalize_design(&raw, &d).unwrap();
            prop_assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
            let back = denormalize_design(&x, &d).unwrap();
            for (a, b) in raw.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }

        #[test]
        fn doe_samples_stay_in_cube(d in 1usize..10, n in 1usize..50, seed: u64) {
            let table = sample_uniform_doe(&DomainSpec::unit(d).unwrap(), n, seed).unwrap();
            prop_assert!(table.samples().iter().flat_map(|s| &s.x).all(|v| (-1.0..=1.0).contains(v)));
        }

        #[test]
        fn ridge_oracles_ignore_orthogonal_moves(
            d in 3usize..12,
            seed: u64,
            two_d: bool,
            z in prop::collection::vec(-1.0f64..1.0, 12),
            h in prop::collection::vec(-1.0f64..1.0, 12),
        ) {
            let kind = if two_d { OracleKind::ExactRidge2d } else { OracleKind::ExactRidge1d };
            let oracle = SyntheticOracle::random_ridge(kind, d, 0.0, seed).unwrap();
            let u = oracle.directions();
            let h = DVector::from_column_slice(&h[..d]);
            let h_perp = &h - u * (u.transpose() * &h);
            let x = DVector::from_column_slice(&z[..d]);
            let moved = &x + &h_perp;
            let f0 = oracle.value(x.as_slice()).unwrap();
            let f1 = oracle.value(moved.as_slice()).unwrap();
            prop_assert!((f0 - f1).abs() <= 1e-10, "{} vs {}", f0, f1);
            // noise-free evaluation is a pure function of x
            prop_assert_eq!(f0, oracle.value(x.as_slice()).unwrap());
        }
    }
}
