use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ridgeview::dataset::{load_design_table, DatasetError, DesignTable, DomainSpec};
use ridgeview::demo::{DESIGNS_FILE, DOMAIN_FILE};
use ridgeview::geometry::{GeometryCatalog, GeometryError, MANIFEST_FILE};
use ridgeview::linkage::PlotId;
use ridgeview::surrogate::export::{PlotFile, SubspaceFile};
use ridgeview::surrogate::{
    build_summary_plot, covariance_analytic, eigendecompose, fit_quadratic, fit_ridge_profile, select_dimension_with,
    ActiveSubspace, FitOptions, RidgeProfile, SummaryPlot, SurrogateError, DEFAULT_GAP_RATIO,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("qoi `{qoi}`: {source}")]
    Qoi { qoi: String, source: SurrogateError },
    #[error("dataset needs at least one qoi")]
    NoQoi,
    #[error("geometry catalog has {catalog} designs but the table has {table}")]
    Misaligned { catalog: usize, table: usize },
    #[error("{}: {source}", path.display())]
    Dataset { path: PathBuf, source: DatasetError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{}: {message}", path.display())]
    DataRoot { path: PathBuf, message: String },
}

impl BundleError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, BundleError::Qoi { source, .. } if source.is_numerical())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleOptions {
    pub max_m: usize,
    pub degree: usize,
    pub gap_ratio: f64,
    pub fit: FitOptions,
}

impl Default for BundleOptions {
    fn default() -> Self {
        Self {
            max_m: 2,
            degree: 2,
            gap_ratio: DEFAULT_GAP_RATIO,
            fit: FitOptions::default(),
        }
    }
}

/// Subspace, summary plot and ridge profile of one quantity of interest.
#[derive(Debug, Clone)]
pub struct QoiAnalysis {
    pub subspace: ActiveSubspace,
    pub plot: SummaryPlot,
    pub profile: RidgeProfile,
}

/// One quantity of interest through fit, covariance, eigendecomposition,
/// dimension selection, summary plot and ridge profile.
pub fn analyze_qoi(table: &DesignTable, qoi: &str, options: &BundleOptions) -> Result<QoiAnalysis, SurrogateError> {
    let model = fit_quadratic(table, qoi, options.fit)?;
    let subspace = eigendecompose(&covariance_analytic(&model))?;
    let (m, degenerate) = select_dimension_with(subspace.eigenvalues(), options.max_m, options.gap_ratio)?;
    let subspace = subspace.with_dimension(m, degenerate)?;
    let plot = build_summary_plot(table, &subspace, qoi)?;
    let profile = fit_ridge_profile(&plot, options.degree)?;
    Ok(QoiAnalysis {
        subspace,
        plot,
        profile,
    })
}

/// Everything the scene renders for one dataset. Plots and the geometry
/// catalog are index-aligned with the table.
#[derive(Debug)]
pub struct DatasetBundle {
    pub id: String,
    pub table: DesignTable,
    pub analyses: BTreeMap<String, QoiAnalysis>,
    pub geometry: GeometryCatalog,
    plot_qois: [String; 2],
}

pub fn compute_bundle(
    id: &str,
    table: DesignTable,
    qoi_names: &[String],
    geometry: GeometryCatalog,
    options: &BundleOptions,
) -> Result<DatasetBundle, BundleError> {
    let first = qoi_names.first().ok_or(BundleError::NoQoi)?;
    if geometry.len() != table.len() {
        return Err(BundleError::Misaligned {
            catalog: geometry.len(),
            table: table.len(),
        });
    }
    let mut analyses = BTreeMap::new();
    for qoi in qoi_names {
        let analysis = analyze_qoi(&table, qoi, options).map_err(|source| BundleError::Qoi {
            qoi: qoi.clone(),
            source,
        })?;
        analyses.insert(qoi.clone(), analysis);
    }
    let second = qoi_names.get(1).unwrap_or(first);
    Ok(DatasetBundle {
        id: id.to_string(),
        table,
        analyses,
        geometry,
        plot_qois: [first.clone(), second.clone()],
    })
}

#[derive(Serialize)]
struct ProfileSummary<'a> {
    m: usize,
    degree: usize,
    coefficients: &'a [f64],
    training_rmse: f64,
}

#[derive(Serialize)]
struct Metadata<'a> {
    id: &'a str,
    n: usize,
    d: usize,
    qois: Vec<&'a str>,
    plots: BTreeMap<PlotId, &'a str>,
    profiles: BTreeMap<&'a str, ProfileSummary<'a>>,
    has_context: bool,
}

impl DatasetBundle {
    /// Quantity of interest shown on each plot: the first qoi on A, the
    /// second (or the first again) on B.
    pub fn plot_qoi(&self, plot: PlotId) -> &str {
        match plot {
            PlotId::A => &self.plot_qois[0],
            PlotId::B => &self.plot_qois[1],
        }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn metadata_json(&self) -> Vec<u8> {
        let meta = Metadata {
            id: &self.id,
            n: self.table.len(),
            d: self.table.d(),
            qois: self.analyses.keys().map(String::as_str).collect(),
            plots: PlotId::ALL.iter().map(|&p| (p, self.plot_qoi(p))).collect(),
            profiles: self
                .analyses
                .iter()
                .map(|(q, a)| {
                    (
                        q.as_str(),
                        ProfileSummary {
                            m: a.profile.m,
                            degree: a.profile.degree,
                            coefficients: &a.profile.coefficients,
                            training_rmse: a.profile.training_rmse,
                        },
                    )
                })
                .collect(),
            has_context: self.geometry.context().is_some(),
        };
        ridgeview::json::to_vec(&meta).expect("metadata serializes")
    }

    pub fn plot_json(&self, qoi: &str) -> Option<Vec<u8>> {
        let a = self.analyses.get(qoi)?;
        Some(ridgeview::json::to_vec(&PlotFile::from(&a.plot)).expect("plot serializes"))
    }

    pub fn subspace_json(&self, qoi: &str) -> Option<Vec<u8>> {
        let a = self.analyses.get(qoi)?;
        let file = SubspaceFile::new(qoi, &a.subspace).expect("analysed subspaces have a dimension");
        Some(ridgeview::json::to_vec(&file).expect("subspace serializes"))
    }

    /// Metadata, subspaces and plots in one deterministic document.
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(self.metadata_json());
        for qoi in self.analyses.keys() {
            out.push(b'\n');
            out.extend(self.subspace_json(qoi).expect("known qoi"));
            out.push(b'\n');
            out.extend(self.plot_json(qoi).expect("known qoi"));
        }
        out
    }
}

/// Load one dataset directory (`domain.json`, `designs.csv`,
/// `geometry.json`) and compute its bundle over every qoi column.
pub fn load_dataset_dir(dir: &Path, options: &BundleOptions) -> Result<DatasetBundle, BundleError> {
    let id = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| BundleError::DataRoot {
            path: dir.to_path_buf(),
            message: "dataset directory name is not valid UTF-8".into(),
        })?;
    let domain_path = dir.join(DOMAIN_FILE);
    let domain = DomainSpec::from_json_file(&domain_path).map_err(|source| BundleError::Dataset {
        path: domain_path,
        source,
    })?;
    let designs_path = dir.join(DESIGNS_FILE);
    let table = load_design_table(&designs_path, &domain).map_err(|source| BundleError::Dataset {
        path: designs_path,
        source,
    })?;
    let geometry = GeometryCatalog::from_manifest(&dir.join(MANIFEST_FILE), &table)?;
    let qois = table.qoi_names().to_vec();
    compute_bundle(id, table, &qois, geometry, options)
}

/// Every subdirectory of `root` holding a `domain.json` is a dataset;
/// hidden directories are skipped. Datasets are returned sorted by id.
pub fn load_data_root(root: &Path, options: &BundleOptions) -> Result<Vec<DatasetBundle>, BundleError> {
    let root_err = |message: String| BundleError::DataRoot {
        path: root.to_path_buf(),
        message,
    };
    let entries = std::fs::read_dir(root).map_err(|e| root_err(e.to_string()))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| root_err(e.to_string()))?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if path.is_dir() && !hidden && path.join(DOMAIN_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        return Err(root_err("no dataset directories (with domain.json) found".into()));
    }
    dirs.iter().map(|d| load_dataset_dir(d, options)).collect()
}

/// `--data-root` when given, else `AEROVR_DATA_ROOT`.
pub fn resolve_data_root(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(DATA_ROOT_ENV).map(PathBuf::from))
}

pub const DATA_ROOT_ENV: &str = "AEROVR_DATA_ROOT";
