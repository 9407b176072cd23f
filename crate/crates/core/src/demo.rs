//! Synthetic demo datasets.
//!
//! Designs are uniform draws over the blade's section variables. Two
//! quantities of interest are attached: `pressure_ratio`, an affine image of
//! a one-dimensional exact ridge, and `efficiency`, an affine image of a
//! two-dimensional one. Each design gets a procedurally perturbed blade mesh.
//! The values carry no aerodynamic meaning.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::dataset::{
    denormalize_design, evaluate_oracle, sample_uniform_doe, DatasetError, DesignTable, DomainSpec, OracleKind,
    SyntheticOracle,
};
use crate::geometry::blade::{hub_context, nominal_blade, perturbed_blade, raw_bounds, BladeConfig};
use crate::geometry::{serialize_stl, GeometryError, GeometryManifest, StlFormat, TriangleMesh, MANIFEST_FILE};

pub const PRESSURE_RATIO: &str = "pressure_ratio";
pub const EFFICIENCY: &str = "efficiency";
pub const DOMAIN_FILE: &str = "domain.json";
pub const DESIGNS_FILE: &str = "designs.csv";

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoConfig {
    pub n: usize,
    pub seed: u64,
    pub noise_sd: f64,
    pub blade: BladeConfig,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            n: 548,
            seed: 42,
            noise_sd: 0.0,
            blade: BladeConfig::default(),
        }
    }
}

pub struct DemoDataset {
    pub table: DesignTable,
    pub nominal: TriangleMesh,
    pub designs: Vec<TriangleMesh>,
    pub context: TriangleMesh,
    /// Ridge directions of `pressure_ratio` (one column) and `efficiency` (two).
    pub directions: BTreeMap<&'static str, DMatrix<f64>>,
}

pub fn generate_demo(cfg: &DemoConfig) -> Result<DemoDataset, DemoError> {
    let domain = DomainSpec::new(raw_bounds(cfg.blade.sections))?;
    let d = domain.d();
    let doe = sample_uniform_doe(&domain, cfg.n, cfg.seed)?;
    let ridge1 = SyntheticOracle::random_ridge(OracleKind::ExactRidge1d, d, cfg.noise_sd, cfg.seed.wrapping_add(1))?;
    let ridge2 = SyntheticOracle::random_ridge(OracleKind::ExactRidge2d, d, cfg.noise_sd, cfg.seed.wrapping_add(2))?;
    let t = evaluate_oracle(&ridge1, &doe, "r1")?;
    let t = evaluate_oracle(&ridge2, &t, "r2")?;
    let pr: Vec<f64> = t.qoi_column("r1")?.iter().map(|v| 1.45 + 0.05 * v).collect();
    let eff: Vec<f64> = t.qoi_column("r2")?.iter().map(|v| 0.93 - 0.02 * v).collect();
    let table = doe.with_qoi(PRESSURE_RATIO, &pr)?.with_qoi(EFFICIENCY, &eff)?;

    let designs = table
        .samples()
        .iter()
        .map(|s| Ok(perturbed_blade(&cfg.blade, &denormalize_design(&s.x, &domain)?)?))
        .collect::<Result<Vec<_>, DemoError>>()?;
    Ok(DemoDataset {
        table,
        nominal: nominal_blade(&cfg.blade)?,
        designs,
        context: hub_context(&cfg.blade)?,
        directions: BTreeMap::from([
            (PRESSURE_RATIO, ridge1.directions().clone()),
            (EFFICIENCY, ridge2.directions().clone()),
        ]),
    })
}

/// Write the dataset directory: `domain.json`, `designs.csv`,
/// `geometry.json` and binary STL meshes under `meshes/`.
pub fn write_demo(ds: &DemoDataset, dir: &Path) -> Result<(), DemoError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DemoError::Io { path, source }
    };
    let meshes = dir.join("meshes");
    std::fs::create_dir_all(&meshes).map_err(io(&meshes))?;
    let write = |rel: &str, bytes: &[u8]| {
        let path = dir.join(rel);
        std::fs::write(&path, bytes).map_err(io(&path))
    };

    write(DOMAIN_FILE, ds.table.domain().to_json().as_bytes())?;
    let mut csv = Vec::new();
    ds.table.write_csv(&mut csv)?;
    write(DESIGNS_FILE, &csv)?;

    let mut manifest = GeometryManifest {
        nominal: PathBuf::from("meshes/nominal.stl"),
        designs: BTreeMap::new(),
        context: Some(PathBuf::from("meshes/context.stl")),
    };
    write("meshes/nominal.stl", &serialize_stl(&ds.nominal, StlFormat::Binary))?;
    write("meshes/context.stl", &serialize_stl(&ds.context, StlFormat::Binary))?;
    for (i, mesh) in ds.designs.iter().enumerate() {
        let key = ds.table.geometry_key(i).expect("index within table");
        let rel = format!("meshes/{key}");
        write(&rel, &serialize_stl(mesh, StlFormat::Binary))?;
        manifest.designs.insert(i.to_string(), PathBuf::from(rel));
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(MANIFEST_FILE, json.as_bytes())?;
    Ok(())
}
