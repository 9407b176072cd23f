//! Blade geometry: triangle meshes, STL I/O, the design-index to mesh
//! catalog and nominal-vs-design displacement metrics.

pub mod blade;
mod catalog;
mod diff;
mod mesh;
mod stl;

pub use catalog::{GeometryCatalog, GeometryManifest, MANIFEST_FILE};
pub use diff::{diff_meshes, point_triangle_distance, DiffMode, DiffSummary, GeometryDiff};
pub use mesh::{mesh_stats, MeshStats, TriangleMesh};
pub use stl::{parse_stl, serialize_stl, StlFormat};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("binary STL declares {declared} triangles but only {available} fit in the body")]
    Truncated { declared: u32, available: usize },
    #[error("binary STL is shorter than the 84-byte header")]
    ShortHeader,
    #[error("ASCII STL line {line}: {message}")]
    MalformedAscii { line: usize, message: String },
    #[error("mesh has no facets")]
    EmptyMesh,
    #[error("facet {facet} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange { facet: usize, index: usize, count: usize },
    #[error("facet {facet} repeats a vertex")]
    DegenerateFacet { facet: usize },
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("facet normal count {normals} does not match facet count {facets}")]
    NormalCount { normals: usize, facets: usize },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("design index {index} is not in the catalog (size {count})")]
    UnknownDesign { index: usize, count: usize },
    #[error("mesh `{key}`: {message}")]
    Load { key: String, message: String },
    #[error("blade: {0}")]
    BladeConfig(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
