use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::diff::{diff_meshes, GeometryDiff};
use super::mesh::{mesh_stats, MeshStats, TriangleMesh};
use super::stl::parse_stl;
use super::{GeometryError, Result};
use crate::dataset::DesignTable;

pub const MANIFEST_FILE: &str = "geometry.json";

/// On-disk form of `geometry.json`. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryManifest {
    pub nominal: PathBuf,
    #[serde(default)]
    pub designs: BTreeMap<String, PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<PathBuf>,
}

enum Source {
    File(PathBuf),
    Memory(Arc<TriangleMesh>),
}

struct Slot {
    key: String,
    source: Source,
    mesh: OnceLock<std::result::Result<Arc<TriangleMesh>, String>>,
    diff: OnceLock<Arc<GeometryDiff>>,
}

/// Design index to mesh mapping plus the nominal and context meshes.
///
/// Design meshes read from disk are loaded on first use. Concurrent lookups
/// of the same index block on a single load; a failed load is remembered.
pub struct GeometryCatalog {
    nominal: Arc<TriangleMesh>,
    context: Option<Arc<TriangleMesh>>,
    slots: Vec<Slot>,
}

impl std::fmt::Debug for GeometryCatalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeometryCatalog")
            .field("designs", &self.slots.len())
            .field("context", &self.context.is_some())
            .finish()
    }
}

fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    let bytes = std::fs::read(path).map_err(|source| GeometryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_stl(&bytes).map_err(|e| GeometryError::Load {
        key: path.display().to_string(),
        message: e.to_string(),
    })
}

impl GeometryCatalog {
    /// Catalog over meshes already in memory; `designs[i]` is design `i`.
    pub fn in_memory(nominal: TriangleMesh, designs: Vec<TriangleMesh>, context: Option<TriangleMesh>) -> Self {
        let slots = designs
            .into_iter()
            .enumerate()
            .map(|(i, mesh)| Slot {
                key: crate::dataset::default_geometry_key(i),
                source: Source::Memory(Arc::new(mesh)),
                mesh: OnceLock::new(),
                diff: OnceLock::new(),
            })
            .collect();
        Self {
            nominal: Arc::new(nominal),
            context: context.map(Arc::new),
            slots,
        }
    }

    /// Read `geometry.json` and bind one mesh file to every design of
    /// `table`. Indices missing from `designs` fall back to the table's
    /// geometry key, resolved in the manifest's directory. The nominal and
    /// context meshes are parsed immediately; design meshes lazily.
    pub fn from_manifest(path: &Path, table: &DesignTable) -> Result<Self> {
        let manifest_err = |message: String| GeometryError::Manifest {
            path: path.to_path_buf(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest: GeometryManifest =
            serde_json::from_str(&text).map_err(|e| manifest_err(e.to_string()))?;
        let dir = path.parent().unwrap_or(Path::new("."));

        let mut explicit = BTreeMap::new();
        for (k, p) in &manifest.designs {
            let index: usize = k
                .parse()
                .map_err(|_| manifest_err(format!("design key `{k}` is not an index")))?;
            if index >= table.len() {
                return Err(manifest_err(format!(
                    "design {index} is outside the table ({} designs)",
                    table.len()
                )));
            }
            if explicit.insert(index, p.clone()).is_some() {
                return Err(manifest_err(format!("design {index} is listed twice")));
            }
        }

        let mut slots = Vec::with_capacity(table.len());
        for i in 0..table.len() {
            let key = table.geometry_key(i).expect("index within table");
            let file = dir.join(explicit.remove(&i).unwrap_or_else(|| PathBuf::from(&key)));
            if !file.is_file() {
                return Err(manifest_err(format!(
                    "mesh for design {i} not found at {}",
                    file.display()
                )));
            }
            slots.push(Slot {
                key,
                source: Source::File(file),
                mesh: OnceLock::new(),
                diff: OnceLock::new(),
            });
        }

        let nominal = Arc::new(read_mesh(&dir.join(&manifest.nominal))?);
        let context = match &manifest.context {
            Some(p) => Some(Arc::new(read_mesh(&dir.join(p))?)),
            None => None,
        };
        Ok(Self {
            nominal,
            context,
            slots,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn nominal(&self) -> &Arc<TriangleMesh> {
        &self.nominal
    }

    pub fn context(&self) -> Option<&Arc<TriangleMesh>> {
        self.context.as_ref()
    }

    fn slot(&self, index: usize) -> Result<&Slot> {
        self.slots.get(index).ok_or(GeometryError::UnknownDesign {
            index,
            count: self.slots.len(),
        })
    }

    pub fn key(&self, index: usize) -> Result<&str> {
        Ok(&self.slot(index)?.key)
    }

    pub fn design(&self, index: usize) -> Result<Arc<TriangleMesh>> {
        let slot = self.slot(index)?;
        let loaded = slot.mesh.get_or_init(|| match &slot.source {
            Source::Memory(mesh) => Ok(Arc::clone(mesh)),
            Source::File(path) => read_mesh(path).map(Arc::new).map_err(|e| e.to_string()),
        });
        loaded.clone().map_err(|message| GeometryError::Load {
            key: slot.key.clone(),
            message,
        })
    }

    /// Whether design `index` has been loaded (or failed to load) already.
    pub fn is_loaded(&self, index: usize) -> bool {
        self.slots.get(index).is_some_and(|s| s.mesh.get().is_some())
    }

    /// Displacement of design `index` from the nominal mesh, computed once.
    pub fn diff(&self, index: usize) -> Result<Arc<GeometryDiff>> {
        let slot = self.slot(index)?;
        if let Some(d) = slot.diff.get() {
            return Ok(Arc::clone(d));
        }
        let mesh = self.design(index)?;
        Ok(Arc::clone(
            slot.diff.get_or_init(|| Arc::new(diff_meshes(&self.nominal, &mesh))),
        ))
    }

    /// Statistics for every design mesh, or the reason it could not be read.
    pub fn stats_report(&self) -> Vec<(usize, Result<MeshStats>)> {
        (0..self.slots.len())
            .map(|i| (i, self.design(i).map(|m| mesh_stats(&m))))
            .collect()
    }
}
