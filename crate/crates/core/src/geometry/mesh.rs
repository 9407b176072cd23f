use std::collections::HashMap;

use serde::Serialize;

use super::{GeometryError, Result};

const UNIT_TOL: f64 = 1e-6;

pub type Point = [f64; 3];

/// Indexed triangle mesh with one normal per facet.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    facets: Vec<[usize; 3]>,
    normals: Vec<Point>,
    normals_recomputed: bool,
}

impl TriangleMesh {
    /// Build a mesh from indexed facets. Supplied normals are kept when they
    /// are unit length; anything else (missing, zero, unnormalized) is
    /// recomputed with the right-hand rule and the mesh is flagged.
    pub fn new(vertices: Vec<Point>, facets: Vec<[usize; 3]>, normals: Option<Vec<Point>>) -> Result<Self> {
        if facets.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite("vertices"));
        }
        for (facet, tri) in facets.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange {
                    facet,
                    index,
                    count: vertices.len(),
                });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(GeometryError::DegenerateFacet { facet });
            }
        }
        let supplied = match normals {
            Some(n) if n.len() != facets.len() => {
                return Err(GeometryError::NormalCount {
                    normals: n.len(),
                    facets: facets.len(),
                })
            }
            Some(n) => n,
            None => vec![[0.0; 3]; facets.len()],
        };
        let mut recomputed = false;
        let normals = supplied
            .into_iter()
            .zip(&facets)
            .map(|(n, tri)| {
                let len = norm(n);
                if n.iter().all(|v| v.is_finite()) && (len - 1.0).abs() <= UNIT_TOL {
                    n
                } else {
                    recomputed = true;
                    facet_normal(&vertices, tri)
                }
            })
            .collect();
        Ok(Self {
            vertices,
            facets,
            normals,
            normals_recomputed: recomputed,
        })
    }

    /// Build from a triangle soup, merging vertices whose coordinates are
    /// bit-for-bit identical. First occurrence order is kept.
    pub fn from_triangles<I>(triangles: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, [Point; 3])>,
    {
        let mut lookup: HashMap<[u64; 3], usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut facets = Vec::new();
        let mut normals = Vec::new();
        for (normal, corners) in triangles {
            let mut tri = [0usize; 3];
            for (slot, p) in tri.iter_mut().zip(corners) {
                let key = p.map(f64::to_bits);
                *slot = *lookup.entry(key).or_insert_with(|| {
                    vertices.push(p);
                    vertices.len() - 1
                });
            }
            facets.push(tri);
            normals.push(normal);
        }
        Self::new(vertices, facets, Some(normals))
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[[usize; 3]] {
        &self.facets
    }

    pub fn facet_normals(&self) -> &[Point] {
        &self.normals
    }

    pub fn normals_recomputed(&self) -> bool {
        self.normals_recomputed
    }

    pub fn triangle(&self, facet: usize) -> [Point; 3] {
        self.facets[facet].map(|i| self.vertices[i])
    }

    pub fn translated(&self, t: Point) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            for k in 0..3 {
                v[k] += t[k];
            }
        }
        out
    }
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

fn facet_normal(vertices: &[Point], tri: &[usize; 3]) -> Point {
    let [a, b, c] = tri.map(|i| vertices[i]);
    let n = cross(sub(b, a), sub(c, a));
    let len = norm(n);
    if len > 0.0 {
        n.map(|v| v / len)
    } else {
        [0.0; 3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshStats {
    pub bbox_min: Point,
    pub bbox_max: Point,
    pub facet_count: usize,
    pub vertex_count: usize,
}

pub fn mesh_stats(mesh: &TriangleMesh) -> MeshStats {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in mesh.vertices() {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    MeshStats {
        bbox_min: lo,
        bbox_max: hi,
        facet_count: mesh.facets().len(),
        vertex_count: mesh.vertices().len(),
    }
}
