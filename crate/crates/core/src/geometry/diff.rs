use serde::{Deserialize, Serialize};

use super::mesh::{dot, norm, sub, Point, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffMode {
    /// Index-aligned vertices, used when both meshes share a vertex count.
    Vertexwise,
    /// Distance from each vertex of the design to the nominal surface.
    Sampled,
}

/// Displacement of a design mesh relative to the nominal one, in mesh units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryDiff {
    pub mode: DiffMode,
    pub max_displacement: f64,
    pub mean_displacement: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_vertex: Option<Vec<f64>>,
}

/// A [`GeometryDiff`] without the per-vertex field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffSummary {
    pub mode: DiffMode,
    pub max_displacement: f64,
    pub mean_displacement: f64,
}

impl GeometryDiff {
    pub fn summary(&self) -> DiffSummary {
        DiffSummary {
            mode: self.mode,
            max_displacement: self.max_displacement,
            mean_displacement: self.mean_displacement,
        }
    }
}

pub fn diff_meshes(nominal: &TriangleMesh, other: &TriangleMesh) -> GeometryDiff {
    let (mode, per_vertex): (_, Vec<f64>) = if nominal.vertices().len() == other.vertices().len() {
        let d = nominal
            .vertices()
            .iter()
            .zip(other.vertices())
            .map(|(a, b)| norm(sub(*b, *a)))
            .collect();
        (DiffMode::Vertexwise, d)
    } else {
        let triangles: Vec<[Point; 3]> = (0..nominal.facets().len()).map(|f| nominal.triangle(f)).collect();
        let d = other
            .vertices()
            .iter()
            .map(|&p| {
                triangles
                    .iter()
                    .map(|t| point_triangle_distance(p, t))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        (DiffMode::Sampled, d)
    };
    let max_displacement = per_vertex.iter().copied().fold(0.0, f64::max);
    let mean_displacement = per_vertex.iter().sum::<f64>() / per_vertex.len() as f64;
    GeometryDiff {
        mode,
        max_displacement,
        // keeps mean <= max under summation round-off
        mean_displacement: mean_displacement.min(max_displacement),
        per_vertex: Some(per_vertex),
    }
}

/// Euclidean distance from `p` to the closest point of triangle `t`, using
/// the Voronoi-region classification of Ericson's closest-point routine.
pub fn point_triangle_distance(p: Point, t: &[Point; 3]) -> f64 {
    let [a, b, c] = *t;
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return norm(ap);
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return norm(bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return dist(p, lerp(a, ab, v));
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return norm(cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return dist(p, lerp(a, ac, w));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return dist(p, lerp(b, sub(c, b), w));
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let q = [
        a[0] + ab[0] * v + ac[0] * w,
        a[1] + ab[1] * v + ac[1] * w,
        a[2] + ab[2] * v + ac[2] * w,
    ];
    dist(p, q)
}

fn lerp(origin: Point, dir: Point, t: f64) -> Point {
    [origin[0] + dir[0] * t, origin[1] + dir[1] * t, origin[2] + dir[2] * t]
}

fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::cross;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute force: the closest point is either the plane projection (when it
    /// falls inside the triangle) or lies on one of the three edges.
    fn oracle_distance(p: Point, t: &[Point; 3]) -> f64 {
        let seg = |a: Point, b: Point| {
            let ab = sub(b, a);
            let len2 = dot(ab, ab);
            let s = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
            dist(p, lerp(a, ab, s))
        };
        let mut best = seg(t[0], t[1]).min(seg(t[1], t[2])).min(seg(t[2], t[0]));
        let n = cross(sub(t[1], t[0]), sub(t[2], t[0]));
        let nn = dot(n, n);
        if nn > 0.0 {
            let h = dot(sub(p, t[0]), n) / nn;
            let q = [p[0] - h * n[0], p[1] - h * n[1], p[2] - h * n[2]];
            let inside = (0..3).all(|i| {
                let e = sub(t[(i + 1) % 3], t[i]);
                dot(cross(e, sub(q, t[i])), n) >= 0.0
            });
            if inside {
                best = best.min(dist(p, q));
            }
        }
        best
    }

    fn strip(n: usize) -> TriangleMesh {
        let mut vertices = Vec::new();
        for i in 0..=n {
            vertices.push([i as f64, 0.0, 0.0]);
            vertices.push([i as f64, 1.0, 0.1 * i as f64]);
        }
        let facets = (0..n)
            .flat_map(|i| [[2 * i, 2 * i + 2, 2 * i + 1], [2 * i + 1, 2 * i + 2, 2 * i + 3]])
            .collect();
        TriangleMesh::new(vertices, facets, None).unwrap()
    }

    #[test]
    fn identical_meshes_have_zero_diff() {
        let m = strip(4);
        let diff = diff_meshes(&m, &m);
        assert_eq!(diff.mode, DiffMode::Vertexwise);
        assert_eq!(diff.max_displacement, 0.0);
        assert_eq!(diff.mean_displacement, 0.0);
    }

    #[test]
    fn translation_shows_up_exactly() {
        let m = strip(4);
        let diff = diff_meshes(&m, &m.translated([1.0, 0.0, 0.0]));
        assert_eq!(diff.max_displacement, 1.0);
        assert_eq!(diff.mean_displacement, 1.0);
        let diff = diff_meshes(&m, &m.translated([0.0, -3.0, 4.0]));
        assert_eq!(diff.max_displacement, 5.0);
    }

    #[test]
    fn closest_point_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut r = || rng.random_range(-2.0..2.0);
        for _ in 0..20_000 {
            let t = [[r(), r(), r()], [r(), r(), r()], [r(), r(), r()]];
            let p = [r(), r(), r()];
            let got = point_triangle_distance(p, &t);
            let want = oracle_distance(p, &t);
            assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn sampled_mode_matches_brute_force() {
        let nominal = strip(6);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let probes: Vec<Point> = (0..7)
            .map(|_| [rng.random_range(-1.0..7.0), rng.random_range(-1.0..2.0), rng.random_range(-1.0..1.0)])
            .collect();
        let other = TriangleMesh::new(probes.clone(), vec![[0, 1, 2], [3, 4, 5], [4, 5, 6]], None).unwrap();
        assert_ne!(other.vertices().len(), nominal.vertices().len());
        let diff = diff_meshes(&nominal, &other);
        assert_eq!(diff.mode, DiffMode::Sampled);
        let per_vertex = diff.per_vertex.as_ref().unwrap();
        for (p, got) in probes.iter().zip(per_vertex) {
            let want = (0..nominal.facets().len())
                .map(|f| oracle_distance(*p, &nominal.triangle(f)))
                .fold(f64::INFINITY, f64::min);
            assert!((got - want).abs() <= 1e-9);
        }
        assert!(diff.mean_displacement <= diff.max_displacement);
    }
}
