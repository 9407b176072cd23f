//! Procedural compressor-blade meshes for demo datasets.
//!
//! A blade is a stack of cambered airfoil sections along the radial `z`
//! axis, sitting on a hub cylinder whose axis is `x`. Each control section
//! carries five design variables: axial shift, tangential shift, rotation
//! about the stacking line, leading-edge recamber and trailing-edge
//! recamber. Between control sections the variables are interpolated
//! linearly in span; control sections are evenly spaced from hub to tip.

use std::f64::consts::PI;

use super::mesh::{Point, TriangleMesh};
use super::{GeometryError, Result};

pub const DOF_PER_SECTION: usize = 5;
pub const DOF_NAMES: [&str; DOF_PER_SECTION] = ["axial", "tangential", "rotation", "le_recamber", "te_recamber"];

const THICKNESS: f64 = 0.12;
const CAMBER: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeConfig {
    pub sections: usize,
    /// Chordwise points per surface; each section outline has `2 * chord_points` vertices.
    pub chord_points: usize,
    pub span_stations: usize,
    pub chord: f64,
    pub span: f64,
    pub hub_radius: f64,
}

impl Default for BladeConfig {
    fn default() -> Self {
        Self {
            sections: 5,
            chord_points: 16,
            span_stations: 11,
            chord: 0.05,
            span: 0.1,
            hub_radius: 0.2,
        }
    }
}

impl BladeConfig {
    /// Resolution giving more than ten thousand facets.
    pub fn high_resolution(sections: usize) -> Self {
        Self {
            sections,
            chord_points: 64,
            span_stations: 41,
            ..Self::default()
        }
    }

    pub fn dof(&self) -> usize {
        self.sections * DOF_PER_SECTION
    }

    pub fn facet_count(&self) -> usize {
        let outline = 2 * self.chord_points;
        (self.span_stations - 1) * outline * 2 + 2 * (outline - 2)
    }

    fn validate(&self) -> Result<()> {
        if self.sections == 0 || self.chord_points < 3 || self.span_stations < 2 {
            return Err(GeometryError::BladeConfig(format!(
                "need sections >= 1, chord_points >= 3, span_stations >= 2; got {}, {}, {}",
                self.sections, self.chord_points, self.span_stations
            )));
        }
        if !(self.chord > 0.0 && self.span > 0.0 && self.hub_radius > 0.0) {
            return Err(GeometryError::BladeConfig("chord, span and hub radius must be positive".into()));
        }
        Ok(())
    }
}

/// Raw-unit bounds for each design variable, section-major in
/// [`DOF_NAMES`] order. Shifts are in metres, angles in radians.
pub fn raw_bounds(sections: usize) -> Vec<(f64, f64)> {
    let shift = 0.005;
    let rotation = 2f64.to_radians();
    let recamber = 3f64.to_radians();
    let one = [(-shift, shift), (-shift, shift), (-rotation, rotation), (-recamber, recamber), (-recamber, recamber)];
    (0..sections).flat_map(|_| one).collect()
}

pub fn nominal_blade(cfg: &BladeConfig) -> Result<TriangleMesh> {
    perturbed_blade(cfg, &vec![0.0; cfg.dof()])
}

pub fn perturbed_blade(cfg: &BladeConfig, raw: &[f64]) -> Result<TriangleMesh> {
    cfg.validate()?;
    if raw.len() != cfg.dof() {
        return Err(GeometryError::BladeConfig(format!(
            "expected {} design variables, found {}",
            cfg.dof(),
            raw.len()
        )));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFinite("design variables"));
    }
    let k = cfg.chord_points;
    let outline = 2 * k;
    let s: Vec<f64> = (0..=k).map(|i| 0.5 * (1.0 - (PI * i as f64 / k as f64).cos())).collect();

    let mut vertices = Vec::with_capacity(cfg.span_stations * outline);
    for j in 0..cfg.span_stations {
        let frac = j as f64 / (cfg.span_stations - 1) as f64;
        let p = section_params(raw, cfg.sections, frac);
        let z = cfg.hub_radius + cfg.span * frac;
        let stagger = 0.5 + 0.3 * frac + p[2];
        let (sin, cos) = stagger.sin_cos();
        let place = |si: f64, y: f64| -> Point {
            let x = (si - 0.5) * cfg.chord;
            let y = y * cfg.chord;
            [x * cos - y * sin + p[0], x * sin + y * cos + p[1], z]
        };
        let camber = |si: f64| {
            4.0 * CAMBER * si * (1.0 - si) + p[3] * si * (1.0 - si).powi(2) - p[4] * si * si * (1.0 - si)
        };
        let half = |si: f64| {
            5.0 * THICKNESS
                * (0.2969 * si.sqrt() - 0.1260 * si - 0.3516 * si.powi(2) + 0.2843 * si.powi(3) - 0.1036 * si.powi(4))
        };
        // upper surface trailing edge to leading edge, then lower surface back
        for i in (0..=k).rev() {
            let y = if i == k { camber(s[i]) } else { camber(s[i]) + half(s[i]) };
            vertices.push(place(s[i], y));
        }
        for i in 1..k {
            vertices.push(place(s[i], camber(s[i]) - half(s[i])));
        }
    }

    let mut facets = Vec::with_capacity(cfg.facet_count());
    for j in 0..cfg.span_stations - 1 {
        let lo = j * outline;
        let hi = lo + outline;
        for i in 0..outline {
            let n = (i + 1) % outline;
            facets.push([lo + i, lo + n, hi + n]);
            facets.push([lo + i, hi + n, hi + i]);
        }
    }
    let upper = |i: usize| k - i;
    let lower = |i: usize| if i == 0 || i == k { upper(i) } else { k + i };
    let top = (cfg.span_stations - 1) * outline;
    for i in 0..k {
        let mut tris = Vec::with_capacity(2);
        if i + 1 < k {
            tris.push([upper(i), lower(i + 1), upper(i + 1)]);
        }
        if i > 0 {
            tris.push([upper(i), lower(i), lower(i + 1)]);
        }
        for [a, b, c] in tris {
            facets.push([top + a, top + b, top + c]);
            facets.push([a, c, b]);
        }
    }
    TriangleMesh::new(vertices, facets, None)
}

/// The five section variables at span fraction `frac`.
fn section_params(raw: &[f64], sections: usize, frac: f64) -> [f64; DOF_PER_SECTION] {
    let at = |sec: usize| &raw[sec * DOF_PER_SECTION..(sec + 1) * DOF_PER_SECTION];
    let mut out = [0.0; DOF_PER_SECTION];
    if sections == 1 {
        out.copy_from_slice(at(0));
        return out;
    }
    let pos = frac * (sections - 1) as f64;
    let lo = (pos.floor() as usize).min(sections - 2);
    let w = pos - lo as f64;
    for (q, o) in out.iter_mut().enumerate() {
        *o = (1.0 - w) * at(lo)[q] + w * at(lo + 1)[q];
    }
    out
}

/// Hub cylinder under the blade root, used as the engine placeholder.
pub fn hub_context(cfg: &BladeConfig) -> Result<TriangleMesh> {
    cfg.validate()?;
    let segments = 48;
    let half_len = 1.5 * cfg.chord;
    let r = cfg.hub_radius;
    let mut vertices = Vec::with_capacity(2 * segments + 2);
    for x in [-half_len, half_len] {
        for s in 0..segments {
            let a = 2.0 * PI * s as f64 / segments as f64;
            vertices.push([x, r * a.sin(), r * a.cos()]);
        }
    }
    let back = vertices.len();
    vertices.push([-half_len, 0.0, 0.0]);
    vertices.push([half_len, 0.0, 0.0]);
    let mut facets = Vec::with_capacity(4 * segments);
    for s in 0..segments {
        let n = (s + 1) % segments;
        facets.push([s, segments + n, n]);
        facets.push([s, segments + s, segments + n]);
        facets.push([back, s, n]);
        facets.push([back + 1, segments + n, segments + s]);
    }
    TriangleMesh::new(vertices, facets, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::{cross, dot, sub};
    use crate::geometry::{diff_meshes, mesh_stats, DiffMode};

    /// Signed volume by the divergence theorem; positive for a closed,
    /// outward-oriented surface.
    fn volume(mesh: &TriangleMesh) -> f64 {
        (0..mesh.facets().len())
            .map(|f| {
                let [a, b, c] = mesh.triangle(f);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    fn is_closed(mesh: &TriangleMesh) -> bool {
        let mut edges = std::collections::HashMap::new();
        for f in mesh.facets() {
            for e in 0..3 {
                *edges.entry((f[e], f[(e + 1) % 3])).or_insert(0i32) += 1;
            }
        }
        edges.iter().all(|(&(a, b), &n)| n == 1 && edges.get(&(b, a)) == Some(&1))
    }

    #[test]
    fn nominal_blade_is_closed_and_outward() {
        let cfg = BladeConfig::default();
        let mesh = nominal_blade(&cfg).unwrap();
        assert_eq!(mesh.facets().len(), cfg.facet_count());
        assert!(is_closed(&mesh));
        let v = volume(&mesh);
        // thin airfoil of ~8% area fraction over chord^2 times span
        let box_volume = cfg.chord * cfg.chord * cfg.span;
        assert!(v > 0.02 * box_volume && v < 0.2 * box_volume, "{v}");
        let stats = mesh_stats(&mesh);
        assert_eq!(stats.bbox_min[2], cfg.hub_radius);
        assert!((stats.bbox_max[2] - cfg.hub_radius - cfg.span).abs() < 1e-15);
    }

    #[test]
    fn high_resolution_is_large() {
        let cfg = BladeConfig::high_resolution(5);
        assert!(cfg.facet_count() >= 10_000);
        assert_eq!(nominal_blade(&cfg).unwrap().facets().len(), cfg.facet_count());
    }

    #[test]
    fn hub_is_closed() {
        let hub = hub_context(&BladeConfig::default()).unwrap();
        assert!(is_closed(&hub));
        assert!(volume(&hub) > 0.0);
    }

    #[test]
    fn axial_shift_translates_whole_blade() {
        let cfg = BladeConfig::default();
        let nominal = nominal_blade(&cfg).unwrap();
        let mut raw = vec![0.0; cfg.dof()];
        for sec in 0..cfg.sections {
            raw[sec * DOF_PER_SECTION] = 0.004;
        }
        let moved = perturbed_blade(&cfg, &raw).unwrap();
        let diff = diff_meshes(&nominal, &moved);
        assert_eq!(diff.mode, DiffMode::Vertexwise);
        assert!((diff.max_displacement - 0.004).abs() < 1e-15);
        assert!((diff.mean_displacement - 0.004).abs() < 1e-15);
        for (a, b) in nominal.vertices().iter().zip(moved.vertices()) {
            let d = sub(*b, *a);
            assert!(d[1].abs() < 1e-15 && d[2] == 0.0);
        }
    }

    #[test]
    fn tip_variables_do_not_move_the_hub_section() {
        let cfg = BladeConfig::default();
        let nominal = nominal_blade(&cfg).unwrap();
        let mut raw = vec![0.0; cfg.dof()];
        let tip = (cfg.sections - 1) * DOF_PER_SECTION;
        raw[tip..tip + DOF_PER_SECTION].copy_from_slice(&[0.003, -0.002, 0.02, 0.04, -0.05]);
        let moved = perturbed_blade(&cfg, &raw).unwrap();
        let outline = 2 * cfg.chord_points;
        assert_eq!(&moved.vertices()[..outline], &nominal.vertices()[..outline]);
        let last = moved.vertices().len() - outline;
        assert_ne!(&moved.vertices()[last..], &nominal.vertices()[last..]);
        assert!(is_closed(&moved));
    }

    #[test]
    fn interpolation_between_sections() {
        let raw: Vec<f64> = (0..10).map(|v| v as f64).collect();
        assert_eq!(section_params(&raw, 2, 0.0), [0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(section_params(&raw, 2, 1.0), [5.0, 6.0, 7.0, 8.0, 9.0]);
        assert_eq!(section_params(&raw, 2, 0.5), [2.5, 3.5, 4.5, 5.5, 6.5]);
        assert_eq!(section_params(&raw[..5], 1, 0.7), [0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn wrong_variable_count() {
        let cfg = BladeConfig::default();
        assert!(matches!(perturbed_blade(&cfg, &[0.0; 3]), Err(GeometryError::BladeConfig(_))));
        assert_eq!(raw_bounds(5).len(), 25);
    }
}
