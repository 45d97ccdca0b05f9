//! Narrow phase: equal-pressure planes, tet-tet-plane clipping, centroid-fan
//! tessellation and assembly of the contact surface between two bodies.

mod clip;
mod export;
mod plane;
mod world;

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use nalgebra::{Isometry3, Point3, Vector3};

pub use clip::{
    clip_polygon, clip_tet_tet_plane, polygon_vector_area, ContactPolygon, GradientSampler,
    MIN_POLYGON_AREA,
};
pub use export::{format_surface_obj, format_surface_pressure, load_surface, parse_surface, write_surface, SurfaceSoup};
pub use plane::{equal_pressure_plane, Plane, PARALLEL_FIELD_TOLERANCE};
pub use world::{Affine, WorldTet};

use crate::bvh::{broad_phase, build_bvh, Bvh};
use crate::error::ContactError;
use crate::field::ExtentField;
use crate::mesh::TetMesh;

#[derive(Debug, Clone, PartialEq)]
pub struct ContactTriangle {
    pub vertices: [Point3<f64>; 3],
    pub pressure: [f64; 3],
    pub normal: Vector3<f64>,
    pub pair: (usize, usize),
    /// Index into [`ContactSurface::polygons`].
    pub polygon: usize,
}

impl ContactTriangle {
    /// Signed area about `normal`; zero-area triangles are legitimate.
    pub fn area(&self) -> f64 {
        let [a, b, c] = &self.vertices;
        0.5 * (b - a).cross(&(c - a)).dot(&self.normal)
    }

    pub fn centroid(&self) -> Point3<f64> {
        let [a, b, c] = &self.vertices;
        Point3::from((a.coords + b.coords + c.coords) / 3.0)
    }
}

/// Area centroid of a planar convex polygon.
pub fn polygon_centroid(vertices: &[Point3<f64>], normal: &Vector3<f64>) -> Point3<f64> {
    let first = vertices[0];
    let mut weighted = Vector3::zeros();
    let mut total = 0.0;
    for w in 1..vertices.len() - 1 {
        let area = 0.5 * (vertices[w] - first).cross(&(vertices[w + 1] - first)).dot(normal);
        weighted += (first.coords + vertices[w].coords + vertices[w + 1].coords) * (area / 3.0);
        total += area;
    }
    if total > 0.0 {
        Point3::from(weighted / total)
    } else {
        Point3::from(vertices.iter().map(|p| p.coords).sum::<Vector3<f64>>() / vertices.len() as f64)
    }
}

/// Splits an n-gon into n triangles sharing its area centroid.
pub fn tessellate_centroid_fan(polygon: &ContactPolygon, index: usize) -> Vec<ContactTriangle> {
    let normal = polygon.plane.normal;
    let center = polygon_centroid(&polygon.vertices, &normal);
    let pc = polygon.pressure_fn.eval(&center);
    let n = polygon.vertices.len();
    (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            ContactTriangle {
                vertices: [center, polygon.vertices[i], polygon.vertices[j]],
                pressure: [pc, polygon.pressure[i], polygon.pressure[j]],
                normal,
                pair: polygon.pair,
                polygon: index,
            }
        })
        .collect()
}

/// A tet mesh with its field and bounding volume tree.
#[derive(Debug, Clone)]
pub struct ContactBody {
    pub mesh: TetMesh,
    pub field: ExtentField,
    pub bvh: Bvh,
}

impl ContactBody {
    pub fn new(mesh: TetMesh, field: ExtentField) -> Result<Self, ContactError> {
        field.check_mesh(&mesh).map_err(|e| ContactError::InvalidParams(e.to_string()))?;
        let bvh = build_bvh(&mesh);
        Ok(Self { mesh, field, bvh })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactSurface {
    pub polygons: Vec<ContactPolygon>,
    pub triangles: Vec<ContactTriangle>,
    pub pose_a: Isometry3<f64>,
    pub pose_b: Isometry3<f64>,
}

impl ContactSurface {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(ContactTriangle::area).sum()
    }

    /// Area-weighted centroid, or `None` for an empty surface.
    pub fn centroid(&self) -> Option<Point3<f64>> {
        let area = self.area();
        if !(area > 0.0) {
            return None;
        }
        let sum: Vector3<f64> =
            self.triangles.iter().map(|t| t.centroid().coords * t.area()).sum();
        Some(Point3::from(sum / area))
    }
}

/// Contact surface between two posed bodies; facets are ordered by tet pair.
pub fn compute_contact_surface(
    a: &ContactBody,
    pose_a: &Isometry3<f64>,
    b: &ContactBody,
    pose_b: &Isometry3<f64>,
) -> Result<ContactSurface, ContactError> {
    let pairs = broad_phase(&a.bvh, pose_a, &b.bvh, pose_b);
    let mut cache_a: HashMap<usize, WorldTet> = HashMap::new();
    let mut cache_b: HashMap<usize, WorldTet> = HashMap::new();
    let mut polygons = Vec::new();
    for (ta, tb) in pairs {
        if let Entry::Vacant(e) = cache_a.entry(ta) {
            e.insert(WorldTet::new(&a.mesh, &a.field, pose_a, ta)?);
        }
        if let Entry::Vacant(e) = cache_b.entry(tb) {
            e.insert(WorldTet::new(&b.mesh, &b.field, pose_b, tb)?);
        }
        let (wa, wb) = (&cache_a[&ta], &cache_b[&tb]);
        let Some(plane) = equal_pressure_plane(wa, wb) else { continue };
        if let Some(polygon) = clip_tet_tet_plane(wa, wb, &plane) {
            polygons.push(polygon);
        }
    }
    let triangles =
        polygons.iter().enumerate().flat_map(|(i, p)| tessellate_centroid_fan(p, i)).collect();
    Ok(ContactSurface { polygons, triangles, pose_a: *pose_a, pose_b: *pose_b })
}
