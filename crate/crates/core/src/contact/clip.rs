use nalgebra::{Point3, Vector3};

use super::plane::Plane;
use super::world::{Affine, WorldTet};

/// Polygons with less area than this (m^2) are not emitted.
pub const MIN_POLYGON_AREA: f64 = 1e-16;

/// Barycentric tolerance for deciding that a polygon lies in a tet face.
const FACE_COPLANAR_TOLERANCE: f64 = 1e-12;

/// Convex piece of the contact surface from one tet pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPolygon {
    /// Counter-clockwise about `plane.normal`.
    pub vertices: Vec<Point3<f64>>,
    pub plane: Plane,
    /// `(tet of A, tet of B)`.
    pub pair: (usize, usize),
    /// Equilibrium pressure at each vertex, from field A.
    pub pressure: Vec<f64>,
    /// Field A's linear pressure over the polygon.
    pub pressure_fn: Affine,
    /// Field A's barycentric functions and per-vertex gradients, for
    /// evaluating the gradient approximation anywhere on the polygon.
    pub sampler: GradientSampler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSampler {
    pub barycentric: [Affine; 4],
    pub vertex_gradients: [Vector3<f64>; 4],
}

impl GradientSampler {
    pub fn at(&self, p: &Point3<f64>) -> Vector3<f64> {
        (0..4).fold(Vector3::zeros(), |acc, k| {
            acc + self.vertex_gradients[k] * self.barycentric[k].eval(p)
        })
    }
}

impl ContactPolygon {
    pub fn area(&self) -> f64 {
        polygon_vector_area(&self.vertices).dot(&self.plane.normal)
    }
}

/// Sum of `0.5 * (v_i x v_{i+1})` about the first vertex.
pub fn polygon_vector_area(vertices: &[Point3<f64>]) -> Vector3<f64> {
    let Some(first) = vertices.first() else { return Vector3::zeros() };
    let mut sum = Vector3::zeros();
    for w in 1..vertices.len().saturating_sub(1) {
        sum += (vertices[w] - first).cross(&(vertices[w + 1] - first));
    }
    sum * 0.5
}

/// Keeps the part of a convex polygon where `f >= 0` (Sutherland-Hodgman).
pub fn clip_polygon(polygon: &[Point3<f64>], f: &Affine) -> Vec<Point3<f64>> {
    let n = polygon.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    let values: Vec<f64> = polygon.iter().map(|p| f.eval(p)).collect();
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let (sp, sc) = (values[prev], values[i]);
        if sc >= 0.0 {
            if sp < 0.0 && sc > 0.0 {
                out.push(edge_crossing(&polygon[prev], &polygon[i], sp, sc));
            }
            out.push(polygon[i]);
        } else if sp > 0.0 {
            out.push(edge_crossing(&polygon[prev], &polygon[i], sp, sc));
        }
    }
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

fn edge_crossing(a: &Point3<f64>, b: &Point3<f64>, fa: f64, fb: f64) -> Point3<f64> {
    let t = fa / (fa - fb);
    a + (b - a) * t
}

/// `tet_a ∩ tet_b ∩ plane` as a convex polygon, or `None` if it is empty
/// or smaller than [`MIN_POLYGON_AREA`].
///
/// A polygon lying exactly in a tet face is kept only by the tet on the
/// `+normal` side of that face, so a plane through a shared face is not
/// counted twice.
pub fn clip_tet_tet_plane(a: &WorldTet, b: &WorldTet, plane: &Plane) -> Option<ContactPolygon> {
    let center = plane.project(&a.centroid());
    let half = 2.0 * a.diameter();
    let (u, v) = plane.basis();
    let mut polygon = vec![
        center + (-u - v) * half,
        center + (u - v) * half,
        center + (u + v) * half,
        center + (-u + v) * half,
    ];
    let halfspaces = a.barycentric.iter().chain(b.barycentric.iter());
    for f in halfspaces.clone() {
        polygon = clip_polygon(&polygon, f);
        if polygon.len() < 3 {
            return None;
        }
    }
    for f in halfspaces {
        let on_face = polygon
            .iter()
            .all(|p| f.eval(p).abs() <= FACE_COPLANAR_TOLERANCE);
        if on_face && f.gradient.dot(&plane.normal) <= 0.0 {
            return None;
        }
    }
    let area = polygon_vector_area(&polygon).dot(&plane.normal);
    if !(area >= MIN_POLYGON_AREA) {
        return None;
    }
    let pressure = polygon.iter().map(|p| a.pressure.eval(p)).collect();
    Some(ContactPolygon {
        vertices: polygon,
        plane: *plane,
        pair: (a.index, b.index),
        pressure,
        pressure_fn: a.pressure,
        sampler: GradientSampler { barycentric: a.barycentric, vertex_gradients: a.vertex_gradients },
    })
}
