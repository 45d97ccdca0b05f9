//! Tetrahedral meshes and the barycentric primitives everything else is built on.
//!
//! A [`TetMesh`] is validated on construction: indices are in range, no tet is
//! repeated or degenerate, every tet is positively oriented (inverted tets are
//! repaired by swapping two indices) and the boundary faces form a closed,
//! orientable surface. Boundary faces are stored with outward winding.

pub mod generate;
pub(crate) mod io;

use std::collections::HashMap;

use nalgebra::{Matrix3, Point3, Vector3};

pub use io::{format_mesh, load_mesh, parse_mesh, write_mesh};

use crate::error::MeshError;
use crate::field::ExtentField;

/// Signed volumes below this magnitude (m^3) mark a tet as degenerate.
pub const DEGENERATE_VOLUME: f64 = 1e-18;

/// Barycentric tolerance for "inside a tet" queries.
pub const INSIDE_TOLERANCE: f64 = 1e-9;

/// Outward faces of a positively oriented tet `[0, 1, 2, 3]`; face `i` is
/// opposite vertex `i`.
pub(crate) const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    vertices: Vec<Point3<f64>>,
    tets: Vec<[usize; 4]>,
    boundary_faces: Vec<[usize; 3]>,
}

/// Barycentric coordinates of a point with respect to one tet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricCoords(pub [f64; 4]);

impl BarycentricCoords {
    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_inside(&self, tolerance: f64) -> bool {
        self.min() >= -tolerance
    }

    /// Weighted combination of four per-vertex values.
    pub fn interpolate(&self, values: [f64; 4]) -> f64 {
        self.0.iter().zip(values).map(|(z, v)| z * v).sum()
    }

    /// Forward transform: the Cartesian point these coordinates describe.
    pub fn to_point(&self, corners: &[Point3<f64>; 4]) -> Point3<f64> {
        let mut p = Vector3::zeros();
        for (z, c) in self.0.iter().zip(corners) {
            p += c.coords * *z;
        }
        Point3::from(p)
    }
}

pub fn signed_volume(p: &[Point3<f64>; 4]) -> f64 {
    (p[1] - p[0]).cross(&(p[2] - p[0])).dot(&(p[3] - p[0])) / 6.0
}

/// Constant gradients of the four barycentric shape functions of a tet.
pub fn shape_gradients(corners: &[Point3<f64>; 4]) -> Option<[Vector3<f64>; 4]> {
    let m = Matrix3::from_columns(&[
        corners[1] - corners[0],
        corners[2] - corners[0],
        corners[3] - corners[0],
    ]);
    let inv = m.try_inverse()?;
    let g1 = inv.row(0).transpose();
    let g2 = inv.row(1).transpose();
    let g3 = inv.row(2).transpose();
    Some([-(g1 + g2 + g3), g1, g2, g3])
}

/// Barycentric coordinates of `point` in the tet with the given corners.
///
/// Returns `None` when the corners are coplanar.
pub fn barycentric_in(corners: &[Point3<f64>; 4], point: &Point3<f64>) -> Option<BarycentricCoords> {
    let m = Matrix3::from_columns(&[
        corners[1] - corners[0],
        corners[2] - corners[0],
        corners[3] - corners[0],
    ]);
    let lambda = m.lu().solve(&(point - corners[0]))?;
    if !lambda.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some(BarycentricCoords([
        1.0 - lambda.x - lambda.y - lambda.z,
        lambda.x,
        lambda.y,
        lambda.z,
    ]))
}

impl TetMesh {
    /// Validates and builds a mesh. Negatively oriented tets are repaired.
    pub fn new(vertices: Vec<Point3<f64>>, mut tets: Vec<[usize; 4]>) -> Result<Self, MeshError> {
        if tets.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = vertices.len();
        let mut seen: HashMap<[usize; 4], usize> = HashMap::with_capacity(tets.len());
        for (t, tet) in tets.iter_mut().enumerate() {
            for &i in tet.iter() {
                if i >= n {
                    return Err(MeshError::IndexOutOfRange { tet: t, index: i, count: n });
                }
            }
            let mut key = *tet;
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::RepeatedVertex { tet: t });
            }
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateTet { first, second: t });
            }
            seen.insert(key, t);

            let corners = tet.map(|i| vertices[i]);
            let volume = signed_volume(&corners);
            if !(volume.abs() >= DEGENERATE_VOLUME) {
                return Err(MeshError::DegenerateTet { tet: t, volume });
            }
            if volume < 0.0 {
                tet.swap(2, 3);
            }
        }
        let boundary_faces = boundary_of(&tets)?;
        Ok(Self { vertices, tets, boundary_faces })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    /// Outward-wound triangles that belong to exactly one tet.
    pub fn boundary_faces(&self) -> &[[usize; 3]] {
        &self.boundary_faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn tet_corners(&self, tet: usize) -> [Point3<f64>; 4] {
        self.tets[tet].map(|i| self.vertices[i])
    }

    pub fn tet_volume(&self, tet: usize) -> f64 {
        signed_volume(&self.tet_corners(tet))
    }

    pub fn tet_centroid(&self, tet: usize) -> Point3<f64> {
        let c = self.tet_corners(tet);
        Point3::from((c[0].coords + c[1].coords + c[2].coords + c[3].coords) * 0.25)
    }

    /// Total volume as the sum of tet volumes.
    pub fn volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    /// Total volume from the divergence theorem over the boundary faces.
    pub fn boundary_volume(&self) -> f64 {
        self.boundary_faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i].coords);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    pub fn boundary_area(&self) -> f64 {
        self.boundary_faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i]);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }

    /// Sum of outward vector areas of the boundary; zero for a closed surface.
    pub fn boundary_vector_area(&self) -> Vector3<f64> {
        self.boundary_faces.iter().fold(Vector3::zeros(), |acc, f| {
            let [a, b, c] = f.map(|i| self.vertices[i]);
            acc + 0.5 * (b - a).cross(&(c - a))
        })
    }

    pub fn is_boundary_vertex(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for f in &self.boundary_faces {
            for &i in f {
                mask[i] = true;
            }
        }
        mask
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.is_boundary_vertex()
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    /// Axis-aligned bounds of all vertices.
    pub fn bounds(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = Point3::from(Vector3::repeat(f64::INFINITY));
        let mut hi = Point3::from(Vector3::repeat(f64::NEG_INFINITY));
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Pairs of tets sharing a face, with the local face index in each.
    pub fn face_neighbors(&self) -> Vec<(usize, usize)> {
        let mut faces: HashMap<[usize; 3], usize> = HashMap::new();
        let mut out = Vec::new();
        for (t, tet) in self.tets.iter().enumerate() {
            for face in TET_FACES {
                let mut key = face.map(|k| tet[k]);
                key.sort_unstable();
                if let Some(other) = faces.insert(key, t) {
                    out.push((other, t));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn boundary_of(tets: &[[usize; 4]]) -> Result<Vec<[usize; 3]>, MeshError> {
    let mut counts: HashMap<[usize; 3], (usize, [usize; 3])> = HashMap::new();
    let mut order = Vec::new();
    for tet in tets {
        for face in TET_FACES {
            let oriented = face.map(|k| tet[k]);
            let mut key = oriented;
            key.sort_unstable();
            let entry = counts.entry(key).or_insert_with(|| {
                order.push(key);
                (0, oriented)
            });
            entry.0 += 1;
        }
    }
    let mut boundary = Vec::new();
    for key in order {
        let (count, oriented) = counts[&key];
        match count {
            1 => boundary.push(oriented),
            2 => {}
            _ => {
                return Err(MeshError::NotWatertight(format!(
                    "face {key:?} is shared by {count} tets"
                )))
            }
        }
    }

    // Closed and orientable: each directed boundary edge occurs once and is
    // matched by its reverse.
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for f in &boundary {
        for k in 0..3 {
            *directed.entry((f[k], f[(k + 1) % 3])).or_default() += 1;
        }
    }
    for (&(u, v), &count) in &directed {
        if count != 1 {
            return Err(MeshError::NotWatertight(format!(
                "boundary edge ({u}, {v}) used {count} times with the same orientation"
            )));
        }
        if directed.get(&(v, u)) != Some(&1) {
            return Err(MeshError::NotWatertight(format!("boundary edge ({u}, {v}) is open")));
        }
    }
    Ok(boundary)
}

/// Barycentric coordinates of `point` with respect to tet `tet_index`.
pub fn barycentric(
    mesh: &TetMesh,
    tet_index: usize,
    point: &Point3<f64>,
) -> Result<BarycentricCoords, MeshError> {
    if tet_index >= mesh.tet_count() {
        return Err(MeshError::NoSuchTet(tet_index));
    }
    let corners = mesh.tet_corners(tet_index);
    barycentric_in(&corners, point).ok_or(MeshError::DegenerateTet {
        tet: tet_index,
        volume: signed_volume(&corners),
    })
}

/// Penetration extent at a point inside (or on) a tet.
pub fn eval_extent(
    mesh: &TetMesh,
    field: &ExtentField,
    tet_index: usize,
    point: &Point3<f64>,
) -> Result<f64, MeshError> {
    let zeta = barycentric(mesh, tet_index, point)?;
    if !zeta.is_inside(INSIDE_TOLERANCE) {
        return Err(MeshError::OutsideTet { tet: tet_index, min_coord: zeta.min() });
    }
    let values = mesh.tets()[tet_index].map(|i| field.extent()[i]);
    Ok(zeta.interpolate(values))
}
