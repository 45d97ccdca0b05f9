//! Procedural tet meshes for primitives and test scenes.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use super::TetMesh;
use crate::error::MeshError;

/// Box centered at the origin split into 12 tets that share the center vertex.
///
/// Vertices 0..8 are the corners (bit 0 = +x, bit 1 = +y, bit 2 = +z); vertex 8
/// is the center.
pub fn box_star(half_extents: Vector3<f64>) -> Result<TetMesh, MeshError> {
    if !half_extents.iter().all(|h| *h > 0.0 && h.is_finite()) {
        return Err(MeshError::InvalidArgument(format!(
            "half extents must be positive, got {half_extents:?}"
        )));
    }
    let mut vertices: Vec<Point3<f64>> = (0..8)
        .map(|bits: usize| {
            let s = |b: usize| if bits & (1 << b) != 0 { 1.0 } else { -1.0 };
            Point3::new(s(0) * half_extents.x, s(1) * half_extents.y, s(2) * half_extents.z)
        })
        .collect();
    vertices.push(Point3::origin());
    // Each face as a corner loop, split along its first diagonal.
    const FACES: [[usize; 4]; 6] = [
        [0, 2, 6, 4],
        [1, 5, 7, 3],
        [0, 4, 5, 1],
        [2, 3, 7, 6],
        [0, 1, 3, 2],
        [4, 6, 7, 5],
    ];
    let tets = FACES
        .iter()
        .flat_map(|f| [[8, f[0], f[1], f[2]], [8, f[0], f[2], f[3]]])
        .collect();
    TetMesh::new(vertices, tets)
}

/// Surface triangulation of a unit icosphere with a vertex at each pole,
/// subdivided `level` times (20 * 4^level triangles).
pub fn icosphere_surface(level: u32) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    use std::f64::consts::PI;
    let ring_z = 1.0 / 5f64.sqrt();
    let ring_r = 2.0 / 5f64.sqrt();
    let mut verts = vec![Vector3::new(0.0, 0.0, 1.0)];
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0;
        verts.push(Vector3::new(ring_r * a.cos(), ring_r * a.sin(), ring_z));
    }
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0 + PI / 5.0;
        verts.push(Vector3::new(ring_r * a.cos(), ring_r * a.sin(), -ring_z));
    }
    verts.push(Vector3::new(0.0, 0.0, -1.0));
    let up = |k: usize| 1 + k % 5;
    let lo = |k: usize| 6 + k % 5;
    let mut tris = Vec::new();
    for k in 0..5 {
        tris.push([0, up(k), up(k + 1)]);
        tris.push([up(k), lo(k), up(k + 1)]);
        tris.push([up(k + 1), lo(k), lo(k + 1)]);
        tris.push([11, lo(k + 1), lo(k)]);
    }
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    (verts, tris)
}

/// Star-shaped ball: every tet joins the center (vertex 0) to one triangle
/// of an icosphere of the given radius.
pub fn sphere_star(radius: f64, level: u32) -> Result<TetMesh, MeshError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MeshError::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let (dirs, tris) = icosphere_surface(level);
    let mut vertices = vec![Point3::origin()];
    vertices.extend(dirs.iter().map(|d| Point3::from(d * radius)));
    let tets = tris.iter().map(|t| [0, t[0] + 1, t[1] + 1, t[2] + 1]).collect();
    TetMesh::new(vertices, tets)
}

/// Conforming tet mesh of a logically structured `cells` grid whose node
/// `(i, j, k)` is placed at `position(i, j, k)`. Each hexahedral cell is
/// split into 6 tets along its (0,0,0)-(1,1,1) diagonal.
pub fn structured_grid(
    cells: [usize; 3],
    position: impl Fn(usize, usize, usize) -> Point3<f64>,
) -> Result<TetMesh, MeshError> {
    let [nx, ny, nz] = cells;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(MeshError::InvalidArgument(format!("grid needs at least one cell per axis, got {cells:?}")));
    }
    let node = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(position(i, j, k));
            }
        }
    }
    // Monotone corner paths from (0,0,0) to (1,1,1), one per axis permutation.
    const PATHS: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for path in PATHS {
                    let mut c = [i, j, k];
                    let mut tet = [node(c[0], c[1], c[2]); 4];
                    for (s, axis) in path.iter().enumerate() {
                        c[*axis] += 1;
                        tet[s + 1] = node(c[0], c[1], c[2]);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    TetMesh::new(vertices, tets)
}

/// Axis-aligned box `[lo, hi]` meshed as a structured grid.
pub fn grid_box(lo: Point3<f64>, hi: Point3<f64>, cells: [usize; 3]) -> Result<TetMesh, MeshError> {
    if !(0..3).all(|a| hi[a] > lo[a]) {
        return Err(MeshError::InvalidArgument(format!("empty box {lo:?}..{hi:?}")));
    }
    structured_grid(cells, |i, j, k| {
        let t = |n: usize, c: usize| n as f64 / c as f64;
        Point3::new(
            lo.x + (hi.x - lo.x) * t(i, cells[0]),
            lo.y + (hi.y - lo.y) * t(j, cells[1]),
            lo.z + (hi.z - lo.z) * t(k, cells[2]),
        )
    })
}

/// Spherical shell between `inner` and `outer` radii: `layers` radial layers
/// of prisms over an icosphere of the given level, each prism split into 3
/// tets. The split follows the global vertex order so faces conform.
///
/// Returns the mesh and the vertex index lists on the inner and outer spheres.
pub fn spherical_shell(
    inner: f64,
    outer: f64,
    level: u32,
    layers: usize,
) -> Result<(TetMesh, Vec<usize>, Vec<usize>), MeshError> {
    if !(inner > 0.0 && outer > inner) || layers == 0 {
        return Err(MeshError::InvalidArgument(format!(
            "shell needs 0 < inner < outer and layers > 0 (got {inner}, {outer}, {layers})"
        )));
    }
    let (dirs, tris) = icosphere_surface(level);
    let per_layer = dirs.len();
    let mut vertices = Vec::with_capacity(per_layer * (layers + 1));
    for l in 0..=layers {
        let r = inner + (outer - inner) * l as f64 / layers as f64;
        vertices.extend(dirs.iter().map(|d| Point3::from(d * r)));
    }
    let mut tets = Vec::with_capacity(3 * tris.len() * layers);
    for l in 0..layers {
        for tri in &tris {
            let mut s = *tri;
            s.sort_unstable();
            let [a, b, c] = s.map(|v| v + l * per_layer);
            let [a2, b2, c2] = s.map(|v| v + (l + 1) * per_layer);
            tets.push([a, b, c, a2]);
            tets.push([b, c, a2, b2]);
            tets.push([c, a2, b2, c2]);
        }
    }
    let inner_set = (0..per_layer).collect();
    let outer_set = (layers * per_layer..(layers + 1) * per_layer).collect();
    Ok((TetMesh::new(vertices, tets)?, inner_set, outer_set))
}
