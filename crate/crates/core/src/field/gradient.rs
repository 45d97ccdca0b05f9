use nalgebra::Vector3;

use crate::mesh::{shape_gradients, TetMesh};

/// Constant gradient of the linear interpolant of `extent` over one tet.
pub fn tet_extent_gradient(mesh: &TetMesh, extent: &[f64], tet: usize) -> Vector3<f64> {
    let grads = shape_gradients(&mesh.tet_corners(tet)).expect("mesh tets are non-degenerate");
    mesh.tets()[tet]
        .iter()
        .zip(grads)
        .fold(Vector3::zeros(), |acc, (&v, g)| acc + g * extent[v])
}

/// Per-vertex gradient approximation: the volume-weighted mean of the
/// per-tet gradients over all tets incident to the vertex.
pub fn compute_gradient_approx(mesh: &TetMesh, extent: &[f64]) -> Vec<Vector3<f64>> {
    let mut sum = vec![Vector3::zeros(); mesh.vertex_count()];
    let mut weight = vec![0.0; mesh.vertex_count()];
    for (t, tet) in mesh.tets().iter().enumerate() {
        let g = tet_extent_gradient(mesh, extent, t);
        let vol = mesh.tet_volume(t);
        for &v in tet {
            sum[v] += g * vol;
            weight[v] += vol;
        }
    }
    sum.into_iter()
        .zip(weight)
        .map(|(s, w)| if w > 0.0 { s / w } else { Vector3::zeros() })
        .collect()
}
