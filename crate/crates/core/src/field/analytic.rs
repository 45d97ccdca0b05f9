//! Closed-form extent fields for boxes, slabs and balls.
//!
//! The `*_on` variants evaluate the analytic field at the vertices of an
//! arbitrary mesh, taking the primitive's dimensions from the mesh bounds.

use nalgebra::{Point3, Vector3};

use super::{compute_gradient_approx, ExtentField};
use crate::error::FieldError;
use crate::mesh::generate::{box_star, grid_box, sphere_star};
use crate::mesh::TetMesh;

/// 12-tet box centered at the origin with `eps = 1` at the center.
///
/// Corner gradients are unit vectors toward the center; the center gradient
/// is zero.
pub fn analytic_box_field(
    half_extents: Vector3<f64>,
    modulus: f64,
) -> Result<(TetMesh, ExtentField), FieldError> {
    let mesh = box_star(half_extents)?;
    let field = box_field_on(&mesh, modulus)?;
    Ok((mesh, field))
}

/// `eps = 1 - max_i |x_i - c_i| / h_i` over the bounding box of `mesh`.
pub fn box_field_on(mesh: &TetMesh, modulus: f64) -> Result<ExtentField, FieldError> {
    let (lo, hi) = mesh.bounds();
    let center = Point3::from((lo.coords + hi.coords) * 0.5);
    let half = (hi - lo) * 0.5;
    let tol = 1e-12 * half.max();
    let extent: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|p| {
            let d = p - center;
            let m = (0..3).map(|a| d[a].abs() / half[a]).fold(0.0, f64::max);
            (1.0 - m).clamp(0.0, 1.0)
        })
        .collect();
    let mut gradient = compute_gradient_approx(mesh, &extent);
    for (p, g) in mesh.vertices().iter().zip(gradient.iter_mut()) {
        let d = p - center;
        if d.norm() <= tol {
            *g = Vector3::zeros();
        } else if (0..3).all(|a| (d[a].abs() - half[a]).abs() <= tol) {
            *g = -d.normalize();
        }
    }
    ExtentField::new(extent, gradient, modulus)
}

/// Slab `[-lx/2, lx/2] x [-ly/2, ly/2] x [-H, 0]` with `eps = depth / H`.
pub fn analytic_slab_field(
    thickness: f64,
    lateral: [f64; 2],
    cells: [usize; 3],
    modulus: f64,
) -> Result<(TetMesh, ExtentField), FieldError> {
    if !(thickness > 0.0 && thickness.is_finite()) {
        return Err(FieldError::Invalid(format!("slab thickness must be positive, got {thickness}")));
    }
    let mesh = grid_box(
        Point3::new(-0.5 * lateral[0], -0.5 * lateral[1], -thickness),
        Point3::new(0.5 * lateral[0], 0.5 * lateral[1], 0.0),
        cells,
    )?;
    let field = slab_field_on(&mesh, modulus)?;
    Ok((mesh, field))
}

/// Linear-in-depth field below the top (max z) face of `mesh`'s bounds.
pub fn slab_field_on(mesh: &TetMesh, modulus: f64) -> Result<ExtentField, FieldError> {
    let (lo, hi) = mesh.bounds();
    let thickness = hi.z - lo.z;
    let extent = mesh
        .vertices()
        .iter()
        .map(|p| ((hi.z - p.z) / thickness).clamp(0.0, 1.0))
        .collect();
    let gradient = vec![Vector3::new(0.0, 0.0, -1.0 / thickness); mesh.vertex_count()];
    ExtentField::new(extent, gradient, modulus)
}

/// Star-shaped icosphere ball centered at the origin, `eps = 1 - |x| / r`.
pub fn analytic_sphere_field(
    radius: f64,
    level: u32,
    modulus: f64,
) -> Result<(TetMesh, ExtentField), FieldError> {
    let mesh = sphere_star(radius, level)?;
    let field = sphere_field_on(&mesh, modulus)?;
    Ok((mesh, field))
}

/// Radial field about the bounding-box center; the radius is the farthest
/// vertex distance. Gradients point inward with magnitude `1 / r`, and are
/// zero at the center.
pub fn sphere_field_on(mesh: &TetMesh, modulus: f64) -> Result<ExtentField, FieldError> {
    let (lo, hi) = mesh.bounds();
    let center = Point3::from((lo.coords + hi.coords) * 0.5);
    let radius = mesh.vertices().iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
    let mut extent = Vec::with_capacity(mesh.vertex_count());
    let mut gradient = Vec::with_capacity(mesh.vertex_count());
    for p in mesh.vertices() {
        let d = p - center;
        let r = d.norm();
        // Surface vertices sit at the radius up to rounding.
        let e = if (radius - r) <= 1e-12 * radius { 0.0 } else { 1.0 - r / radius };
        extent.push(e.clamp(0.0, 1.0));
        gradient.push(if r <= 1e-12 * radius { Vector3::zeros() } else { -d / (r * radius) });
    }
    ExtentField::new(extent, gradient, modulus)
}
