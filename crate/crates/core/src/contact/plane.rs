use nalgebra::{Point3, Vector3};

use super::world::{Affine, WorldTet};

/// Plane `normal . x + offset = 0` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) + self.offset
    }

    pub fn project(&self, p: &Point3<f64>) -> Point3<f64> {
        p - self.normal * self.signed_distance(p)
    }

    /// Orthonormal `(u, v)` with `u x v = normal`.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.normal;
        let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
            Vector3::x()
        } else if n.y.abs() <= n.z.abs() {
            Vector3::y()
        } else {
            Vector3::z()
        };
        let u = n.cross(&helper).normalize();
        let v = n.cross(&u);
        (u, v)
    }
}

/// Relative size of the pressure-difference gradient below which two tets
/// are treated as having parallel fields (no unique plane).
pub const PARALLEL_FIELD_TOLERANCE: f64 = 1e-14;

/// Plane on which the linear pressures of two tets agree.
///
/// The coefficient row is `p0_A - p0_B` divided by `E_A * E_B`, i.e. the
/// difference of the moduli-normalized extent rows. The normal points toward
/// increasing `p0_A - p0_B`, which is from body B into body A.
pub fn equal_pressure_plane(a: &WorldTet, b: &WorldTet) -> Option<Plane> {
    let scale = 1.0 / (a.modulus * b.modulus);
    let row = Affine {
        gradient: (a.pressure.gradient - b.pressure.gradient) * scale,
        offset: (a.pressure.offset - b.pressure.offset) * scale,
    };
    let reference = a.pressure.gradient.norm().max(b.pressure.gradient.norm()) * scale;
    let norm = row.gradient.norm();
    if !(norm > PARALLEL_FIELD_TOLERANCE * reference) || !norm.is_finite() {
        return None;
    }
    Some(Plane { normal: row.gradient / norm, offset: row.offset / norm })
}
