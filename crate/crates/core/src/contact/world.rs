use nalgebra::{Isometry3, Point3, Vector3};

use crate::error::MeshError;
use crate::field::ExtentField;
use crate::mesh::{shape_gradients, signed_volume, TetMesh};

/// Affine scalar function `f(x) = gradient . x + offset` in world space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub gradient: Vector3<f64>,
    pub offset: f64,
}

impl Affine {
    pub fn eval(&self, p: &Point3<f64>) -> f64 {
        self.gradient.dot(&p.coords) + self.offset
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { gradient: self.gradient * s, offset: self.offset * s }
    }
}

/// One tet of a posed body, with its linear fields expressed in world.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldTet {
    pub index: usize,
    pub corners: [Point3<f64>; 4],
    /// Barycentric coordinate functions; the tet is where all are >= 0.
    pub barycentric: [Affine; 4],
    /// Equilibrium pressure `p0 = E * eps`.
    pub pressure: Affine,
    /// Per-vertex gradient approximation of `eps`, rotated into world.
    pub vertex_gradients: [Vector3<f64>; 4],
    pub modulus: f64,
}

impl WorldTet {
    pub fn new(
        mesh: &TetMesh,
        field: &ExtentField,
        pose: &Isometry3<f64>,
        tet: usize,
    ) -> Result<Self, MeshError> {
        if tet >= mesh.tet_count() {
            return Err(MeshError::NoSuchTet(tet));
        }
        let corners = mesh.tet_corners(tet).map(|p| pose * p);
        let grads = shape_gradients(&corners).ok_or(MeshError::DegenerateTet {
            tet,
            volume: signed_volume(&corners),
        })?;
        let barycentric: [Affine; 4] = std::array::from_fn(|i| Affine {
            gradient: grads[i],
            offset: if i == 0 { 1.0 } else { 0.0 } - grads[i].dot(&corners[0].coords),
        });
        let ids = mesh.tets()[tet];
        let modulus = field.modulus();
        let mut pressure = Affine { gradient: Vector3::zeros(), offset: 0.0 };
        for (k, &v) in ids.iter().enumerate() {
            let p = modulus * field.extent()[v];
            pressure.gradient += barycentric[k].gradient * p;
            pressure.offset += barycentric[k].offset * p;
        }
        let vertex_gradients = ids.map(|v| pose.rotation * field.gradient()[v]);
        Ok(Self { index: tet, corners, barycentric, pressure, vertex_gradients, modulus })
    }

    pub fn barycentric_at(&self, p: &Point3<f64>) -> [f64; 4] {
        self.barycentric.map(|f| f.eval(p))
    }

    /// Interpolated gradient approximation of `eps` at `p`.
    pub fn extent_gradient_at(&self, p: &Point3<f64>) -> Vector3<f64> {
        let z = self.barycentric_at(p);
        (0..4).fold(Vector3::zeros(), |acc, k| acc + self.vertex_gradients[k] * z[k])
    }

    pub fn centroid(&self) -> Point3<f64> {
        let c = &self.corners;
        Point3::from((c[0].coords + c[1].coords + c[2].coords + c[3].coords) * 0.25)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                d = d.max((self.corners[i] - self.corners[j]).norm());
            }
        }
        d
    }
}
