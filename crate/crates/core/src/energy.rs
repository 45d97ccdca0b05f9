//! Contact potential energy `U = int_{A cap B} min(p0_A, p0_B) dV`.
//!
//! Body A's displaced volume is the overlap region where `p0_A <= p0_B`,
//! i.e. the part of A between its surface and the contact surface; B's is the
//! rest. Both are unions of convex polyhedra `tet_A ∩ tet_B ∩ halfspace`,
//! integrated exactly by splitting into tets about an interior point.

use nalgebra::{Isometry3, Point3, Vector3};
use serde::Serialize;

use crate::bvh::broad_phase;
use crate::contact::{clip_polygon, equal_pressure_plane, polygon_vector_area, Affine, ContactBody, WorldTet};
use crate::error::ContactError;

/// Convex polyhedron stored as its face loops.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolyhedron {
    pub faces: Vec<Vec<Point3<f64>>>,
}

impl ConvexPolyhedron {
    pub fn from_tet(corners: &[Point3<f64>; 4]) -> Self {
        let [a, b, c, d] = *corners;
        Self { faces: vec![vec![b, c, d], vec![a, d, c], vec![a, b, d], vec![a, c, b]] }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.len() < 4
    }

    /// Mean of the face vertices; interior for a non-degenerate polyhedron.
    pub fn interior_point(&self) -> Point3<f64> {
        let (sum, n) = self
            .faces
            .iter()
            .flatten()
            .fold((Vector3::zeros(), 0usize), |(s, n), p| (s + p.coords, n + 1));
        Point3::from(sum / n.max(1) as f64)
    }

    /// Keeps the part where `f >= 0`.
    pub fn clip(&self, f: &Affine) -> Self {
        let scale = self
            .faces
            .iter()
            .flatten()
            .map(|p| p.coords.amax())
            .fold(1.0, f64::max);
        let on_plane = 1e-12 * scale * f.gradient.norm().max(f64::MIN_POSITIVE);
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        let mut cap: Vec<Point3<f64>> = Vec::new();
        let mut face_on_plane = false;
        for face in &self.faces {
            let clipped = clip_polygon(face, f);
            face_on_plane |= clipped.len() >= 3
                && clipped.iter().all(|p| f.eval(p).abs() <= on_plane)
                && polygon_vector_area(&clipped).norm() > 1e-12 * scale * scale;
            for p in &clipped {
                if f.eval(p).abs() <= on_plane
                    && !cap.iter().any(|q| (q - p).norm() <= 1e-12 * scale)
                {
                    cap.push(*p);
                }
            }
            if clipped.len() >= 3 {
                faces.push(clipped);
            }
        }
        // A face already in the plane is the cap.
        if cap.len() >= 3 && faces.len() >= 3 && !face_on_plane {
            faces.push(order_about(cap, &f.gradient));
        }
        if faces.len() < 4 {
            faces.clear();
        }
        Self { faces }
    }

    /// `(volume, integral of f)` for an affine `f`, both exact.
    pub fn integrate(&self, f: &Affine) -> (f64, f64) {
        if self.is_empty() {
            return (0.0, 0.0);
        }
        let apex = self.interior_point();
        let fa = f.eval(&apex);
        let mut volume = 0.0;
        let mut integral = 0.0;
        for face in &self.faces {
            let first = face[0];
            for w in 1..face.len() - 1 {
                let (b, c) = (face[w], face[w + 1]);
                let v = (first - apex).dot(&(b - apex).cross(&(c - apex))).abs() / 6.0;
                volume += v;
                integral += v * (fa + f.eval(&first) + f.eval(&b) + f.eval(&c)) / 4.0;
            }
        }
        (volume, integral)
    }

    pub fn volume(&self) -> f64 {
        self.integrate(&Affine { gradient: Vector3::zeros(), offset: 0.0 }).0
    }
}

/// Orders coplanar points counter-clockwise about `normal`.
fn order_about(mut points: Vec<Point3<f64>>, normal: &Vector3<f64>) -> Vec<Point3<f64>> {
    let center = Point3::from(points.iter().map(|p| p.coords).sum::<Vector3<f64>>() / points.len() as f64);
    let n = normal.normalize();
    let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    points.sort_by(|p, q| {
        let ap = (p - center).dot(&v).atan2((p - center).dot(&u));
        let aq = (q - center).dot(&v).atan2((q - center).dot(&u));
        ap.total_cmp(&aq)
    });
    points
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacedPiece {
    /// `(tet of A, tet of B)`.
    pub pair: (usize, usize),
    pub polyhedron: ConvexPolyhedron,
    /// Linear pressure of the owning body over the piece.
    pub pressure: Affine,
    pub volume: f64,
    pub energy: f64,
}

impl DisplacedPiece {
    /// Distinct vertices with their pressures.
    pub fn vertices(&self) -> Vec<(Point3<f64>, f64)> {
        let mut out: Vec<(Point3<f64>, f64)> = Vec::new();
        for p in self.polyhedron.faces.iter().flatten() {
            if !out.iter().any(|(q, _)| q == p) {
                out.push((*p, self.pressure.eval(p)));
            }
        }
        out
    }
}

/// One body's displaced volume and the strain energy stored in it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisplacedVolume {
    pub pieces: Vec<DisplacedPiece>,
    pub volume: f64,
    pub energy: f64,
}

impl DisplacedVolume {
    fn push(&mut self, pair: (usize, usize), polyhedron: ConvexPolyhedron, pressure: Affine) {
        let (volume, energy) = polyhedron.integrate(&pressure);
        if volume <= 0.0 {
            return;
        }
        self.volume += volume;
        self.energy += energy;
        self.pieces.push(DisplacedPiece { pair, polyhedron, pressure, volume, energy });
    }
}

/// Displaced volumes of A and of B.
pub fn displaced_volume(
    a: &ContactBody,
    pose_a: &Isometry3<f64>,
    b: &ContactBody,
    pose_b: &Isometry3<f64>,
) -> Result<(DisplacedVolume, DisplacedVolume), ContactError> {
    let mut va = DisplacedVolume::default();
    let mut vb = DisplacedVolume::default();
    let mut cache_b: Vec<Option<WorldTet>> = vec![None; b.mesh.tet_count()];
    let mut current_a: Option<WorldTet> = None;
    for (ta, tb) in broad_phase(&a.bvh, pose_a, &b.bvh, pose_b) {
        if current_a.as_ref().map(|w| w.index) != Some(ta) {
            current_a = Some(WorldTet::new(&a.mesh, &a.field, pose_a, ta)?);
        }
        let wa = current_a.as_ref().unwrap();
        if cache_b[tb].is_none() {
            cache_b[tb] = Some(WorldTet::new(&b.mesh, &b.field, pose_b, tb)?);
        }
        let wb = cache_b[tb].as_ref().unwrap();

        let mut overlap = ConvexPolyhedron::from_tet(&wa.corners);
        for f in &wb.barycentric {
            overlap = overlap.clip(f);
            if overlap.is_empty() {
                break;
            }
        }
        if overlap.is_empty() {
            continue;
        }
        match equal_pressure_plane(wa, wb) {
            Some(plane) => {
                // A keeps n.x + d <= 0, where p0_A <= p0_B.
                let toward_a = Affine { gradient: -plane.normal, offset: -plane.offset };
                va.push((ta, tb), overlap.clip(&toward_a), wa.pressure);
                vb.push((ta, tb), overlap.clip(&toward_a.scaled(-1.0)), wb.pressure);
            }
            None => {
                let c = overlap.interior_point();
                if wa.pressure.eval(&c) <= wb.pressure.eval(&c) {
                    va.push((ta, tb), overlap, wa.pressure);
                } else {
                    vb.push((ta, tb), overlap, wb.pressure);
                }
            }
        }
    }
    Ok((va, vb))
}

/// Total contact potential energy `U_A + U_B` (J).
pub fn potential_energy(
    a: &ContactBody,
    pose_a: &Isometry3<f64>,
    b: &ContactBody,
    pose_b: &Isometry3<f64>,
) -> Result<f64, ContactError> {
    let (va, vb) = displaced_volume(a, pose_a, b, pose_b)?;
    Ok(va.energy + vb.energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub energy_a: f64,
    pub energy_b: f64,
    pub total: f64,
    pub volume_a: f64,
    pub volume_b: f64,
}

impl EnergyReport {
    pub fn new(va: &DisplacedVolume, vb: &DisplacedVolume) -> Self {
        Self {
            energy_a: va.energy,
            energy_b: vb.energy,
            total: va.energy + vb.energy,
            volume_a: va.volume,
            volume_b: vb.volume,
        }
    }
}
