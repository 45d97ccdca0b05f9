//! Ready-made scenes: a ball or box on a compliant slab, and the quasi-static
//! press of a stiff sinusoidal surface into a unit-thickness layer.

use std::sync::Arc;

use nalgebra::{Isometry3, Matrix3, Point3, Vector3};

use super::{ContactPair, RigidBody, Scene};
use crate::contact::{compute_contact_surface, ContactBody};
use crate::error::SimError;
use crate::field::{analytic_box_field, analytic_slab_field, analytic_sphere_field, compute_gradient_approx, ExtentField};
use crate::mesh::generate::structured_grid;
use crate::state::BodyState;
use crate::traction::{traction_samples, ContactParams, Quadrature, DEFAULT_SLIP_SPEED};

fn slab(modulus: f64, thickness: f64, lateral: f64, cells: usize) -> Result<Arc<ContactBody>, SimError> {
    let (mesh, field) = analytic_slab_field(thickness, [lateral, lateral], [cells, cells, 1], modulus)?;
    Ok(Arc::new(ContactBody::new(mesh, field)?))
}

/// Stiff ball dropped onto a kinematic slab (top face at z = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallOnSlab {
    pub radius: f64,
    pub level: u32,
    pub mass: f64,
    pub slab_modulus: f64,
    pub slab_thickness: f64,
    /// Ball modulus over slab modulus.
    pub modulus_ratio: f64,
    /// Initial clearance above the slab (m).
    pub gap: f64,
    /// Initial downward speed (m/s).
    pub speed: f64,
    pub chi: f64,
    pub dt: f64,
    pub duration: f64,
    pub log_every: usize,
}

impl Default for BallOnSlab {
    fn default() -> Self {
        Self {
            radius: 0.05,
            level: 2,
            mass: 0.5,
            slab_modulus: 1e5,
            slab_thickness: 0.1,
            modulus_ratio: 1000.0,
            gap: 1e-3,
            speed: 1.0,
            chi: 0.0,
            dt: 1e-5,
            duration: 0.08,
            log_every: 10,
        }
    }
}

pub fn ball_on_slab_scene(c: &BallOnSlab) -> Result<Scene, SimError> {
    let (mesh, field) = analytic_sphere_field(c.radius, c.level, c.slab_modulus * c.modulus_ratio)?;
    let ball = Arc::new(ContactBody::new(mesh, field)?);
    let floor = slab(c.slab_modulus, c.slab_thickness, 6.0 * c.radius, 3)?;
    let inertia = Matrix3::identity() * (0.4 * c.mass * c.radius * c.radius);
    let initial = BodyState::from_translation(Vector3::new(0.0, 0.0, c.radius + c.gap))
        .with_velocity(Vector3::zeros(), Vector3::new(0.0, 0.0, -c.speed));
    Ok(Scene {
        bodies: vec![
            RigidBody::dynamic("ball", ball, c.mass, inertia, initial),
            RigidBody::kinematic("slab", floor, BodyState::default()),
        ],
        gravity: Vector3::new(0.0, 0.0, -9.81),
        pairs: vec![ContactPair { a: 0, b: 1, params: ContactParams { chi: c.chi, mu: 0.0, v_s: DEFAULT_SLIP_SPEED } }],
        dt: c.dt,
        duration: c.duration,
        quadrature: Quadrature::Centroid,
        log_every: c.log_every,
    })
}

/// Stiff cube resting (and optionally spinning about z) on a kinematic slab.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxOnSlab {
    pub half: f64,
    pub mass: f64,
    pub slab_modulus: f64,
    pub slab_thickness: f64,
    pub modulus_ratio: f64,
    /// Initial penetration (m); `None` starts at the static depth.
    pub depth: Option<f64>,
    pub spin: f64,
    pub chi: f64,
    pub mu: f64,
    pub v_s: f64,
    pub dt: f64,
    pub duration: f64,
    pub log_every: usize,
}

impl Default for BoxOnSlab {
    fn default() -> Self {
        Self {
            half: 0.05,
            mass: 1.0,
            slab_modulus: 1e4,
            slab_thickness: 0.1,
            modulus_ratio: 1000.0,
            depth: None,
            spin: 0.0,
            chi: 5.0,
            mu: 0.0,
            v_s: DEFAULT_SLIP_SPEED,
            dt: 1e-4,
            duration: 1.0,
            log_every: 100,
        }
    }
}

impl BoxOnSlab {
    /// Depth at which the slab alone carries the weight.
    pub fn static_depth(&self) -> f64 {
        let k = self.slab_modulus / self.slab_thickness;
        self.mass * 9.81 / (k * 4.0 * self.half * self.half)
    }
}

pub fn box_on_slab_scene(c: &BoxOnSlab) -> Result<Scene, SimError> {
    let (mesh, field) = analytic_box_field(Vector3::repeat(c.half), c.slab_modulus * c.modulus_ratio)?;
    let cube = Arc::new(ContactBody::new(mesh, field)?);
    let floor = slab(c.slab_modulus, c.slab_thickness, 8.0 * c.half, 4)?;
    let side = 2.0 * c.half;
    let inertia = Matrix3::identity() * (c.mass * side * side / 6.0);
    let depth = c.depth.unwrap_or_else(|| c.static_depth());
    let initial = BodyState::from_translation(Vector3::new(0.0, 0.0, c.half - depth))
        .with_velocity(Vector3::new(0.0, 0.0, c.spin), Vector3::zeros());
    Ok(Scene {
        bodies: vec![
            RigidBody::dynamic("box", cube, c.mass, inertia, initial),
            RigidBody::kinematic("slab", floor, BodyState::default()),
        ],
        gravity: Vector3::new(0.0, 0.0, -9.81),
        pairs: vec![ContactPair { a: 0, b: 1, params: ContactParams::new(c.chi, c.mu, c.v_s)? }],
        dt: c.dt,
        duration: c.duration,
        quadrature: Quadrature::Centroid,
        log_every: c.log_every,
    })
}

/// Quasi-static normal force of a sinusoid pressed into a layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidPress {
    pub eta: f64,
    pub lambda: f64,
    pub depth: f64,
    /// Upward force on the indenter over the central wavelength (N).
    pub force: f64,
    /// Flat conforming force `k d S` over the same window (N).
    pub reference: f64,
    pub normalized: f64,
    /// Contact area inside the window (m^2).
    pub area: f64,
}

/// Presses `z = eta (1 - cos(2 pi x / lambda)) - depth` into the layer
/// `-1 <= z <= 0` (modulus 1, linear field) with a 1000x stiffer indenter.
///
/// The strip spans five wavelengths with `resolution` cells per wavelength;
/// only the central wavelength is measured, so the strip ends do not matter.
pub fn sinusoid_press_scenario(
    eta: f64,
    lambda: f64,
    depth: f64,
    resolution: usize,
) -> Result<SinusoidPress, SimError> {
    if !(eta >= 0.0 && lambda > 0.0 && depth >= 0.0) || resolution == 0 {
        return Err(SimError::InvalidScene(format!(
            "sinusoid needs eta >= 0, lambda > 0, depth >= 0, resolution > 0 (got {eta}, {lambda}, {depth}, {resolution})"
        )));
    }
    const LAYER_MODULUS: f64 = 1.0;
    const LAYER_THICKNESS: f64 = 1.0;
    const INDENTER_THICKNESS: f64 = 1.0;
    const INDENTER_LAYERS: usize = 2;
    let periods = 5;
    let nx = periods * resolution;
    let dx = lambda / resolution as f64;
    let x0 = -0.5 * periods as f64 * lambda;
    let width = dx;
    let surface = |x: f64| eta * (1.0 - (std::f64::consts::TAU * x / lambda).cos()) - depth;

    let layer_mesh = structured_grid([nx, 1, 2], |i, j, k| {
        Point3::new(x0 + i as f64 * dx, j as f64 * width, -LAYER_THICKNESS + 0.5 * k as f64)
    })?;
    let layer_extent: Vec<f64> = layer_mesh.vertices().iter().map(|p| -p.z / LAYER_THICKNESS).collect();
    let layer_gradient = vec![Vector3::new(0.0, 0.0, -1.0 / LAYER_THICKNESS); layer_mesh.vertex_count()];
    let layer = ContactBody::new(layer_mesh, ExtentField::new(layer_extent, layer_gradient, LAYER_MODULUS)?)?;

    let indenter_mesh = structured_grid([nx, 1, INDENTER_LAYERS], |i, j, k| {
        let x = x0 + i as f64 * dx;
        let h = INDENTER_THICKNESS * k as f64 / INDENTER_LAYERS as f64;
        Point3::new(x, j as f64 * width, surface(x) + h)
    })?;
    let indenter_extent: Vec<f64> = (0..indenter_mesh.vertex_count())
        .map(|v| {
            let k = v / ((nx + 1) * 2);
            k as f64 / INDENTER_LAYERS as f64
        })
        .collect();
    let indenter_gradient = compute_gradient_approx(&indenter_mesh, &indenter_extent);
    let indenter = ContactBody::new(
        indenter_mesh,
        ExtentField::new(indenter_extent, indenter_gradient, 1000.0 * LAYER_MODULUS)?,
    )?;

    let id = Isometry3::identity();
    let surface_mesh = compute_contact_surface(&indenter, &id, &layer, &id)?;
    let still = BodyState::default();
    let samples =
        traction_samples(&surface_mesh, &still, &still, &ContactParams::default(), Quadrature::Centroid)?;
    let half = 0.5 * lambda;
    let (mut force, mut area) = (0.0, 0.0);
    for (s, w) in samples {
        if s.point.x.abs() <= half {
            force += s.traction().z * w;
            area += w;
        }
    }
    let reference = LAYER_MODULUS / LAYER_THICKNESS * depth * lambda * width;
    Ok(SinusoidPress { eta, lambda, depth, force, reference, normalized: force / reference, area })
}
