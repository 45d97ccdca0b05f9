//! Tractions on the contact surface and their integral, the net wrench.
//!
//! The traction at a surface point `R` is `T = p n + T_F`, with `n` pointing
//! from body B into body A. The pressure is the elastic `p0` raised on
//! approach by a Hunt-Crossley-style factor,
//! `p = max(0, p0 (1 + chi |grad eps_A . n| (-v_n)))`, and `T_F` is Coulomb
//! friction regularized linearly below the slip speed `v_s`.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::contact::ContactSurface;
use crate::error::ContactError;
use crate::state::{world_point_velocity, BodyState};

/// Default friction regularization speed (m/s).
pub const DEFAULT_SLIP_SPEED: f64 = 1e-4;

/// Largest pose mismatch (m, or rad-ish for rotation entries) tolerated
/// between a surface and the states it is integrated with.
const POSE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactParams {
    /// Dissipation (s).
    pub chi: f64,
    pub mu: f64,
    /// Slip speed (m/s) below which friction ramps linearly.
    pub v_s: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self { chi: 0.0, mu: 0.0, v_s: DEFAULT_SLIP_SPEED }
    }
}

impl ContactParams {
    pub fn new(chi: f64, mu: f64, v_s: f64) -> Result<Self, ContactError> {
        let params = Self { chi, mu, v_s };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ContactError> {
        if !(self.chi >= 0.0 && self.chi.is_finite()) {
            return Err(ContactError::InvalidParams(format!("chi must be >= 0, got {}", self.chi)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(ContactError::InvalidParams(format!("mu must be >= 0, got {}", self.mu)));
        }
        if !(self.v_s > 0.0 && self.v_s.is_finite()) {
            return Err(ContactError::InvalidParams(format!("v_s must be > 0, got {}", self.v_s)));
        }
        Ok(())
    }
}

/// Triangle quadrature used when integrating tractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// One point at the centroid.
    #[default]
    Centroid,
    /// Three interior points with barycentrics (2/3, 1/6, 1/6).
    ThreePoint,
}

impl TryFrom<u8> for Quadrature {
    type Error = ContactError;

    fn try_from(order: u8) -> Result<Self, Self::Error> {
        match order {
            1 => Ok(Self::Centroid),
            3 => Ok(Self::ThreePoint),
            n => Err(ContactError::InvalidParams(format!("quadrature must be 1 or 3, got {n}"))),
        }
    }
}

impl Quadrature {
    fn rule(self) -> &'static [([f64; 3], f64)] {
        const C: f64 = 1.0 / 3.0;
        const A: f64 = 2.0 / 3.0;
        const B: f64 = 1.0 / 6.0;
        match self {
            Self::Centroid => &[([C, C, C], 1.0)],
            Self::ThreePoint => &[([A, B, B], C), ([B, A, B], C), ([B, B, A], C)],
        }
    }
}

/// Force and torque about a world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
    pub about: Point3<f64>,
}

impl Wrench {
    pub fn zero(about: Point3<f64>) -> Self {
        Self { force: Vector3::zeros(), torque: Vector3::zeros(), about }
    }

    /// Same wrench with the torque taken about `point`.
    pub fn shift(&self, point: Point3<f64>) -> Self {
        Self { force: self.force, torque: self.torque + (self.about - point).cross(&self.force), about: point }
    }

    /// Rate of work done on a body moving with `state`.
    pub fn power(&self, state: &BodyState) -> f64 {
        self.force.dot(&world_point_velocity(state, &self.about)) + self.torque.dot(&state.angular)
    }
}

impl std::ops::Neg for Wrench {
    type Output = Self;

    fn neg(self) -> Self {
        Self { force: -self.force, torque: -self.torque, about: self.about }
    }
}

/// Everything known about the traction at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractionSample {
    pub point: Point3<f64>,
    pub normal: Vector3<f64>,
    pub p0: f64,
    /// `grad eps_A . n` (1/m).
    pub grad_n: f64,
    /// Velocity of A's material point relative to B's.
    pub relative_velocity: Vector3<f64>,
    pub pressure: f64,
    pub normal_traction: Vector3<f64>,
    pub friction: Vector3<f64>,
}

impl TractionSample {
    pub fn traction(&self) -> Vector3<f64> {
        self.normal_traction + self.friction
    }
}

/// `(normal part, tangential part)` of `v` with respect to unit `n`.
pub fn split_velocity(v: &Vector3<f64>, n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let normal = n * v.dot(n);
    (normal, v - normal)
}

/// Elastic pressure raised on approach (`v_n < 0`), clamped at zero.
pub fn damped_pressure(p0: f64, grad_n: f64, v_n: f64, chi: f64) -> f64 {
    (p0 * (1.0 + chi * grad_n.abs() * (-v_n))).max(0.0)
}

/// Regularized Coulomb friction opposing the slip velocity `v_t`.
pub fn friction_traction(p: f64, v_t: &Vector3<f64>, mu: f64, v_s: f64) -> Vector3<f64> {
    let speed = v_t.norm();
    if speed == 0.0 {
        return Vector3::zeros();
    }
    v_t * (-mu * p * (speed / v_s).min(1.0) / speed)
}

/// Traction at one point given the relative velocity `A - B` there.
pub fn sample_traction(
    point: Point3<f64>,
    normal: Vector3<f64>,
    p0: f64,
    grad_n: f64,
    relative_velocity: Vector3<f64>,
    params: &ContactParams,
) -> TractionSample {
    let (vn, vt) = split_velocity(&relative_velocity, &normal);
    let pressure = damped_pressure(p0, grad_n, vn.dot(&normal), params.chi);
    TractionSample {
        point,
        normal,
        p0,
        grad_n,
        relative_velocity,
        pressure,
        normal_traction: normal * pressure,
        friction: friction_traction(pressure, &vt, params.mu, params.v_s),
    }
}

fn check_pose(surface_pose: &nalgebra::Isometry3<f64>, state: &BodyState) -> Result<(), ContactError> {
    let dt = (surface_pose.translation.vector - state.pose.translation.vector).amax();
    let dr = surface_pose.rotation.angle_to(&state.pose.rotation);
    let scale = 1.0 + surface_pose.translation.vector.amax();
    if dt > POSE_TOLERANCE * scale || dr > POSE_TOLERANCE {
        return Err(ContactError::InconsistentState("surface was computed at a different pose"));
    }
    Ok(())
}

/// Traction samples at every quadrature point, in facet order.
pub fn traction_samples(
    surface: &ContactSurface,
    state_a: &BodyState,
    state_b: &BodyState,
    params: &ContactParams,
    quadrature: Quadrature,
) -> Result<Vec<(TractionSample, f64)>, ContactError> {
    params.validate()?;
    check_pose(&surface.pose_a, state_a)?;
    check_pose(&surface.pose_b, state_b)?;
    let rule = quadrature.rule();
    let mut out = Vec::with_capacity(surface.triangles.len() * rule.len());
    for tri in &surface.triangles {
        let area = tri.area();
        let polygon = &surface.polygons[tri.polygon];
        let n = tri.normal;
        for (bary, weight) in rule {
            let point = Point3::from(
                tri.vertices[0].coords * bary[0]
                    + tri.vertices[1].coords * bary[1]
                    + tri.vertices[2].coords * bary[2],
            );
            let p0 = (tri.pressure[0] * bary[0] + tri.pressure[1] * bary[1] + tri.pressure[2] * bary[2])
                .max(0.0);
            let grad_n = polygon.sampler.at(&point).dot(&n);
            let rel = world_point_velocity(state_a, &point) - world_point_velocity(state_b, &point);
            out.push((sample_traction(point, n, p0, grad_n, rel, params), weight * area));
        }
    }
    Ok(out)
}

/// Net wrenches on A and on B, both about `about`; B's is exactly `-A`'s.
pub fn integrate_wrench(
    surface: &ContactSurface,
    state_a: &BodyState,
    state_b: &BodyState,
    params: &ContactParams,
    about: Point3<f64>,
    quadrature: Quadrature,
) -> Result<(Wrench, Wrench), ContactError> {
    let mut on_a = Wrench::zero(about);
    for (sample, weight) in traction_samples(surface, state_a, state_b, params, quadrature)? {
        let f = sample.traction() * weight;
        on_a.force += f;
        on_a.torque += (sample.point - about).cross(&f);
    }
    Ok((on_a, -on_a))
}

/// JSON-friendly summary of a contact evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrenchReport {
    pub frame: &'static str,
    pub about: [f64; 3],
    pub force_on_a: [f64; 3],
    pub torque_on_a: [f64; 3],
    pub force_on_b: [f64; 3],
    pub torque_on_b: [f64; 3],
    pub facet_count: usize,
    pub polygon_count: usize,
    pub area: f64,
}

impl WrenchReport {
    pub fn new(surface: &ContactSurface, on_a: &Wrench, on_b: &Wrench) -> Self {
        Self {
            frame: "world",
            about: on_a.about.coords.into(),
            force_on_a: on_a.force.into(),
            torque_on_a: on_a.torque.into(),
            force_on_b: on_b.force.into(),
            torque_on_b: on_b.torque.into(),
            facet_count: surface.triangles.len(),
            polygon_count: surface.polygons.len(),
            area: surface.area(),
        }
    }
}
