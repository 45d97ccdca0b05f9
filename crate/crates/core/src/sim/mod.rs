//! Fixed-step rigid-body harness driven by pressure field contact wrenches.
//!
//! Each body's frame origin is its center of mass. Steps are semi-implicit
//! Euler: wrenches at the current state update the velocities, the new
//! velocities update the poses (rotation through the exponential map).
//! Kinematic bodies follow a constant twist from their initial state.

mod scenarios;
mod scene_file;

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{Matrix3, Translation3, UnitQuaternion, Vector3};

pub use scenarios::{
    ball_on_slab_scene, box_on_slab_scene, sinusoid_press_scenario, BallOnSlab, BoxOnSlab,
    SinusoidPress,
};
pub use scene_file::{load_scene, parse_scene, BodySpec, PairSpec, SceneFile};

use crate::contact::{compute_contact_surface, ContactBody};
use crate::energy::potential_energy;
use crate::error::SimError;
use crate::state::BodyState;
use crate::traction::{integrate_wrench, ContactParams, Quadrature, Wrench};

/// Positions beyond this (m) are treated as a blown-up simulation.
const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct RigidBody {
    pub name: String,
    pub contact: Arc<ContactBody>,
    pub mass: f64,
    /// About the center of mass, body frame.
    pub inertia: Matrix3<f64>,
    pub initial: BodyState,
    /// Prescribed motion: the initial twist held forever.
    pub kinematic: bool,
}

impl RigidBody {
    pub fn dynamic(
        name: impl Into<String>,
        contact: Arc<ContactBody>,
        mass: f64,
        inertia: Matrix3<f64>,
        initial: BodyState,
    ) -> Self {
        Self { name: name.into(), contact, mass, inertia, initial, kinematic: false }
    }

    pub fn kinematic(name: impl Into<String>, contact: Arc<ContactBody>, initial: BodyState) -> Self {
        Self {
            name: name.into(),
            contact,
            mass: 1.0,
            inertia: Matrix3::identity(),
            initial,
            kinematic: true,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        self.initial.validate()?;
        if self.kinematic {
            return Ok(());
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(SimError::InvalidScene(format!("body {}: mass must be > 0", self.name)));
        }
        let asym = (self.inertia - self.inertia.transpose()).abs().max();
        if asym > 1e-12 * self.inertia.abs().max() || self.inertia.cholesky().is_none() {
            return Err(SimError::InvalidScene(format!(
                "body {}: inertia must be symmetric positive definite",
                self.name
            )));
        }
        Ok(())
    }

    /// Inertia about the center of mass in world axes.
    pub fn world_inertia(&self, state: &BodyState) -> Matrix3<f64> {
        let r = state.pose.rotation.to_rotation_matrix().into_inner();
        r * self.inertia * r.transpose()
    }

    pub fn kinetic_energy(&self, state: &BodyState) -> f64 {
        if self.kinematic {
            return 0.0;
        }
        let iw = self.world_inertia(state);
        0.5 * self.mass * state.linear.norm_squared() + 0.5 * state.angular.dot(&(iw * state.angular))
    }

    pub fn momentum(&self, state: &BodyState) -> Vector3<f64> {
        state.linear * self.mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPair {
    pub a: usize,
    pub b: usize,
    pub params: ContactParams,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub bodies: Vec<RigidBody>,
    pub gravity: Vector3<f64>,
    pub pairs: Vec<ContactPair>,
    pub dt: f64,
    pub duration: f64,
    pub quadrature: Quadrature,
    /// Record every n-th step (the last step is always recorded).
    pub log_every: usize,
}

impl Scene {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidScene(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(SimError::InvalidScene(format!("duration must be >= 0, got {}", self.duration)));
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(SimError::InvalidScene("gravity must be finite".into()));
        }
        if self.log_every == 0 {
            return Err(SimError::InvalidScene("log_every must be >= 1".into()));
        }
        for body in &self.bodies {
            body.validate()?;
        }
        for pair in &self.pairs {
            let n = self.bodies.len();
            if pair.a >= n || pair.b >= n || pair.a == pair.b {
                return Err(SimError::InvalidScene(format!(
                    "pair ({}, {}) must reference two distinct bodies out of {n}",
                    pair.a, pair.b
                )));
            }
            pair.params.validate()?;
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn initial_states(&self) -> Vec<BodyState> {
        self.bodies.iter().map(|b| b.initial).collect()
    }

    pub fn pair_name(&self, pair: &ContactPair) -> String {
        format!("{}-{}", self.bodies[pair.a].name, self.bodies[pair.b].name)
    }
}

/// Net contact wrenches of one pair, each about its own body's origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairWrench {
    pub on_a: Wrench,
    pub on_b: Wrench,
    pub area: f64,
}

pub fn contact_wrenches(scene: &Scene, states: &[BodyState]) -> Result<Vec<PairWrench>, SimError> {
    scene
        .pairs
        .iter()
        .map(|pair| {
            let (sa, sb) = (&states[pair.a], &states[pair.b]);
            let (ba, bb) = (&scene.bodies[pair.a], &scene.bodies[pair.b]);
            let surface = compute_contact_surface(&ba.contact, &sa.pose, &bb.contact, &sb.pose)?;
            let (on_a, on_b) =
                integrate_wrench(&surface, sa, sb, &pair.params, sa.origin(), scene.quadrature)?;
            Ok(PairWrench { on_a, on_b: on_b.shift(sb.origin()), area: surface.area() })
        })
        .collect()
}

/// State of a kinematic body at time `t`.
pub fn kinematic_state(initial: &BodyState, t: f64) -> BodyState {
    let rotation = UnitQuaternion::from_scaled_axis(initial.angular * t) * initial.pose.rotation;
    let translation = Translation3::from(initial.pose.translation.vector + initial.linear * t);
    BodyState { pose: nalgebra::Isometry3::from_parts(translation, rotation), ..*initial }
}

/// Advances every body by one step given the wrenches at `states`.
pub fn advance(
    scene: &Scene,
    states: &[BodyState],
    wrenches: &[PairWrench],
    step_index: usize,
) -> Result<Vec<BodyState>, SimError> {
    let dt = scene.dt;
    let mut force: Vec<Vector3<f64>> = scene.bodies.iter().map(|b| scene.gravity * b.mass).collect();
    let mut torque = vec![Vector3::zeros(); scene.bodies.len()];
    for (pair, w) in scene.pairs.iter().zip(wrenches) {
        force[pair.a] += w.on_a.force;
        torque[pair.a] += w.on_a.torque;
        force[pair.b] += w.on_b.force;
        torque[pair.b] += w.on_b.torque;
    }
    let time = (step_index + 1) as f64 * dt;
    let mut next = Vec::with_capacity(states.len());
    for (i, (body, state)) in scene.bodies.iter().zip(states).enumerate() {
        if body.kinematic {
            next.push(kinematic_state(&body.initial, time));
            continue;
        }
        let iw = body.world_inertia(state);
        let gyro = state.angular.cross(&(iw * state.angular));
        let alpha = iw.cholesky().map(|c| c.solve(&(torque[i] - gyro))).ok_or(SimError::Diverged {
            step: step_index + 1,
            time,
        })?;
        let linear = state.linear + force[i] * (dt / body.mass);
        let angular = state.angular + alpha * dt;
        let translation = Translation3::from(state.pose.translation.vector + linear * dt);
        let rotation = UnitQuaternion::from_scaled_axis(angular * dt) * state.pose.rotation;
        let s = BodyState {
            pose: nalgebra::Isometry3::from_parts(translation, rotation),
            angular,
            linear,
        };
        let sane = s.pose.translation.vector.iter().all(|x| x.is_finite() && x.abs() < DIVERGENCE_LIMIT)
            && s.linear.iter().chain(s.angular.iter()).all(|v| v.is_finite());
        if !sane {
            return Err(SimError::Diverged { step: step_index + 1, time });
        }
        next.push(s);
    }
    Ok(next)
}

/// One semi-implicit Euler step; also returns the wrenches it used.
pub fn step(
    scene: &Scene,
    states: &[BodyState],
    step_index: usize,
) -> Result<(Vec<BodyState>, Vec<PairWrench>), SimError> {
    let wrenches = contact_wrenches(scene, states)?;
    let next = advance(scene, states, &wrenches, step_index)?;
    Ok((next, wrenches))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    /// `-m g . x` summed over dynamic bodies.
    pub gravitational: f64,
    /// Contact potential summed over pairs.
    pub contact: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic + self.gravitational + self.contact
    }
}

pub fn energy(scene: &Scene, states: &[BodyState]) -> Result<EnergyBreakdown, SimError> {
    let mut e = EnergyBreakdown { kinetic: 0.0, gravitational: 0.0, contact: 0.0 };
    for (body, state) in scene.bodies.iter().zip(states) {
        if body.kinematic {
            continue;
        }
        e.kinetic += body.kinetic_energy(state);
        e.gravitational -= body.mass * scene.gravity.dot(&state.pose.translation.vector);
    }
    for pair in &scene.pairs {
        let (ba, bb) = (&scene.bodies[pair.a], &scene.bodies[pair.b]);
        e.contact +=
            potential_energy(&ba.contact, &states[pair.a].pose, &bb.contact, &states[pair.b].pose)?;
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub time: f64,
    pub states: Vec<BodyState>,
    pub wrenches: Vec<PairWrench>,
    pub energy: EnergyBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub body_names: Vec<String>,
    pub pair_names: Vec<String>,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["time".to_string()];
        for b in &self.body_names {
            for c in ["x", "y", "z", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz"] {
                h.push(format!("{b}.{c}"));
            }
        }
        for p in &self.pair_names {
            for c in ["fx", "fy", "fz", "tx", "ty", "tz"] {
                h.push(format!("{p}.{c}"));
            }
        }
        h.push("U".into());
        h.push("energy".into());
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for s in &self.samples {
            let mut row = vec![format!("{:?}", s.time)];
            for st in &s.states {
                let t = st.pose.translation.vector;
                let q = st.pose.rotation.quaternion();
                let values = [
                    t.x, t.y, t.z, q.w, q.i, q.j, q.k, st.linear.x, st.linear.y, st.linear.z,
                    st.angular.x, st.angular.y, st.angular.z,
                ];
                row.extend(values.iter().map(|v| format!("{v:?}")));
            }
            for w in &s.wrenches {
                let values = w.on_a.force.iter().chain(w.on_a.torque.iter());
                row.extend(values.map(|v| format!("{v:?}")));
            }
            row.push(format!("{:?}", s.energy.contact));
            row.push(format!("{:?}", s.energy.total()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Runs the scene, calling `observe` on every recorded sample.
pub fn simulate_with(
    scene: &Scene,
    mut observe: impl FnMut(&Sample),
) -> Result<Trajectory, SimError> {
    scene.validate()?;
    let steps = scene.step_count();
    let mut states = scene.initial_states();
    let mut samples = Vec::new();
    for n in 0..=steps {
        let wrenches = contact_wrenches(scene, &states)?;
        if n % scene.log_every == 0 || n == steps {
            let sample = Sample {
                step: n,
                time: n as f64 * scene.dt,
                states: states.clone(),
                wrenches: wrenches.clone(),
                energy: energy(scene, &states)?,
            };
            observe(&sample);
            samples.push(sample);
        }
        if n == steps {
            break;
        }
        states = advance(scene, &states, &wrenches, n)?;
    }
    Ok(Trajectory {
        body_names: scene.bodies.iter().map(|b| b.name.clone()).collect(),
        pair_names: scene.pairs.iter().map(|p| scene.pair_name(p)).collect(),
        samples,
    })
}

pub fn simulate(scene: &Scene) -> Result<Trajectory, SimError> {
    simulate_with(scene, |_| {})
}
