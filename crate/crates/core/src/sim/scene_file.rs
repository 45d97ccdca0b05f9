//! JSON scene documents. Mesh and field paths are relative to the scene file.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{Isometry3, Matrix3, Quaternion, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{ContactPair, RigidBody, Scene};
use crate::contact::ContactBody;
use crate::error::SimError;
use crate::field::load_field;
use crate::mesh::load_mesh;
use crate::state::BodyState;
use crate::traction::{ContactParams, Quadrature, DEFAULT_SLIP_SPEED};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 3],
    pub dt: f64,
    pub duration: f64,
    #[serde(default = "one")]
    pub log_every: usize,
    #[serde(default = "one_u8")]
    pub quadrature: u8,
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub pairs: Vec<PairSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub name: String,
    pub mesh: PathBuf,
    pub field: PathBuf,
    /// Required unless kinematic (kg).
    #[serde(default)]
    pub mass: Option<f64>,
    /// About the center of mass in body axes, row-major (kg m^2).
    #[serde(default)]
    pub inertia: Option<[[f64; 3]; 3]>,
    #[serde(default)]
    pub position: [f64; 3],
    /// Quaternion `[w, x, y, z]`; normalized on load.
    #[serde(default = "identity_quaternion")]
    pub orientation: [f64; 4],
    #[serde(default)]
    pub linear_velocity: [f64; 3],
    #[serde(default)]
    pub angular_velocity: [f64; 3],
    #[serde(default)]
    pub kinematic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub chi: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_slip_speed")]
    pub v_s: f64,
}

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -9.81]
}

fn one() -> usize {
    1
}

fn one_u8() -> u8 {
    1
}

fn identity_quaternion() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

fn default_slip_speed() -> f64 {
    DEFAULT_SLIP_SPEED
}

pub fn parse_scene(text: &str) -> Result<SceneFile, SimError> {
    Ok(serde_json::from_str(text)?)
}

/// Reads a scene and every mesh and field it references.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, SimError> {
    let path = path.as_ref();
    let file = parse_scene(&std::fs::read_to_string(path)?)?;
    file.build(path.parent().unwrap_or(Path::new(".")))
}

impl SceneFile {
    pub fn build(&self, base: &Path) -> Result<Scene, SimError> {
        let mut loaded: HashMap<(PathBuf, PathBuf), Arc<ContactBody>> = HashMap::new();
        let mut bodies = Vec::with_capacity(self.bodies.len());
        for spec in &self.bodies {
            if bodies.iter().any(|b: &RigidBody| b.name == spec.name) {
                return Err(SimError::InvalidScene(format!("duplicate body name {}", spec.name)));
            }
            let key = (base.join(&spec.mesh), base.join(&spec.field));
            let contact = match loaded.get(&key) {
                Some(c) => c.clone(),
                None => {
                    let mesh = load_mesh(&key.0)?;
                    let field = load_field(&key.1)?;
                    let c = Arc::new(ContactBody::new(mesh, field)?);
                    loaded.insert(key, c.clone());
                    c
                }
            };
            let [w, x, y, z] = spec.orientation;
            let q = Quaternion::new(w, x, y, z);
            if !(q.norm() > 0.0) {
                return Err(SimError::InvalidScene(format!("body {}: zero orientation quaternion", spec.name)));
            }
            let initial = BodyState {
                pose: Isometry3::from_parts(
                    Translation3::from(Vector3::from(spec.position)),
                    UnitQuaternion::from_quaternion(q),
                ),
                angular: Vector3::from(spec.angular_velocity),
                linear: Vector3::from(spec.linear_velocity),
            };
            let body = if spec.kinematic {
                RigidBody::kinematic(spec.name.clone(), contact, initial)
            } else {
                let mass = spec.mass.ok_or_else(|| {
                    SimError::InvalidScene(format!("body {}: dynamic bodies need a mass", spec.name))
                })?;
                let inertia = spec.inertia.ok_or_else(|| {
                    SimError::InvalidScene(format!("body {}: dynamic bodies need an inertia", spec.name))
                })?;
                let inertia = Matrix3::from_fn(|r, c| inertia[r][c]);
                RigidBody::dynamic(spec.name.clone(), contact, mass, inertia, initial)
            };
            bodies.push(body);
        }
        let index = |name: &str| {
            bodies
                .iter()
                .position(|b| b.name == name)
                .ok_or_else(|| SimError::InvalidScene(format!("pair references unknown body {name}")))
        };
        let pairs = self
            .pairs
            .iter()
            .map(|p| {
                Ok(ContactPair {
                    a: index(&p.a)?,
                    b: index(&p.b)?,
                    params: ContactParams::new(p.chi, p.mu, p.v_s)?,
                })
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        let scene = Scene {
            bodies,
            gravity: Vector3::from(self.gravity),
            pairs,
            dt: self.dt,
            duration: self.duration,
            quadrature: Quadrature::try_from(self.quadrature)?,
            log_every: self.log_every,
        };
        scene.validate()?;
        Ok(scene)
    }
}
