use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};

use crate::error::MeshError;

/// Pose and spatial velocity of one rigid body.
///
/// Velocities are expressed in world: `angular` is the body's angular
/// velocity, `linear` the velocity of the body-frame origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub pose: Isometry3<f64>,
    pub angular: Vector3<f64>,
    pub linear: Vector3<f64>,
}

impl Default for BodyState {
    fn default() -> Self {
        Self::at_rest(Isometry3::identity())
    }
}

impl BodyState {
    pub fn at_rest(pose: Isometry3<f64>) -> Self {
        Self { pose, angular: Vector3::zeros(), linear: Vector3::zeros() }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self::at_rest(Isometry3::from_parts(Translation3::from(t), UnitQuaternion::identity()))
    }

    pub fn with_velocity(mut self, angular: Vector3<f64>, linear: Vector3<f64>) -> Self {
        self.angular = angular;
        self.linear = linear;
        self
    }

    pub fn origin(&self) -> Point3<f64> {
        Point3::from(self.pose.translation.vector)
    }

    /// Checks that the rotation is orthonormal with determinant +1 (1e-9).
    pub fn validate(&self) -> Result<(), MeshError> {
        let r = self.pose.rotation.to_rotation_matrix().into_inner();
        let err = (r.transpose() * r - nalgebra::Matrix3::identity()).abs().max();
        let det = r.determinant();
        if !(err <= 1e-9 && (det - 1.0).abs() <= 1e-9) {
            return Err(MeshError::InvalidArgument(format!(
                "rotation not orthonormal (|R^T R - I| = {err:e}, det = {det})"
            )));
        }
        let finite = self.pose.translation.vector.iter().all(|v| v.is_finite())
            && self.angular.iter().all(|v| v.is_finite())
            && self.linear.iter().all(|v| v.is_finite());
        if !finite {
            return Err(MeshError::InvalidArgument("non-finite body state".into()));
        }
        Ok(())
    }
}

/// Velocity of the body's material point currently at `point` (world).
pub fn world_point_velocity(state: &BodyState, point: &Point3<f64>) -> Vector3<f64> {
    state.linear + state.angular.cross(&(point - state.origin()))
}
