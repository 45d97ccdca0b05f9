//! Pressure field contact between nominally rigid bodies.
//!
//! Each body carries a tetrahedral mesh and an offline "penetration extent"
//! field `eps` (zero on the surface, growing inward) that defines a virtual
//! pressure `p0 = E * eps`. When two bodies overlap, the contact surface is the
//! set of points where the two pressures are equal. Over a pair of linear tets
//! that set is a plane, so the surface is assembled from convex polygons
//! clipped out of tet pairs, tessellated as centroid fans, and integrated to a
//! net wrench. The same fields give a contact potential energy.
//!
//! Modules, in pipeline order:
//!
//! - [`mesh`]: tet meshes, barycentric queries, `ptm` I/O, generators
//! - [`field`]: extent fields (analytic or Laplace) and `pfd` I/O
//! - [`bvh`]: bounding volume hierarchies and the broad phase
//! - [`contact`]: equal-pressure planes, clipping, tessellation, surfaces
//! - [`traction`]: damping, friction and wrench integration
//! - [`energy`]: displaced volumes and contact potential energy
//! - [`sim`]: a fixed-step rigid-body harness and scenarios

// Guards like `!(x > 0.0)` are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvh;
pub mod contact;
pub mod energy;
pub mod error;
pub mod field;
pub mod mesh;
pub mod sim;
pub mod state;
pub mod traction;

pub use error::{ContactError, FieldError, MeshError, SimError};
pub use field::{DirichletSpec, ExtentField};
pub use mesh::{BarycentricCoords, TetMesh};
pub use state::{world_point_velocity, BodyState};
