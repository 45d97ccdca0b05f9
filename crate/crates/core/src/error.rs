use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading or validating meshes and fields.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("tet {tet} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange { tet: usize, index: usize, count: usize },
    #[error("tet {tet} is degenerate (|volume| = {volume:e} m^3)")]
    DegenerateTet { tet: usize, volume: f64 },
    #[error("tet {tet} repeats vertex indices")]
    RepeatedVertex { tet: usize },
    #[error("tets {first} and {second} are duplicates")]
    DuplicateTet { first: usize, second: usize },
    #[error("boundary is not a closed orientable surface: {0}")]
    NotWatertight(String),
    #[error("mesh has no tetrahedra")]
    Empty,
    #[error("tet index {0} out of range")]
    NoSuchTet(usize),
    #[error("point lies outside tet {tet} (min barycentric coordinate {min_coord:e})")]
    OutsideTet { tet: usize, min_coord: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Errors from offline field generation.
#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("invalid field: {0}")]
    Invalid(String),
    #[error("invalid Dirichlet specification: {0}")]
    BadBoundaryConditions(String),
    #[error("singular system: {0} connected component(s) carry no Dirichlet constraint")]
    Singular(usize),
    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

/// Errors from the online contact pipeline.
#[derive(Debug, Error)]
pub enum ContactError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("state does not match the pose the contact surface was computed at ({0})")]
    InconsistentState(&'static str),
    #[error("invalid contact parameters: {0}")]
    InvalidParams(String),
}

/// Errors from the rigid-body harness.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("non-finite state at step {step} (t = {time} s)")]
    Diverged { step: usize, time: f64 },
    #[error("scene json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("trajectory output: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
