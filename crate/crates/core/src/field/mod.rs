//! Penetration extent fields and their offline generation.
//!
//! The pressure at a material point is `p0 = E * eps`, where `eps` is stored
//! per mesh vertex and interpolated linearly inside each tet. Alongside `eps`
//! each vertex carries an approximate gradient used by the dissipation term.

mod analytic;
mod gradient;
mod laplace;

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

pub use analytic::{
    analytic_box_field, analytic_slab_field, analytic_sphere_field, box_field_on, slab_field_on,
    sphere_field_on,
};
pub use gradient::{compute_gradient_approx, tet_extent_gradient};
pub use laplace::{laplace_field, solve_laplace, solve_laplace_values, CgSettings};

use crate::error::{FieldError, MeshError};
use crate::mesh::io::Lines;
use crate::mesh::TetMesh;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtentField {
    extent: Vec<f64>,
    gradient: Vec<Vector3<f64>>,
    modulus: f64,
}

impl ExtentField {
    pub fn new(extent: Vec<f64>, gradient: Vec<Vector3<f64>>, modulus: f64) -> Result<Self, FieldError> {
        if extent.len() != gradient.len() {
            return Err(FieldError::Invalid(format!(
                "{} extents but {} gradients",
                extent.len(),
                gradient.len()
            )));
        }
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(FieldError::Invalid(format!("modulus must be positive, got {modulus}")));
        }
        if let Some((i, e)) = extent.iter().enumerate().find(|(_, e)| !(0.0..=1.0).contains(*e)) {
            return Err(FieldError::Invalid(format!("extent {e} at vertex {i} outside [0, 1]")));
        }
        if gradient.iter().any(|g| !g.iter().all(|c| c.is_finite())) {
            return Err(FieldError::Invalid("non-finite gradient".into()));
        }
        Ok(Self { extent, gradient, modulus })
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn gradient(&self) -> &[Vector3<f64>] {
        &self.gradient
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// Equilibrium pressure `E * eps` at a vertex.
    pub fn pressure(&self, vertex: usize) -> f64 {
        self.modulus * self.extent[vertex]
    }

    pub fn with_modulus(mut self, modulus: f64) -> Result<Self, FieldError> {
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(FieldError::Invalid(format!("modulus must be positive, got {modulus}")));
        }
        self.modulus = modulus;
        Ok(self)
    }

    pub fn check_mesh(&self, mesh: &TetMesh) -> Result<(), FieldError> {
        if self.extent.len() != mesh.vertex_count() {
            return Err(FieldError::Invalid(format!(
                "field has {} vertices, mesh has {}",
                self.extent.len(),
                mesh.vertex_count()
            )));
        }
        Ok(())
    }

    pub fn stats(&self, mesh: &TetMesh) -> FieldStats {
        let (min, max) = self
            .extent
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        let max_boundary_extent = mesh
            .boundary_vertices()
            .into_iter()
            .map(|i| self.extent[i])
            .fold(0.0, f64::max);
        FieldStats { min, max, max_boundary_extent, vertices: self.extent.len() }
    }
}

/// Summary printed by the field generator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FieldStats {
    pub min: f64,
    pub max: f64,
    pub max_boundary_extent: f64,
    pub vertices: usize,
}

impl FieldStats {
    /// True when every boundary vertex has zero extent.
    pub fn boundary_is_zero(&self) -> bool {
        self.max_boundary_extent == 0.0
    }
}

/// Dirichlet data for the Laplace generator: vertices pinned to 0 and to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletSpec {
    zero_set: Vec<usize>,
    one_set: Vec<usize>,
}

impl DirichletSpec {
    pub fn new(mut zero_set: Vec<usize>, mut one_set: Vec<usize>) -> Result<Self, FieldError> {
        zero_set.sort_unstable();
        zero_set.dedup();
        one_set.sort_unstable();
        one_set.dedup();
        if zero_set.is_empty() || one_set.is_empty() {
            return Err(FieldError::BadBoundaryConditions("both sets must be non-empty".into()));
        }
        if let Some(v) = zero_set.iter().find(|v| one_set.binary_search(v).is_ok()) {
            return Err(FieldError::BadBoundaryConditions(format!(
                "vertex {v} is in both the zero and the one set"
            )));
        }
        Ok(Self { zero_set, one_set })
    }

    /// Zero on the whole boundary, one on the given interior vertices.
    pub fn boundary_to(mesh: &TetMesh, one_set: Vec<usize>) -> Result<Self, FieldError> {
        Self::new(mesh.boundary_vertices(), one_set)
    }

    pub fn zero_set(&self) -> &[usize] {
        &self.zero_set
    }

    pub fn one_set(&self) -> &[usize] {
        &self.one_set
    }

    /// Whether the zero set contains every boundary vertex.
    pub fn covers_boundary(&self, mesh: &TetMesh) -> bool {
        mesh.boundary_vertices().iter().all(|v| self.zero_set.binary_search(v).is_ok())
    }

    /// Pinned values as `(vertex, value)` pairs.
    pub fn values(&self) -> Vec<(usize, f64)> {
        self.zero_set
            .iter()
            .map(|&v| (v, 0.0))
            .chain(self.one_set.iter().map(|&v| (v, 1.0)))
            .collect()
    }

    /// Parses `zero <indices...>` and `one <indices...>` lines.
    pub fn parse(text: &str) -> Result<Self, FieldError> {
        let mut zero = None;
        let mut one = None;
        for (n, line) in text.lines().enumerate() {
            let mut tokens = line.split_whitespace();
            let Some(key) = tokens.next() else { continue };
            let indices = tokens
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| MeshError::Parse { line: n + 1, message: e.to_string() })?;
            match key {
                "zero" => zero.get_or_insert_with(Vec::new).extend(indices),
                "one" => one.get_or_insert_with(Vec::new).extend(indices),
                other => {
                    return Err(MeshError::Parse {
                        line: n + 1,
                        message: format!("expected `zero` or `one`, found `{other}`"),
                    }
                    .into())
                }
            }
        }
        Self::new(zero.unwrap_or_default(), one.unwrap_or_default())
    }

    pub fn check_mesh(&self, mesh: &TetMesh) -> Result<(), FieldError> {
        let n = mesh.vertex_count();
        match self.zero_set.iter().chain(&self.one_set).find(|&&v| v >= n) {
            Some(v) => Err(FieldError::BadBoundaryConditions(format!(
                "vertex {v} out of range for a mesh with {n} vertices"
            ))),
            None => Ok(()),
        }
    }
}

pub fn load_field(path: impl AsRef<Path>) -> Result<ExtentField, FieldError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| MeshError::Io { path: path.to_path_buf(), source })?;
    parse_field(&text)
}

/// Parses the `pfd` format: `pfd 1`, `modulus E`, `vertices N`, then N lines
/// of `eps gx gy gz`.
pub fn parse_field(text: &str) -> Result<ExtentField, FieldError> {
    let mut lines = Lines::new(text);
    lines.expect_header("pfd")?;
    let modulus = lines.expect_value("modulus")?;
    let n = lines.expect_count("vertices")?;
    let mut extent = Vec::with_capacity(n);
    let mut gradient = Vec::with_capacity(n);
    for _ in 0..n {
        let (_, v) = lines.numbers::<f64>(4)?;
        extent.push(v[0]);
        gradient.push(Vector3::new(v[1], v[2], v[3]));
    }
    lines.expect_end()?;
    ExtentField::new(extent, gradient, modulus)
}

pub fn format_field(field: &ExtentField) -> String {
    let mut out = String::new();
    writeln!(out, "pfd 1").unwrap();
    writeln!(out, "modulus {:?}", field.modulus).unwrap();
    writeln!(out, "vertices {}", field.extent.len()).unwrap();
    for (e, g) in field.extent.iter().zip(&field.gradient) {
        writeln!(out, "{:?} {:?} {:?} {:?}", e, g.x, g.y, g.z).unwrap();
    }
    out
}

pub fn write_field(field: &ExtentField, path: impl AsRef<Path>) -> Result<(), FieldError> {
    let path = path.as_ref();
    std::fs::write(path, format_field(field))
        .map_err(|source| MeshError::Io { path: path.to_path_buf(), source }.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_fields() {
        let g = vec![Vector3::zeros(); 2];
        assert!(ExtentField::new(vec![0.0, 1.0], g.clone(), 0.0).is_err());
        assert!(ExtentField::new(vec![0.0, 1.5], g.clone(), 1.0).is_err());
        assert!(ExtentField::new(vec![0.0], g.clone(), 1.0).is_err());
        assert!(ExtentField::new(vec![0.0, 0.5], g, 1.0).is_ok());
    }

    #[test]
    fn pfd_round_trip() {
        let field = ExtentField::new(
            vec![0.0, 1.0 / 3.0],
            vec![Vector3::new(0.1, -0.2, 0.7), Vector3::zeros()],
            1e5,
        )
        .unwrap();
        let back = parse_field(&format_field(&field)).unwrap();
        assert_eq!(back, field);
        assert!(parse_field("pfd 1\nmodulus 1\nvertices 1\n0 0 0\n").is_err());
    }

    #[test]
    fn dirichlet_spec_validation() {
        assert!(DirichletSpec::new(vec![], vec![1]).is_err());
        assert!(DirichletSpec::new(vec![0, 1], vec![1]).is_err());
        let spec = DirichletSpec::parse("zero 0 1 2\none 3\n").unwrap();
        assert_eq!(spec.zero_set(), &[0, 1, 2]);
        assert_eq!(spec.one_set(), &[3]);
        assert!(DirichletSpec::parse("zero 0\nhalf 1\n").is_err());
    }
}
