//! Linear finite-element solution of Laplace's equation on a tet mesh.
//!
//! The stiffness matrix of P1 elements is assembled per tet, Dirichlet
//! vertices are eliminated and the remaining SPD system is solved with
//! Jacobi-preconditioned conjugate gradients.

use std::collections::VecDeque;

use super::{compute_gradient_approx, DirichletSpec, ExtentField};
use crate::error::FieldError;
use crate::mesh::{shape_gradients, TetMesh};

/// Discrete maximum-principle slack allowed before clamping into [0, 1].
const RANGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    /// Relative residual `|r| / |b|` at which iteration stops.
    pub tolerance: f64,
    /// Iteration cap as a multiple of the number of unknowns.
    pub max_iterations_per_unknown: usize,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations_per_unknown: 10 }
    }
}

/// Extent for a 0/1 Dirichlet specification, clamped into [0, 1].
pub fn solve_laplace(mesh: &TetMesh, bc: &DirichletSpec) -> Result<Vec<f64>, FieldError> {
    bc.check_mesh(mesh)?;
    let mut values = solve_laplace_values(mesh, &bc.values(), CgSettings::default())?;
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(-RANGE_TOLERANCE..=1.0 + RANGE_TOLERANCE).contains(*v))
    {
        return Err(FieldError::Invalid(format!(
            "solution {v} at vertex {i} violates the maximum principle"
        )));
    }
    for v in &mut values {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(values)
}

/// Full field (extent, volume-weighted gradient approximation, modulus).
pub fn laplace_field(mesh: &TetMesh, bc: &DirichletSpec, modulus: f64) -> Result<ExtentField, FieldError> {
    let extent = solve_laplace(mesh, bc)?;
    let gradient = compute_gradient_approx(mesh, &extent);
    ExtentField::new(extent, gradient, modulus)
}

/// Harmonic interpolation of arbitrary Dirichlet data `(vertex, value)`.
///
/// Unconstrained boundary vertices get homogeneous Neumann conditions.
pub fn solve_laplace_values(
    mesh: &TetMesh,
    dirichlet: &[(usize, f64)],
    settings: CgSettings,
) -> Result<Vec<f64>, FieldError> {
    let n = mesh.vertex_count();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &(v, value) in dirichlet {
        if v >= n {
            return Err(FieldError::BadBoundaryConditions(format!("vertex {v} out of range")));
        }
        fixed[v] = Some(value);
    }
    let unconstrained = unconstrained_components(mesh, &fixed);
    if unconstrained > 0 {
        return Err(FieldError::Singular(unconstrained));
    }

    // Free vertices are renumbered 0..m.
    let mut unknown = vec![usize::MAX; n];
    let mut m = 0;
    for v in 0..n {
        if fixed[v].is_none() {
            unknown[v] = m;
            m += 1;
        }
    }

    let mut triplets = Vec::with_capacity(16 * mesh.tet_count());
    let mut rhs = vec![0.0; m];
    for (t, tet) in mesh.tets().iter().enumerate() {
        let grads = shape_gradients(&mesh.tet_corners(t)).expect("mesh tets are non-degenerate");
        let vol = mesh.tet_volume(t);
        for a in 0..4 {
            let row = unknown[tet[a]];
            if row == usize::MAX {
                continue;
            }
            for b in 0..4 {
                let k = vol * grads[a].dot(&grads[b]);
                match fixed[tet[b]] {
                    Some(value) => rhs[row] -= k * value,
                    None => triplets.push((row, unknown[tet[b]], k)),
                }
            }
        }
    }
    let matrix = Csr::from_triplets(m, triplets);
    let free = conjugate_gradient(&matrix, &rhs, settings)?;

    Ok((0..n).map(|v| fixed[v].unwrap_or_else(|| free[unknown[v]])).collect())
}

/// Number of connected components (through tet edges) with no pinned vertex.
fn unconstrained_components(mesh: &TetMesh, fixed: &[Option<f64>]) -> usize {
    let n = mesh.vertex_count();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tet in mesh.tets() {
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    adjacency[tet[a]].push(tet[b]);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] || adjacency[start].is_empty() {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut pinned = false;
        while let Some(v) = queue.pop_front() {
            pinned |= fixed[v].is_some();
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if !pinned {
            count += 1;
        }
    }
    count
}

/// Compressed sparse rows, duplicates summed in insertion order.
struct Csr {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_start = vec![0; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_start[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_start[r + 1] += row_start[r];
        }
        Self { row_start, cols, vals }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_start[r]..self.row_start[r + 1];
            *o = self.cols[span.clone()].iter().zip(&self.vals[span]).map(|(&c, v)| v * x[c]).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.row_start.len() - 1)
            .map(|r| {
                let span = self.row_start[r]..self.row_start[r + 1];
                self.cols[span.clone()]
                    .iter()
                    .zip(&self.vals[span])
                    .find(|(&c, _)| c == r)
                    .map_or(0.0, |(_, v)| *v)
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conjugate_gradient(a: &Csr, b: &[f64], settings: CgSettings) -> Result<Vec<f64>, FieldError> {
    let m = b.len();
    let mut x = vec![0.0; m];
    let b_norm = dot(b, b).sqrt();
    if m == 0 || b_norm == 0.0 {
        return Ok(x);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz = dot(&r, &z);
    let cap = settings.max_iterations_per_unknown * m;
    let mut residual = 1.0;
    for _ in 0..cap {
        a.mul(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        residual = dot(&r, &r).sqrt() / b_norm;
        if residual <= settings.tolerance {
            return Ok(x);
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(FieldError::NotConverged { iterations: cap, residual })
}
