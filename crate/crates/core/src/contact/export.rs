//! Triangle-soup export of a contact surface: an OBJ file with `v`/`f`
//! records and a sidecar listing `p0` per OBJ vertex, in the same order.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use super::ContactSurface;
use crate::error::MeshError;

/// Surface read back from an OBJ file and its pressure sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSoup {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[usize; 3]>,
    pub pressure: Vec<f64>,
}

impl SurfaceSoup {
    pub fn area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i]);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }
}

pub fn format_surface_obj(surface: &ContactSurface) -> String {
    let mut out = String::new();
    writeln!(out, "# contact surface: {} triangles", surface.triangles.len()).unwrap();
    for t in &surface.triangles {
        for p in &t.vertices {
            writeln!(out, "v {:?} {:?} {:?}", p.x, p.y, p.z).unwrap();
        }
    }
    for i in 0..surface.triangles.len() {
        writeln!(out, "f {} {} {}", 3 * i + 1, 3 * i + 2, 3 * i + 3).unwrap();
    }
    out
}

pub fn format_surface_pressure(surface: &ContactSurface) -> String {
    let mut out = String::new();
    writeln!(out, "p0 {}", 3 * surface.triangles.len()).unwrap();
    for t in &surface.triangles {
        for p in &t.pressure {
            writeln!(out, "{p:?}").unwrap();
        }
    }
    out
}

/// Writes `obj_path` and its sidecar (`obj_path` with a `.p0` extension).
pub fn write_surface(surface: &ContactSurface, obj_path: impl AsRef<Path>) -> Result<(), MeshError> {
    let obj_path = obj_path.as_ref();
    let sidecar = obj_path.with_extension("p0");
    std::fs::write(obj_path, format_surface_obj(surface))
        .map_err(|source| MeshError::Io { path: obj_path.to_path_buf(), source })?;
    std::fs::write(&sidecar, format_surface_pressure(surface))
        .map_err(|source| MeshError::Io { path: sidecar, source })
}

pub fn load_surface(obj_path: impl AsRef<Path>) -> Result<SurfaceSoup, MeshError> {
    let obj_path = obj_path.as_ref();
    let sidecar = obj_path.with_extension("p0");
    let obj = std::fs::read_to_string(obj_path)
        .map_err(|source| MeshError::Io { path: obj_path.to_path_buf(), source })?;
    let p0 = std::fs::read_to_string(&sidecar)
        .map_err(|source| MeshError::Io { path: sidecar, source })?;
    parse_surface(&obj, &p0)
}

pub fn parse_surface(obj: &str, p0: &str) -> Result<SurfaceSoup, MeshError> {
    let parse_err = |line: usize, message: String| MeshError::Parse { line, message };
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, line) in obj.lines().enumerate() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("v") => {
                let c: Vec<f64> = words
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|e| parse_err(i + 1, format!("bad vertex: {e}")))?;
                if c.len() != 3 {
                    return Err(parse_err(i + 1, format!("vertex needs 3 coordinates, got {}", c.len())));
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let ids: Vec<usize> = words
                    .map(|w| w.split('/').next().unwrap_or(w).parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| parse_err(i + 1, format!("bad face: {e}")))?;
                if ids.len() != 3 || ids.contains(&0) {
                    return Err(parse_err(i + 1, "face needs 3 one-based indices".into()));
                }
                faces.push([ids[0] - 1, ids[1] - 1, ids[2] - 1]);
            }
            _ => {}
        }
    }
    for (k, f) in faces.iter().enumerate() {
        if let Some(&index) = f.iter().find(|&&v| v >= vertices.len()) {
            return Err(MeshError::IndexOutOfRange { tet: k, index, count: vertices.len() });
        }
    }

    let mut lines = p0.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let count = match lines.next() {
        Some((i, l)) => l
            .strip_prefix("p0")
            .and_then(|n| n.trim().parse::<usize>().ok())
            .ok_or_else(|| parse_err(i + 1, format!("expected `p0 <count>`, got {l:?}")))?,
        None => return Err(parse_err(1, "empty pressure file".into())),
    };
    let pressure: Vec<f64> = lines
        .map(|(i, l)| l.trim().parse().map_err(|e| parse_err(i + 1, format!("bad pressure: {e}"))))
        .collect::<Result<_, _>>()?;
    if pressure.len() != count || count != vertices.len() {
        return Err(parse_err(
            1,
            format!("{} pressures for {} vertices (header says {count})", pressure.len(), vertices.len()),
        ));
    }
    Ok(SurfaceSoup { vertices, faces, pressure })
}

#[cfg(test)]
mod tests {
    use nalgebra::{Isometry3, Vector3};

    use super::*;
    use crate::contact::{compute_contact_surface, ContactBody};
    use crate::field::analytic_box_field;

    #[test]
    fn export_round_trips() {
        let (mesh, field) = analytic_box_field(Vector3::repeat(0.5), 1e5).unwrap();
        let body = ContactBody::new(mesh, field).unwrap();
        let pose_b = Isometry3::translation(0.6, 0.2, 0.1);
        let s = compute_contact_surface(&body, &Isometry3::identity(), &body, &pose_b).unwrap();
        assert!(!s.is_empty());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("surface.obj");
        write_surface(&s, &path).unwrap();
        let soup = load_surface(&path).unwrap();
        assert_eq!(soup.faces.len(), s.triangles.len());
        assert_eq!(soup.vertices[4], s.triangles[1].vertices[1]);
        assert_eq!(soup.pressure[5], s.triangles[1].pressure[2]);
        assert!((soup.area() - s.area()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_sidecar_is_rejected() {
        let obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
        assert!(parse_surface(obj, "p0 3\n1\n2\n3\n").is_ok());
        assert!(parse_surface(obj, "p0 2\n1\n2\n").is_err());
        assert!(parse_surface("v 0 0 0\nf 1 2 3\n", "p0 1\n0\n").is_err());
    }
}
