//! Reader and writer for the plain-text `ptm` mesh format.
//!
//! ```text
//! ptm 1
//! vertices N
//! x y z          (N lines)
//! tets M
//! i j k l        (M lines, 0-based)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use super::TetMesh;
use crate::error::MeshError;

pub fn load_mesh(path: impl AsRef<Path>) -> Result<TetMesh, MeshError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| MeshError::Io { path: path.to_path_buf(), source })?;
    parse_mesh(&text)
}

pub fn parse_mesh(text: &str) -> Result<TetMesh, MeshError> {
    let mut lines = Lines::new(text);
    lines.expect_header("ptm")?;
    let n = lines.expect_count("vertices")?;
    let mut vertices = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, v) = lines.numbers::<f64>(3)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(MeshError::Parse { line, message: "non-finite coordinate".into() });
        }
        vertices.push(Point3::new(v[0], v[1], v[2]));
    }
    let m = lines.expect_count("tets")?;
    let mut tets = Vec::with_capacity(m);
    for _ in 0..m {
        let (_, t) = lines.numbers::<usize>(4)?;
        tets.push([t[0], t[1], t[2], t[3]]);
    }
    lines.expect_end()?;
    TetMesh::new(vertices, tets)
}

pub fn write_mesh(mesh: &TetMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    std::fs::write(path, format_mesh(mesh))
        .map_err(|source| MeshError::Io { path: path.to_path_buf(), source })
}

pub fn format_mesh(mesh: &TetMesh) -> String {
    let mut out = String::new();
    writeln!(out, "ptm 1").unwrap();
    writeln!(out, "vertices {}", mesh.vertex_count()).unwrap();
    for v in mesh.vertices() {
        writeln!(out, "{:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
    }
    writeln!(out, "tets {}", mesh.tet_count()).unwrap();
    for t in mesh.tets() {
        writeln!(out, "{} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
    }
    out
}

/// Line cursor shared by the `ptm` and `pfd` parsers. Blank lines are skipped.
pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0 }
    }

    fn next_line(&mut self) -> Result<(usize, Vec<&'a str>), MeshError> {
        for (i, line) in self.inner.by_ref() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if !tokens.is_empty() {
                self.last = i + 1;
                return Ok((i + 1, tokens));
            }
        }
        Err(MeshError::Parse { line: self.last + 1, message: "unexpected end of file".into() })
    }

    pub(crate) fn expect_header(&mut self, magic: &str) -> Result<(), MeshError> {
        let (line, tokens) = self.next_line()?;
        if tokens != [magic, "1"] {
            return Err(MeshError::Parse { line, message: format!("expected `{magic} 1`") });
        }
        Ok(())
    }

    pub(crate) fn expect_count(&mut self, keyword: &str) -> Result<usize, MeshError> {
        let (line, tokens) = self.next_line()?;
        match tokens.as_slice() {
            [k, n] if *k == keyword => n.parse().map_err(|_| MeshError::Parse {
                line,
                message: format!("bad count `{n}`"),
            }),
            _ => Err(MeshError::Parse { line, message: format!("expected `{keyword} <count>`") }),
        }
    }

    pub(crate) fn expect_value(&mut self, keyword: &str) -> Result<f64, MeshError> {
        let (line, tokens) = self.next_line()?;
        match tokens.as_slice() {
            [k, v] if *k == keyword => v.parse().map_err(|_| MeshError::Parse {
                line,
                message: format!("bad number `{v}`"),
            }),
            _ => Err(MeshError::Parse { line, message: format!("expected `{keyword} <value>`") }),
        }
    }

    pub(crate) fn numbers<T: std::str::FromStr>(
        &mut self,
        count: usize,
    ) -> Result<(usize, Vec<T>), MeshError> {
        let (line, tokens) = self.next_line()?;
        if tokens.len() != count {
            return Err(MeshError::Parse {
                line,
                message: format!("expected {count} values, found {}", tokens.len()),
            });
        }
        let values = tokens
            .iter()
            .map(|t| {
                t.parse::<T>()
                    .map_err(|_| MeshError::Parse { line, message: format!("bad value `{t}`") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((line, values))
    }

    pub(crate) fn expect_end(&mut self) -> Result<(), MeshError> {
        match self.next_line() {
            Err(_) => Ok(()),
            Ok((line, _)) => Err(MeshError::Parse { line, message: "trailing data".into() }),
        }
    }
}
