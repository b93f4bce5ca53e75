//! Wavefront OBJ: only `v` and `f` records are read; everything else is
//! skipped. Polygons with more than three corners are fan-triangulated.

use std::fmt::Write as _;

use log::warn;
use nalgebra::Point3;

use super::mesh::TriMesh;
use crate::error::{Error, Result};

pub fn parse_obj(text: &str, source: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut face_lines = Vec::new();
    let mut fanned = 0usize;

    for (n, line) in text.lines().enumerate() {
        let location = || format!("{source}:{}", n + 1);
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let mut xyz = [0.0; 3];
                for c in &mut xyz {
                    let f = fields
                        .next()
                        .ok_or_else(|| Error::parse(location(), "vertex needs 3 coordinates"))?;
                    *c = f
                        .parse()
                        .map_err(|_| Error::parse(location(), format!("`{f}` is not a number")))?;
                }
                vertices.push(Point3::from(xyz));
            }
            Some("f") => {
                let corners = fields
                    .map(|f| resolve_index(f, vertices.len()).map_err(|m| Error::parse(location(), m)))
                    .collect::<Result<Vec<_>>>()?;
                if corners.len() < 3 {
                    return Err(Error::parse(location(), "face needs at least 3 vertices"));
                }
                if corners.len() > 3 {
                    fanned += 1;
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0], corners[k], corners[k + 1]]);
                    face_lines.push(n + 1);
                }
            }
            _ => {}
        }
    }
    if fanned > 0 {
        warn!("{source}: fan-triangulated {fanned} polygon(s) with more than 3 vertices");
    }
    TriMesh::new(vertices, triangles).map_err(|e| match e {
        Error::IndexOutOfRange { triangle, .. } => {
            Error::parse(format!("{source}:{}", face_lines[triangle]), e.to_string())
        }
        Error::InvalidMesh(_) => Error::parse(source, e.to_string()),
        other => other,
    })
}

/// Resolves `i`, `i/t`, `i//n` or `i/t/n` to a 0-based index. Negative
/// indices count back from the latest vertex. Range checks against the
/// final vertex count happen in `TriMesh::new`.
fn resolve_index(field: &str, seen: usize) -> std::result::Result<usize, String> {
    let head = field.split('/').next().unwrap_or_default();
    let i: i64 = head
        .parse()
        .map_err(|_| format!("`{field}` is not a vertex index"))?;
    match i {
        0 => Err("vertex index 0 is invalid (OBJ indices are 1-based)".into()),
        i if i > 0 => Ok((i - 1) as usize),
        i => {
            let back = i.unsigned_abs() as usize;
            if back > seen {
                Err(format!("relative index {i} precedes the first vertex"))
            } else {
                Ok(seen - back)
            }
        }
    }
}

/// Writes `v`/`f` records. Coordinates use the shortest representation
/// that round-trips exactly.
pub fn to_obj(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.vertex_count() * 32 + mesh.triangle_count() * 16);
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", a + 1, b + 1, c + 1);
    }
    out
}
