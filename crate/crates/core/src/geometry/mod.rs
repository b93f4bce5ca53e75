//! Mesh, landmark and transform types, their file formats, and the
//! seven-point similarity alignment that brings a prediction into the
//! ground-truth frame.

mod landmarks;
mod mesh;
pub mod obj;
pub mod ply;
mod transform;

use std::path::Path;

pub use landmarks::{Landmark, LandmarkSet7};
pub use mesh::{is_degenerate_triangle, TriMesh, DEGENERATE_REL};
pub use transform::{align_points, align_similarity, SimilarityTransform};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
    /// Binary little-endian PLY; only meaningful for writing.
    PlyBinary,
}

impl MeshFormat {
    /// Picks a format from the file extension (`.obj` or `.ply`).
    pub fn from_path(path: &Path) -> Result<MeshFormat> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(Error::UnsupportedFormat(format!(
                "{}: expected a .obj or .ply extension",
                path.display()
            ))),
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let source = path.display().to_string();
    match format {
        MeshFormat::Obj => {
            let text = std::str::from_utf8(&bytes).map_err(|e| {
                Error::parse(format!("{source}@{}", e.valid_up_to()), "OBJ file is not UTF-8")
            })?;
            obj::parse_obj(text, &source)
        }
        MeshFormat::Ply | MeshFormat::PlyBinary => ply::parse_ply(&bytes, &source),
    }
}

/// Loads a mesh, choosing the parser from the extension.
pub fn load_mesh_auto(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    load_mesh(path, MeshFormat::from_path(path)?)
}

pub fn save_mesh(mesh: &TriMesh, path: impl AsRef<Path>, format: MeshFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        MeshFormat::Obj => obj::to_obj(mesh).into_bytes(),
        MeshFormat::Ply => ply::to_ply_ascii(mesh).into_bytes(),
        MeshFormat::PlyBinary => ply::to_ply_binary(mesh),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
