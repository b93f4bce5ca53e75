use nalgebra::Point3;

use crate::error::{Error, Result};

/// Relative area threshold below which a triangle counts as degenerate:
/// `|ab x ac| <= DEGENERATE_REL * max_edge^2`.
pub const DEGENERATE_REL: f64 = 1e-12;

/// Indexed triangle mesh. Vertices are in millimetres for ground-truth
/// scans; predictions may use any unit.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Builds a mesh, checking that every index is in range, every
    /// coordinate is finite and no triangle repeats a vertex.
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|v| !v.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} has a non-finite coordinate")));
        }
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange {
                    triangle: t,
                    index,
                    vertex_count: n,
                });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex twice: {tri:?}"
                )));
            }
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    /// A triangle-free payload, e.g. a bare point set.
    pub fn from_points(vertices: Vec<Point3<f64>>) -> Result<Self> {
        Self::new(vertices, Vec::new())
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn is_degenerate(&self, t: usize) -> bool {
        let [a, b, c] = self.triangle_points(t);
        is_degenerate_triangle(&a, &b, &c)
    }

    /// Number of triangles with non-zero area.
    pub fn surface_triangle_count(&self) -> usize {
        (0..self.triangles.len()).filter(|&t| !self.is_degenerate(t)).count()
    }

    /// Returns a mesh with the same connectivity and every vertex passed
    /// through `f`.
    pub fn map_vertices(&self, mut f: impl FnMut(&Point3<f64>) -> Point3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| f(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Axis-aligned bounds `(min, max)`; `None` for an empty mesh.
    pub fn bounds(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (lo.inf(v), hi.sup(v))
        }))
    }
}

pub fn is_degenerate_triangle(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> bool {
    let ab = b - a;
    let ac = c - a;
    let bc = c - b;
    let longest = ab
        .norm_squared()
        .max(ac.norm_squared())
        .max(bc.norm_squared());
    let area2 = ab.cross(&ac).norm();
    !(area2 > DEGENERATE_REL * longest) || longest == 0.0
}
