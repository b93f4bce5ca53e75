//! Linear shape model: `S = mean + B·α + E·β` over `q` vertices, stored as
//! `3q`-vectors with coordinates interleaved `x0 y0 z0 x1 y1 z1 …`.
//!
//! ## Binary container (`.fbmm`)
//!
//! All integers are little-endian `u64` unless noted, all reals
//! little-endian IEEE-754 `f64`, matrices column-major:
//!
//! ```text
//! magic        4 bytes  "FBMM"
//! version      u32      1
//! q m e l t    5 × u64  vertices, shape modes, expression modes,
//!                       landmarks, triangles
//! mean         3q × f64
//! shape_basis  3q·m × f64
//! eigenvalues  m × f64
//! blendshapes  3q·e × f64
//! landmark_map l × u64
//! triangles    3t × u64
//! ```
//!
//! The JSON twin (`.json`) holds the same fields with basis and
//! blendshape matrices as arrays of columns.

use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3xX, Point3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LandmarkSet7, TriMesh};

const MAGIC: &[u8; 4] = b"FBMM";
const VERSION: u32 = 1;

/// Positions of the seven alignment landmarks inside the 68-point iBUG
/// markup: outer/inner corners of the right eye, inner/outer corners of
/// the left eye, nose bottom, right and left mouth corners.
pub const IBUG68_ALIGNMENT_POINTS: [usize; 7] = [36, 39, 42, 45, 33, 48, 54];

pub const IBUG68_LANDMARK_COUNT: usize = 68;

#[derive(Debug, Clone, PartialEq)]
pub struct MorphableModel {
    mean: DVector<f64>,
    shape_basis: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    blendshapes: DMatrix<f64>,
    landmark_map: Vec<usize>,
    triangles: Vec<[usize; 3]>,
}

impl MorphableModel {
    pub fn new(
        mean: DVector<f64>,
        shape_basis: DMatrix<f64>,
        eigenvalues: DVector<f64>,
        blendshapes: DMatrix<f64>,
        landmark_map: Vec<usize>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 3 != 0 {
            return Err(Error::DimensionMismatch(format!("mean has length {dim}, not a positive multiple of 3")));
        }
        let q = dim / 3;
        if shape_basis.nrows() != dim || blendshapes.nrows() != dim {
            return Err(Error::DimensionMismatch(format!(
                "basis rows {} / blendshape rows {} differ from mean length {dim}",
                shape_basis.nrows(),
                blendshapes.nrows()
            )));
        }
        let m = shape_basis.ncols();
        if eigenvalues.len() != m {
            return Err(Error::DimensionMismatch(format!("{m} basis columns but {} eigenvalues", eigenvalues.len())));
        }
        if m > 0 {
            let gram = shape_basis.transpose() * &shape_basis;
            let dev = (gram - DMatrix::identity(m, m)).abs().max();
            if dev > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "shape basis columns are not orthonormal (max |BᵀB − I| = {dev:e})"
                )));
            }
        }
        if eigenvalues.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("eigenvalues must be positive and finite".into()));
        }
        if eigenvalues.as_slice().windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("eigenvalues must be non-increasing".into()));
        }
        let mut seen = vec![false; q];
        for &i in &landmark_map {
            if i >= q {
                return Err(Error::InvalidArgument(format!("landmark vertex {i} out of range for {q} vertices")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("landmark vertex {i} listed twice")));
            }
        }
        if !mean.iter().chain(shape_basis.iter()).chain(blendshapes.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("model contains non-finite values".into()));
        }
        // Validates triangle indices.
        TriMesh::new(vec![Point3::origin(); q], triangles.clone())?;
        Ok(Self {
            mean,
            shape_basis,
            eigenvalues,
            blendshapes,
            landmark_map,
            triangles,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.mean.len() / 3
    }

    pub fn shape_mode_count(&self) -> usize {
        self.shape_basis.ncols()
    }

    pub fn expression_count(&self) -> usize {
        self.blendshapes.ncols()
    }

    pub fn landmark_count(&self) -> usize {
        self.landmark_map.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn shape_basis(&self) -> &DMatrix<f64> {
        &self.shape_basis
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn blendshapes(&self) -> &DMatrix<f64> {
        &self.blendshapes
    }

    pub fn landmark_map(&self) -> &[usize] {
        &self.landmark_map
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// `mean + B·α + E·β`.
    pub fn shape(&self, alpha: &DVector<f64>, beta: Option<&DVector<f64>>) -> Result<DVector<f64>> {
        if alpha.len() != self.shape_mode_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} shape coefficients for {} modes",
                alpha.len(),
                self.shape_mode_count()
            )));
        }
        let mut s = &self.mean + &self.shape_basis * alpha;
        if let Some(beta) = beta {
            if beta.len() != self.expression_count() {
                return Err(Error::DimensionMismatch(format!(
                    "{} expression coefficients for {} blendshapes",
                    beta.len(),
                    self.expression_count()
                )));
            }
            s += &self.blendshapes * beta;
        }
        Ok(s)
    }

    /// Least-squares shape coefficients of `shape`, i.e. `Bᵀ(shape − mean)`.
    pub fn coefficients_of(&self, shape: &DVector<f64>) -> DVector<f64> {
        self.shape_basis.tr_mul(&(shape - &self.mean))
    }

    /// The `3 × l` landmark columns of a `3q` shape vector.
    pub fn landmarks_of(&self, shape: &DVector<f64>) -> Matrix3xX<f64> {
        Matrix3xX::from_fn(self.landmark_map.len(), |r, c| shape[3 * self.landmark_map[c] + r])
    }

    /// Rows of a `3q × k` matrix that belong to landmark vertices, as a
    /// `3l × k` matrix in landmark order.
    pub fn landmark_rows(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(3 * self.landmark_map.len(), m.ncols(), |r, c| {
            m[(3 * self.landmark_map[r / 3] + r % 3, c)]
        })
    }

    pub fn to_mesh(&self, shape: &DVector<f64>) -> Result<TriMesh> {
        if shape.len() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "shape has length {}, model expects {}",
                shape.len(),
                self.mean.len()
            )));
        }
        let vertices = shape
            .as_slice()
            .chunks_exact(3)
            .map(|c| Point3::new(c[0], c[1], c[2]))
            .collect();
        TriMesh::new(vertices, self.triangles.clone())
    }

    /// Reads a `3q` shape back from a mesh with this model's topology.
    pub fn shape_from_mesh(&self, mesh: &TriMesh) -> Result<DVector<f64>> {
        if mesh.vertex_count() != self.vertex_count() {
            return Err(Error::DimensionMismatch(format!(
                "mesh has {} vertices, model has {}",
                mesh.vertex_count(),
                self.vertex_count()
            )));
        }
        Ok(DVector::from_iterator(
            self.mean.len(),
            mesh.vertices().iter().flat_map(|v| [v.x, v.y, v.z]),
        ))
    }

    /// The seven alignment landmarks of `shape`, read off the 68-point
    /// landmark map.
    pub fn alignment_landmarks(&self, shape: &DVector<f64>) -> Result<LandmarkSet7> {
        if self.landmark_map.len() != IBUG68_LANDMARK_COUNT {
            return Err(Error::InvalidArgument(format!(
                "alignment landmarks need a 68-point landmark map, model has {}",
                self.landmark_map.len()
            )));
        }
        let pts = IBUG68_ALIGNMENT_POINTS.map(|k| {
            let v = 3 * self.landmark_map[k];
            Point3::new(shape[v], shape[v + 1], shape[v + 2])
        });
        LandmarkSet7::new_3d(pts)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = if is_json(path) {
            serde_json::to_vec_pretty(&self.to_json())?
        } else {
            self.to_bytes()
        };
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let source = path.display().to_string();
        if is_json(path) {
            let json: ModelJson = serde_json::from_slice(&bytes)
                .map_err(|e| Error::parse(&source, format!("invalid model JSON: {e}")))?;
            json.into_model()
        } else {
            Self::from_bytes(&bytes, &source)
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (q, m, e) = (self.vertex_count(), self.shape_mode_count(), self.expression_count());
        let mut out = Vec::with_capacity(44 + 8 * (3 * q * (1 + m + e) + m));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for n in [q, m, e, self.landmark_map.len(), self.triangles.len()] {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        let reals = self
            .mean
            .iter()
            .chain(self.shape_basis.iter())
            .chain(self.eigenvalues.iter())
            .chain(self.blendshapes.iter());
        for v in reals {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for &i in self.landmark_map.iter().chain(self.triangles.iter().flatten()) {
            out.extend_from_slice(&(i as u64).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], source: &str) -> Result<Self> {
        let mut r = ByteReader::new(bytes, source);
        if r.take(4)? != MAGIC {
            return Err(Error::parse(format!("{source}@0"), "not a morphable model file (bad magic)"));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::UnsupportedFormat(format!("{source}: model version {version}")));
        }
        let q = r.count()?;
        let m = r.count()?;
        let e = r.count()?;
        let l = r.count()?;
        let t = r.count()?;
        let mean = DVector::from_vec(r.reals(3 * q)?);
        let basis = DMatrix::from_vec(3 * q, m, r.reals(3 * q * m)?);
        let eig = DVector::from_vec(r.reals(m)?);
        let blend = DMatrix::from_vec(3 * q, e, r.reals(3 * q * e)?);
        let map = r.indices(l)?;
        let flat = r.indices(3 * t)?;
        if !r.finished() {
            return Err(Error::parse(format!("{source}@{}", r.offset), "trailing bytes after model"));
        }
        let tris = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(mean, basis, eig, blend, map, tris)
    }

    fn to_json(&self) -> ModelJson {
        ModelJson {
            vertex_count: self.vertex_count(),
            mean: self.mean.as_slice().to_vec(),
            shape_basis: columns(&self.shape_basis),
            eigenvalues: self.eigenvalues.as_slice().to_vec(),
            blendshapes: columns(&self.blendshapes),
            landmark_map: self.landmark_map.clone(),
            triangles: self.triangles.clone(),
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    vertex_count: usize,
    mean: Vec<f64>,
    shape_basis: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    blendshapes: Vec<Vec<f64>>,
    landmark_map: Vec<usize>,
    triangles: Vec<[usize; 3]>,
}

impl ModelJson {
    fn into_model(self) -> Result<MorphableModel> {
        let dim = 3 * self.vertex_count;
        let matrix = |cols: Vec<Vec<f64>>, what: &str| -> Result<DMatrix<f64>> {
            if cols.iter().any(|c| c.len() != dim) {
                return Err(Error::DimensionMismatch(format!("{what} column length differs from 3q = {dim}")));
            }
            let n = cols.len();
            Ok(DMatrix::from_vec(dim, n, cols.concat()))
        };
        MorphableModel::new(
            DVector::from_vec(self.mean),
            matrix(self.shape_basis, "shape basis")?,
            DVector::from_vec(self.eigenvalues),
            matrix(self.blendshapes, "blendshape")?,
            self.landmark_map,
            self.triangles,
        )
    }
}

/// Little-endian cursor shared by the binary containers.
pub(crate) struct ByteReader<'a> {
    bytes: &'a [u8],
    pub(crate) offset: usize,
    source: &'a str,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(bytes: &'a [u8], source: &'a str) -> Self {
        Self {
            bytes,
            offset: 0,
            source,
        }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.offset < n {
            return Err(Error::parse(
                format!("{}@{}", self.source, self.offset),
                format!("unexpected end of file (needed {n} more bytes)"),
            ));
        }
        let s = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(s)
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A `u64` used as an element count, bounded by the remaining bytes.
    pub(crate) fn count(&mut self) -> Result<usize> {
        let at = self.offset;
        let n = self.u64()?;
        if n > (self.bytes.len() as u64) {
            return Err(Error::parse(format!("{}@{at}", self.source), format!("implausible count {n}")));
        }
        Ok(n as usize)
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn reals(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| self.overflow())?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    pub(crate) fn indices(&mut self, n: usize) -> Result<Vec<usize>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| self.overflow())?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect())
    }

    pub(crate) fn finished(&self) -> bool {
        self.offset == self.bytes.len()
    }

    fn overflow(&self) -> Error {
        Error::parse(format!("{}@{}", self.source, self.offset), "size overflow")
    }
}
