use nalgebra::{Matrix3, Point3, Vector3, SVD};
use serde::{Deserialize, Serialize};

use super::landmarks::LandmarkSet7;
use super::mesh::TriMesh;
use crate::error::{Error, Result};

/// `x -> scale * rotation * x + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for SimilarityTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Checks `scale > 0`, `RᵀR = I` and `det R = +1` within 1e-9.
    pub fn new(scale: f64, rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        let det = rotation.determinant();
        if ortho > 1e-9 || (det - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "rotation is not proper orthonormal (|RᵀR - I| = {ortho:e}, det = {det})"
            )));
        }
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("translation is not finite".into()));
        }
        Ok(Self {
            scale,
            rotation,
            translation,
        })
    }

    pub fn apply_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.scale * (self.rotation * p.coords) + self.translation)
    }

    /// Applies the transform to every vertex; connectivity is unchanged.
    pub fn apply_mesh(&self, mesh: &TriMesh) -> TriMesh {
        mesh.map_vertices(|v| self.apply_point(v))
    }

    pub fn apply_landmarks(&self, set: &LandmarkSet7) -> Result<LandmarkSet7> {
        set.map(|p| self.apply_point(&p))
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            scale: 1.0 / self.scale,
            rotation: rt,
            translation: -(rt * self.translation) / self.scale,
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            scale: self.scale * other.scale,
            rotation: self.rotation * other.rotation,
            translation: self.scale * (self.rotation * other.translation) + self.translation,
        }
    }
}

/// Least-squares similarity `T` minimising `Σ ‖T(srcᵢ) − dstᵢ‖²`, via the
/// SVD closed form with a determinant-sign correction so the rotation is
/// proper.
pub fn align_points(src: &[Point3<f64>], dst: &[Point3<f64>]) -> Result<SimilarityTransform> {
    if src.len() != dst.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source points vs {} target points",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 3 {
        return Err(Error::AlignmentDegenerate(format!("need at least 3 points, got {}", src.len())));
    }
    let n = src.len() as f64;
    let mu_s = src.iter().map(|p| p.coords).sum::<Vector3<f64>>() / n;
    let mu_d = dst.iter().map(|p| p.coords).sum::<Vector3<f64>>() / n;

    let mut cov = Matrix3::zeros();
    let mut src_scatter = Matrix3::zeros();
    let mut var_s = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let sc = s.coords - mu_s;
        let dc = d.coords - mu_d;
        cov += dc * sc.transpose();
        src_scatter += sc * sc.transpose();
        var_s += sc.norm_squared();
    }
    cov /= n;
    var_s /= n;

    // Rank of the centred source must be at least 2.
    let spread = SVD::new(src_scatter, false, false).singular_values;
    let (largest, second) = (spread.max(), sorted_desc(spread.as_slice())[1]);
    if !(largest > 0.0) || second <= 1e-18 * largest {
        return Err(Error::AlignmentDegenerate(
            "source landmarks are coincident or collinear".into(),
        ));
    }

    // Identical sets align by the exact identity, so self-evaluation is 0.
    if src == dst {
        return Ok(SimilarityTransform::identity());
    }

    let svd = SVD::new(cov, true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::AlignmentDegenerate("SVD did not converge".into())),
    };
    let d = svd.singular_values;
    let mut sign = Vector3::new(1.0, 1.0, 1.0);
    if u.determinant() * v_t.determinant() < 0.0 {
        sign[2] = -1.0;
    }
    let rotation = u * Matrix3::from_diagonal(&sign) * v_t;
    let trace: f64 = d.iter().zip(sign.iter()).map(|(a, b)| a * b).sum();
    let scale = trace / var_s;
    if !(scale > 0.0) {
        return Err(Error::AlignmentDegenerate(format!(
            "estimated scale {scale} is not positive"
        )));
    }
    let translation = mu_d - scale * (rotation * mu_s);
    Ok(SimilarityTransform {
        scale,
        rotation,
        translation,
    })
}

/// Aligns source landmarks onto target landmarks. Both sets must be 3D.
pub fn align_similarity(source: &LandmarkSet7, target: &LandmarkSet7) -> Result<SimilarityTransform> {
    if source.dim() != 3 || target.dim() != 3 {
        return Err(Error::InvalidArgument(
            "similarity alignment needs 3D landmarks".into(),
        ));
    }
    align_points(source.points(), target.points())
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn face() -> [Point3<f64>; 7] {
        [
            Point3::new(-45.0, 30.0, 10.0),
            Point3::new(-15.0, 30.0, 14.0),
            Point3::new(15.0, 30.0, 14.0),
            Point3::new(45.0, 30.0, 10.0),
            Point3::new(0.0, -10.0, 25.0),
            Point3::new(-25.0, -45.0, 12.0),
            Point3::new(25.0, -45.0, 12.0),
        ]
    }

    #[test]
    fn identity_on_equal_sets() {
        let s = LandmarkSet7::new_3d(face()).unwrap();
        let t = align_similarity(&s, &s).unwrap();
        assert!((t.scale - 1.0).abs() < 1e-9);
        assert!((t.rotation - Matrix3::identity()).abs().max() < 1e-9);
        assert!(t.translation.norm() < 1e-9);
    }

    #[test]
    fn recovers_scaled_quarter_turn() {
        let rz = *Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2).matrix();
        let truth = SimilarityTransform::new(2.0, rz, Vector3::new(1.0, 2.0, 3.0)).unwrap();
        let src = LandmarkSet7::new_3d(face()).unwrap();
        let dst = truth.apply_landmarks(&src).unwrap();
        let est = align_similarity(&src, &dst).unwrap();
        assert!((est.scale - 2.0).abs() < 1e-6);
        assert!((est.rotation - rz).abs().max() < 1e-6);
        assert!((est.translation - truth.translation).abs().max() < 1e-6);
        for (s, d) in src.points().iter().zip(dst.points()) {
            assert!((est.apply_point(s) - d).norm() < 1e-9);
        }
    }

    #[test]
    fn collinear_source_is_degenerate() {
        let line: Vec<_> = (0..7).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.5 * i as f64)).collect();
        let err = align_points(&line, &face()).unwrap_err();
        assert!(matches!(err, Error::AlignmentDegenerate(_)));
    }

    #[test]
    fn rejects_2d_sets() {
        let pts = face().map(|p| [p.x, p.y]);
        let s = LandmarkSet7::new_2d(pts).unwrap();
        assert!(align_similarity(&s, &s).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let r = *Rotation3::from_euler_angles(0.3, -1.1, 2.0).matrix();
        let t = SimilarityTransform::new(3.5, r, Vector3::new(-4.0, 0.5, 9.0)).unwrap();
        for p in face() {
            let back = t.inverse().apply_point(&t.apply_point(&p));
            assert!((back - p).norm() < 1e-9);
        }
        let id = t.compose(&t.inverse());
        assert!((id.scale - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_two_doubles_cube_edges() {
        let mesh = TriMesh::new(
            vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let t = SimilarityTransform::new(2.0, Matrix3::identity(), Vector3::zeros()).unwrap();
        let out = t.apply_mesh(&mesh);
        assert_eq!(out.vertices()[1], Point3::new(2.0, 0.0, 0.0));
        assert_eq!(out.triangles(), mesh.triangles());
        assert_eq!(SimilarityTransform::identity().apply_mesh(&mesh), mesh);
    }

    #[test]
    fn rejects_improper_rotation() {
        let reflect = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(SimilarityTransform::new(1.0, reflect, Vector3::zeros()).is_err());
        assert!(SimilarityTransform::new(0.0, Matrix3::identity(), Vector3::zeros()).is_err());
    }
}
