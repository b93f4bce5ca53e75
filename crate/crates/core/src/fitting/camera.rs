use nalgebra::{Matrix2xX, Matrix3, Matrix3xX, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scaled orthographic camera `u = f·P·R·(x + t)`, where `P` keeps the
/// first two rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakPerspectiveCamera {
    scale: f64,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl WeakPerspectiveCamera {
    pub fn new(scale: f64, rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!("camera scale must be positive, got {scale}")));
        }
        let orth = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        let det = rotation.determinant();
        if orth > 1e-9 || (det - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "camera rotation is not proper (|RᵀR − I| = {orth:e}, det = {det})"
            )));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("camera translation is not finite".into()));
        }
        Ok(Self {
            scale,
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// The 2×3 linear part `f·P·R`.
    pub fn linear_part(&self) -> nalgebra::Matrix2x3<f64> {
        self.rotation.fixed_rows::<2>(0) * self.scale
    }

    /// Image of a single point.
    pub fn project_point(&self, x: &Vector3<f64>) -> Vector2<f64> {
        self.linear_part() * (x + self.translation)
    }
}

pub fn project_weak_perspective(camera: &WeakPerspectiveCamera, points: &Matrix3xX<f64>) -> Matrix2xX<f64> {
    let mut shifted = points.clone();
    for mut c in shifted.column_iter_mut() {
        c += camera.translation;
    }
    camera.linear_part() * shifted
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFit {
    pub camera: WeakPerspectiveCamera,
    /// Root mean square reprojection error over points.
    pub residual: f64,
}

/// Relative singular-value floor below which the affine design or its
/// linear block counts as rank-deficient.
const RANK_TOL: f64 = 1e-10;

/// Fits a weak-perspective camera to 2D–3D correspondences.
///
/// Solves the unconstrained 2×4 affine camera by least squares, projects
/// its linear block onto the nearest scaled rotation (`f` is the mean of
/// the two singular values, `r1, r2` come from `U·Vᵀ`, `r3 = r1 × r2`),
/// then refits the image offset for the constrained linear block.
pub fn estimate_camera(image: &Matrix2xX<f64>, points: &Matrix3xX<f64>) -> Result<CameraFit> {
    let l = points.ncols();
    if image.ncols() != l {
        return Err(Error::DimensionMismatch(format!("{} image points for {l} model points", image.ncols())));
    }
    if l < 4 {
        return Err(Error::DegenerateCamera(format!("{l} correspondences, at least 4 needed")));
    }
    if !image.iter().chain(points.iter()).all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite landmark coordinates".into()));
    }

    // Centring separates the offset from the linear block exactly.
    let pc = points.column_mean();
    let uc = image.column_mean();
    let mut p0 = points.clone();
    for mut c in p0.column_iter_mut() {
        c -= pc;
    }
    let mut u0 = image.clone();
    for mut c in u0.column_iter_mut() {
        c -= uc;
    }

    let design = p0.transpose(); // l × 3
    let svd = design.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.max();
    if !(smax > 0.0) || s.min() <= RANK_TOL * smax {
        return Err(Error::DegenerateCamera(
            "model points are coincident, collinear or coplanar".into(),
        ));
    }
    // A (2×3) solves design·Aᵀ ≈ u0ᵀ.
    let a_t = svd
        .solve(&u0.transpose(), 0.0)
        .map_err(|e| Error::DegenerateCamera(e.to_string()))?;
    let a = a_t.transpose();

    let asvd = a.svd(true, true);
    let (su, sv) = (asvd.u.unwrap(), asvd.v_t.unwrap());
    let (s1, s2) = (asvd.singular_values[0], asvd.singular_values[1]);
    if !(s2 > RANK_TOL * s1) {
        return Err(Error::DegenerateCamera("affine camera has rank below 2".into()));
    }
    let f = 0.5 * (s1 + s2);
    let r12 = su * sv; // 2×3, orthonormal rows
    let r1 = r12.row(0).transpose();
    let r2 = r12.row(1).transpose();
    let r3 = r1.cross(&r2);
    let rotation = Matrix3::from_rows(&[r1.transpose(), r2.transpose(), r3.transpose()]);

    // uc = f·P·R·(pc + t); choose the depth component of R·t as zero.
    let b = uc - f * r12 * pc;
    let translation = rotation.transpose() * Vector3::new(b.x / f, b.y / f, 0.0);
    let camera = WeakPerspectiveCamera::new(f, rotation, translation)?;

    let proj = project_weak_perspective(&camera, points);
    let sq: f64 = (proj - image).column_iter().map(|c| c.norm_squared()).sum();
    Ok(CameraFit {
        camera,
        residual: (sq / l as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    #[test]
    fn projection_examples() {
        let pts = Matrix3xX::from_column_slice(&[1.0, 2.0, 3.0]);
        let id = WeakPerspectiveCamera::identity();
        assert_eq!(project_weak_perspective(&id, &pts).as_slice(), &[1.0, 2.0]);
        let cam = WeakPerspectiveCamera::new(2.0, Matrix3::identity(), Vector3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(project_weak_perspective(&cam, &pts).as_slice(), &[4.0, 4.0]);
    }

    #[test]
    fn recovers_known_camera() {
        let pts = Matrix3xX::from_fn(10, |r, c| ((r * 7 + c * 13) % 11) as f64 - 5.0 + 0.1 * (c * c) as f64);
        let rot = *Rotation3::from_euler_angles(0.3, -0.7, 1.1).matrix();
        let cam = WeakPerspectiveCamera::new(1.7, rot, Vector3::new(3.0, -2.0, 5.0)).unwrap();
        let img = project_weak_perspective(&cam, &pts);
        let fit = estimate_camera(&img, &pts).unwrap();
        assert!((fit.camera.scale() - 1.7).abs() < 1e-9);
        assert!((fit.camera.rotation() - rot).norm() < 1e-9);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        let same = Matrix3xX::from_fn(6, |r, _| r as f64);
        let img = Matrix2xX::from_fn(6, |r, c| (r + c) as f64);
        assert!(matches!(estimate_camera(&img, &same), Err(Error::DegenerateCamera(_))));
        let flat = Matrix3xX::from_fn(6, |r, c| if r == 2 { 0.0 } else { ((r + 1) * c * c) as f64 });
        assert!(matches!(estimate_camera(&img, &flat), Err(Error::DegenerateCamera(_))));
        let few = Matrix3xX::from_fn(3, |r, c| (r * c) as f64);
        assert!(estimate_camera(&Matrix2xX::zeros(3), &few).is_err());
    }

    #[test]
    fn rejects_improper_rotation() {
        let refl = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(WeakPerspectiveCamera::new(1.0, refl, Vector3::zeros()).is_err());
        assert!(WeakPerspectiveCamera::new(0.0, Matrix3::identity(), Vector3::zeros()).is_err());
    }
}
