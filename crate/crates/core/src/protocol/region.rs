use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Landmark, LandmarkSet7, TriMesh};

/// How the nose-bridge point is derived from the eye corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeMode {
    /// Midpoint of the two eye centres, each the midpoint of that eye's
    /// inner and outer corner (the centroid of all four corners).
    #[default]
    EyeCentres,
    /// Midpoint of the two inner eye corners.
    InnerCorners,
}

pub fn nose_bridge(lm: &LandmarkSet7, mode: BridgeMode) -> Point3<f64> {
    match mode {
        BridgeMode::EyeCentres => {
            let right = nalgebra::center(&lm.get(Landmark::RightEyeOuter), &lm.get(Landmark::RightEyeInner));
            let left = nalgebra::center(&lm.get(Landmark::LeftEyeInner), &lm.get(Landmark::LeftEyeOuter));
            nalgebra::center(&right, &left)
        }
        BridgeMode::InnerCorners => {
            nalgebra::center(&lm.get(Landmark::RightEyeInner), &lm.get(Landmark::LeftEyeInner))
        }
    }
}

/// `nose_bottom + 0.3 * (nose_bridge - nose_bottom)`.
pub fn face_centre(lm: &LandmarkSet7, mode: BridgeMode) -> Point3<f64> {
    let bottom = lm.get(Landmark::NoseBottom);
    bottom + 0.3 * (nose_bridge(lm, mode) - bottom)
}

/// `1.2 * (outer_eye_dist + nose_dist) / 2`, where `outer_eye_dist` spans
/// the two outer eye corners and `nose_dist` runs from the nose bridge to
/// the nose bottom.
pub fn region_radius(lm: &LandmarkSet7, mode: BridgeMode) -> Result<f64> {
    let outer_eye = (lm.get(Landmark::RightEyeOuter) - lm.get(Landmark::LeftEyeOuter)).norm();
    let nose = (nose_bridge(lm, mode) - lm.get(Landmark::NoseBottom)).norm();
    let radius = 1.2 * (outer_eye + nose) / 2.0;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::DegenerateLandmarks(format!(
            "face radius is {radius}; landmarks coincide"
        )));
    }
    Ok(radius)
}

/// Ground-truth vertices within a closed ball around the face centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub centre: Point3<f64>,
    pub radius: f64,
    /// Ascending vertex indices with `‖v − centre‖ ≤ radius`.
    pub vertex_ids: Vec<usize>,
}

pub fn select_region(mesh: &TriMesh, centre: Point3<f64>, radius: f64) -> Result<RegionSpec> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("region radius must be positive, got {radius}")));
    }
    let vertex_ids: Vec<usize> = mesh
        .vertices()
        .iter()
        .enumerate()
        .filter(|(_, v)| (*v - centre).norm() <= radius)
        .map(|(i, _)| i)
        .collect();
    if vertex_ids.is_empty() {
        return Err(Error::EmptyRegion {
            centre: centre.into(),
            radius,
        });
    }
    Ok(RegionSpec {
        centre,
        radius,
        vertex_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn landmarks(eye_y: f64, nose_bottom: [f64; 3], outer_half: f64) -> LandmarkSet7 {
        LandmarkSet7::new_3d([
            Point3::new(-outer_half, eye_y, 0.0),
            Point3::new(-5.0, eye_y, 0.0),
            Point3::new(5.0, eye_y, 0.0),
            Point3::new(outer_half, eye_y, 0.0),
            Point3::from(nose_bottom),
            Point3::new(-20.0, -30.0, 0.0),
            Point3::new(20.0, -30.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn centre_is_thirty_percent_up_the_nose() {
        let lm = landmarks(10.0, [0.0, 0.0, 0.0], 45.0);
        assert_eq!(nose_bridge(&lm, BridgeMode::EyeCentres), Point3::new(0.0, 10.0, 0.0));
        let c = face_centre(&lm, BridgeMode::EyeCentres);
        assert!((c - Point3::new(0.0, 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn centre_with_coincident_bridge() {
        let lm = landmarks(0.0, [0.0, 0.0, 0.0], 45.0);
        assert_eq!(face_centre(&lm, BridgeMode::EyeCentres), Point3::origin());
    }

    #[test]
    fn centre_axis_aligned() {
        // Eyes at x = 11 around y=1, z=1; nose bottom (1, 1, 1).
        let lm = LandmarkSet7::new_3d([
            Point3::new(11.0, 1.0, -30.0),
            Point3::new(11.0, 1.0, -10.0),
            Point3::new(11.0, 1.0, 12.0),
            Point3::new(11.0, 1.0, 32.0),
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(-20.0, 0.0, -10.0),
            Point3::new(-20.0, 0.0, 10.0),
        ])
        .unwrap();
        assert_eq!(nose_bridge(&lm, BridgeMode::EyeCentres), Point3::new(11.0, 1.0, 1.0));
        assert!((face_centre(&lm, BridgeMode::EyeCentres) - Point3::new(4.0, 1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn worked_radius_example() {
        // outer eye distance 90, nose distance 130/3 ≈ 43.3333
        let lm = landmarks(130.0 / 3.0, [0.0, 0.0, 0.0], 45.0);
        let r = region_radius(&lm, BridgeMode::EyeCentres).unwrap();
        assert!((r - 80.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn radius_symmetry() {
        let d = 37.0;
        let lm = landmarks(d, [0.0, 0.0, 0.0], d / 2.0);
        let r = region_radius(&lm, BridgeMode::EyeCentres).unwrap();
        assert!((r - 1.2 * d).abs() < 1e-12);
    }

    #[test]
    fn inner_corner_bridge() {
        let mut pts = *landmarks(10.0, [0.0, 0.0, 0.0], 45.0).points();
        pts[1].y = 20.0;
        pts[2].y = 20.0;
        let lm = LandmarkSet7::new_3d(pts).unwrap();
        assert_eq!(nose_bridge(&lm, BridgeMode::InnerCorners), Point3::new(0.0, 20.0, 0.0));
        assert_eq!(nose_bridge(&lm, BridgeMode::EyeCentres), Point3::new(0.0, 15.0, 0.0));
    }

    #[test]
    fn region_of_tiny_radius_is_single_vertex() {
        let v: Vec<_> = (0..5).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let mesh = TriMesh::from_points(v).unwrap();
        let r = select_region(&mesh, Point3::new(2.0, 0.0, 0.0), 0.001).unwrap();
        assert_eq!(r.vertex_ids, vec![2]);
        let all = select_region(&mesh, Point3::new(2.0, 0.0, 0.0), 10.0).unwrap();
        assert_eq!(all.vertex_ids, vec![0, 1, 2, 3, 4]);
        assert!(matches!(
            select_region(&mesh, Point3::new(0.5, 5.0, 0.0), 1.0),
            Err(Error::EmptyRegion { .. })
        ));
        assert!(select_region(&mesh, Point3::origin(), 0.0).is_err());
    }

    #[test]
    fn boundary_vertex_is_included() {
        let mesh = TriMesh::from_points(vec![Point3::new(3.0, 4.0, 0.0)]).unwrap();
        assert_eq!(select_region(&mesh, Point3::origin(), 5.0).unwrap().vertex_ids, vec![0]);
    }
}
