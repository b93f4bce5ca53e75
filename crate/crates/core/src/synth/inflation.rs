use nalgebra::Point3;

use super::head::{ibug68_template, uv_ellipsoid};
use crate::error::Result;
use crate::fitting::IBUG68_ALIGNMENT_POINTS;
use crate::geometry::{LandmarkSet7, TriMesh};

/// A dense sphere and a copy with every non-landmark vertex pushed
/// `offset` mm outward, sharing the same seven landmark vertices.
#[derive(Debug, Clone)]
pub struct InflationFixture {
    pub gt_mesh: TriMesh,
    pub gt_landmarks: LandmarkSet7,
    pub pred_mesh: TriMesh,
    pub pred_landmarks: LandmarkSet7,
    pub landmark_vertices: [usize; 7],
}

/// Sphere of radius 100 mm with 90 rings × 180 segments.
pub fn inflated_sphere_fixture(offset: f64) -> Result<InflationFixture> {
    const R: f64 = 100.0;
    let gt = uv_ellipsoid([R; 3], 90, 180);
    let template = ibug68_template();
    let mut chosen = [0usize; 7];
    for (slot, &k) in chosen.iter_mut().zip(IBUG68_ALIGNMENT_POINTS.iter()) {
        let p = template[k];
        let target = Point3::new(p.x, p.y, (R * R - p.x * p.x - p.y * p.y).sqrt());
        *slot = gt
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| (i, (v - target).norm_squared()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
            .expect("sphere has vertices");
    }
    let landmarks = LandmarkSet7::new_3d(chosen.map(|i| gt.vertices()[i]))?;
    let mut i = 0;
    let pred = gt.map_vertices(|v| {
        let keep = chosen.contains(&i);
        i += 1;
        if keep {
            *v
        } else {
            Point3::from(v.coords * ((R + offset) / R))
        }
    });
    Ok(InflationFixture {
        gt_mesh: gt,
        gt_landmarks: landmarks.clone(),
        pred_mesh: pred,
        pred_landmarks: landmarks,
        landmark_vertices: chosen,
    })
}
