//! Similarity alignment of two seven-point landmark sets.
//!
//! Builds a target by scaling, rotating and shifting a source set, then
//! recovers the transform.

use facebench::geometry::{align_similarity, LandmarkSet7, SimilarityTransform};
use nalgebra::{Point3, Rotation3, Vector3};

fn main() -> facebench::Result<()> {
    let source = LandmarkSet7::new_3d([
        Point3::new(-45.0, 30.0, 10.0),
        Point3::new(-15.0, 30.0, 14.0),
        Point3::new(15.0, 30.0, 14.0),
        Point3::new(45.0, 30.0, 10.0),
        Point3::new(0.0, -10.0, 25.0),
        Point3::new(-25.0, -45.0, 12.0),
        Point3::new(25.0, -45.0, 12.0),
    ])?;
    let rotation = Rotation3::from_euler_angles(0.1, -0.4, 0.05);
    let truth = SimilarityTransform::new(1.7, *rotation.matrix(), Vector3::new(4.0, -2.0, 30.0))?;
    let target = truth.apply_landmarks(&source)?;

    let t = align_similarity(&source, &target)?;
    println!("scale       {:.6} (true {:.6})", t.scale, truth.scale);
    println!("translation {:.4?}", t.translation.as_slice());
    let residual: f64 = t
        .apply_landmarks(&source)?
        .points()
        .iter()
        .zip(target.points())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("max landmark residual {residual:.2e}");
    Ok(())
}
