//! Exact closest-surface queries through the bounding-volume hierarchy.

use facebench::spatial::SurfaceIndex;
use facebench::synth::uv_ellipsoid;
use nalgebra::Point3;

fn main() -> facebench::Result<()> {
    // 80 rings × 60 segments: 9 600 triangles.
    let head = uv_ellipsoid([90.0, 110.0, 80.0], 80, 60);
    let index = SurfaceIndex::build(&head)?;
    println!("{} triangles, {} leaves", head.triangle_count(), index.leaves().len());

    for p in [
        Point3::new(0.0, 0.0, 100.0),
        Point3::new(95.0, 5.0, 0.0),
        Point3::new(0.0, 0.0, 0.0),
    ] {
        let (hit, visited) = index.query_closest_counted(&p);
        println!(
            "{:>6.1?} -> distance {:8.4} mm on triangle {:5} ({} triangles tested)",
            p.coords.as_slice(),
            hit.distance,
            hit.triangle_id,
            visited
        );
    }
    Ok(())
}
