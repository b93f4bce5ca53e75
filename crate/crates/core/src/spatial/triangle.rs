use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::is_degenerate_triangle;

/// Closest point of the closed triangle `abc` to `p`.
///
/// Rejects zero-area triangles; callers that already filtered them can use
/// [`closest_point_unchecked`].
pub fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Result<Point3<f64>> {
    if is_degenerate_triangle(a, b, c) {
        return Err(Error::DegenerateTriangle);
    }
    Ok(closest_point_unchecked(p, a, b, c))
}

/// Voronoi-region walk over the three vertex regions, three edge regions
/// and the face interior.
#[inline]
pub fn closest_point_unchecked(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> [Point3<f64>; 3] {
        [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ]
    }

    fn closest(p: [f64; 3]) -> Point3<f64> {
        let [a, b, c] = unit();
        closest_point_on_triangle(&Point3::from(p), &a, &b, &c).unwrap()
    }

    #[test]
    fn interior_projection() {
        let q = closest([0.25, 0.25, 1.0]);
        assert!((q - Point3::new(0.25, 0.25, 0.0)).norm() < 1e-15);
        assert!(((Point3::new(0.25, 0.25, 1.0) - q).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vertex_region() {
        assert_eq!(closest([2.0, 0.0, 0.0]), Point3::new(1.0, 0.0, 0.0));
        assert_eq!(closest([-1.0, -1.0, 3.0]), Point3::new(0.0, 0.0, 0.0));
        assert_eq!(closest([-0.5, 3.0, 0.0]), Point3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn edge_regions() {
        assert!((closest([1.0, 1.0, 0.0]) - Point3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
        assert!((closest([0.5, -2.0, 1.0]) - Point3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
        assert!((closest([-3.0, 0.25, 0.0]) - Point3::new(0.0, 0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_rejected() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1.0, 1.0, 1.0);
        let c = Point3::new(2.0, 2.0, 2.0);
        assert!(matches!(
            closest_point_on_triangle(&Point3::origin(), &a, &b, &c),
            Err(Error::DegenerateTriangle)
        ));
    }
}
