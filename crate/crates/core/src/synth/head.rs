use nalgebra::{DMatrix, DVector, Point2, Point3};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{stream_rng, Stream, SynthConfig};
use crate::error::Result;
use crate::fitting::{MorphableModel, IBUG68_ALIGNMENT_POINTS};
use crate::geometry::TriMesh;

/// Semi-axes (x, y, z) of the head proxy in mm; the face looks along +z
/// and the poles lie on the y axis.
pub const HEAD_SEMI_AXES: [f64; 3] = [90.0, 110.0, 80.0];

/// Latitude rings and longitude segments with `rings · segments = q − 2`,
/// segments about twice the rings.
pub(crate) fn sphere_grid(q: usize) -> std::result::Result<(usize, usize), String> {
    let ok = |r: usize, s: usize| r >= 4 && s >= 6 && s <= 8 * r && r <= s;
    let best = |q: usize| -> Option<(usize, usize)> {
        let n = q.checked_sub(2)?;
        let target = (n as f64 / 2.0).sqrt();
        (1..=n)
            .filter(|r| n % r == 0)
            .map(|r| (r, n / r))
            .min_by(|a, b| (a.0 as f64 - target).abs().total_cmp(&(b.0 as f64 - target).abs()))
            .filter(|&(r, s)| ok(r, s))
    };
    if q < 100 {
        return Err(format!("q must be at least 100 to host 68 landmarks, got {q}"));
    }
    best(q).ok_or_else(|| {
        let near = (1..q).flat_map(|d| [q + d, q - d]).find(|&c| c >= 100 && best(c).is_some());
        format!(
            "q − 2 = {} has no rings × segments split; try q = {}",
            q - 2,
            near.map_or_else(|| "202".to_string(), |c| c.to_string())
        )
    })
}

/// Triangulated ellipsoid: a pole at `+y`, `rings` latitude circles of
/// `segments` vertices each (segment 0 faces `+z`), and a pole at `−y`.
pub fn uv_ellipsoid(semi_axes: [f64; 3], rings: usize, segments: usize) -> TriMesh {
    let [a, b, c] = semi_axes;
    let mut vertices = Vec::with_capacity(rings * segments + 2);
    vertices.push(Point3::new(0.0, b, 0.0));
    for i in 0..rings {
        let theta = std::f64::consts::PI * (i + 1) as f64 / (rings + 1) as f64;
        for j in 0..segments {
            let phi = std::f64::consts::TAU * j as f64 / segments as f64;
            vertices.push(Point3::new(
                a * theta.sin() * phi.sin(),
                b * theta.cos(),
                c * theta.sin() * phi.cos(),
            ));
        }
    }
    let south = vertices.len();
    vertices.push(Point3::new(0.0, -b, 0.0));

    let at = |i: usize, j: usize| 1 + i * segments + j % segments;
    let mut triangles = Vec::with_capacity(2 * rings * segments);
    for j in 0..segments {
        triangles.push([0, at(0, j + 1), at(0, j)]);
    }
    for i in 0..rings - 1 {
        for j in 0..segments {
            let (p, q, r, s) = (at(i, j), at(i, j + 1), at(i + 1, j), at(i + 1, j + 1));
            triangles.push([p, q, r]);
            triangles.push([q, s, r]);
        }
    }
    for j in 0..segments {
        triangles.push([south, at(rings - 1, j), at(rings - 1, j + 1)]);
    }
    TriMesh::new(vertices, triangles).expect("ellipsoid topology is valid")
}

/// Frontal 68-point face layout in mm (x right-of-image, y up), following
/// the iBUG numbering: jaw 0–16, brows 17–26, nose 27–35, eyes 36–47,
/// mouth 48–67.
pub fn ibug68_template() -> [Point2<f64>; 68] {
    let mut p = [Point2::origin(); 68];
    for (i, slot) in p.iter_mut().take(17).enumerate() {
        let t = std::f64::consts::PI * i as f64 / 16.0;
        *slot = Point2::new(-70.0 * t.cos(), 20.0 - 105.0 * t.sin());
    }
    for i in 0..5 {
        let x = 15.0 + 10.0 * i as f64;
        let arch = 5.0 * (std::f64::consts::PI * i as f64 / 4.0).sin();
        p[21 - i] = Point2::new(-x, 40.0 + arch);
        p[22 + i] = Point2::new(x, 40.0 + arch);
    }
    for (k, y) in [25.0, 15.0, 5.0, -5.0].into_iter().enumerate() {
        p[27 + k] = Point2::new(0.0, y);
    }
    for (k, x) in [-15.0, -8.0, 0.0, 8.0, 15.0].into_iter().enumerate() {
        p[31 + k] = Point2::new(x, -15.0);
    }
    let eye = [(45.0, 25.0), (37.0, 30.0), (23.0, 30.0), (15.0, 25.0), (23.0, 20.0), (37.0, 20.0)];
    for (k, &(x, y)) in eye.iter().enumerate() {
        p[36 + k] = Point2::new(-x, y);
    }
    // The left eye mirrors the right one, starting at its inner corner.
    for (k, idx) in [3, 2, 1, 0, 5, 4].into_iter().enumerate() {
        let (x, y) = eye[idx];
        p[42 + k] = Point2::new(x, y);
    }
    let outer = [
        (-25.0, -45.0),
        (-17.0, -38.0),
        (-7.0, -35.0),
        (0.0, -36.0),
        (7.0, -35.0),
        (17.0, -38.0),
        (25.0, -45.0),
        (17.0, -52.0),
        (7.0, -55.0),
        (0.0, -56.0),
        (-7.0, -55.0),
        (-17.0, -52.0),
    ];
    let inner = [
        (-20.0, -45.0),
        (-8.0, -42.0),
        (0.0, -42.0),
        (8.0, -42.0),
        (20.0, -45.0),
        (8.0, -48.0),
        (0.0, -48.0),
        (-8.0, -48.0),
    ];
    for (k, &(x, y)) in outer.iter().chain(inner.iter()).enumerate() {
        p[48 + k] = Point2::new(x, y);
    }
    p
}

/// Lifts a frontal template point onto the ellipsoid's `+z` side.
fn lift(p: &Point2<f64>) -> Point3<f64> {
    let [a, b, c] = HEAD_SEMI_AXES;
    let r = 1.0 - (p.x / a).powi(2) - (p.y / b).powi(2);
    Point3::new(p.x, p.y, c * r.max(0.0).sqrt())
}

/// Assigns each template landmark to the nearest vertex not taken yet,
/// the seven alignment landmarks first. Ties go to the lower vertex index.
fn landmark_vertices(mesh: &TriMesh) -> Vec<usize> {
    let template = ibug68_template();
    let mut order: Vec<usize> = IBUG68_ALIGNMENT_POINTS.to_vec();
    order.extend((0..68).filter(|k| !IBUG68_ALIGNMENT_POINTS.contains(k)));
    let mut taken = vec![false; mesh.vertex_count()];
    let mut map = vec![0; 68];
    for k in order {
        let target = lift(&template[k]);
        let (best, _) = mesh
            .vertices()
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, v)| (i, (v - target).norm_squared()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("mesh has more vertices than landmarks");
        taken[best] = true;
        map[k] = best;
    }
    map
}

/// Builds the synthetic morphable model described by `cfg`.
pub fn make_model(cfg: &SynthConfig) -> Result<MorphableModel> {
    cfg.validate()?;
    let (rings, segments) = sphere_grid(cfg.q).expect("validated");
    let mesh = uv_ellipsoid(HEAD_SEMI_AXES, rings, segments);
    let dim = 3 * cfg.q;
    let cols = cfg.m + cfg.e;

    let mut rng = stream_rng(cfg.seed, Stream::Model);
    // Column-major draw order.
    let draws: Vec<f64> = (0..dim * cols).map(|_| rng.sample(StandardNormal)).collect();
    let gauss = DMatrix::from_vec(dim, cols, draws);
    let q = if cols > 0 {
        gauss.qr().q()
    } else {
        DMatrix::zeros(dim, 0)
    };
    let basis = q.columns(0, cfg.m).into_owned();
    let blend = q.columns(cfg.m, cfg.e).into_owned();
    let mean = DVector::from_iterator(dim, mesh.vertices().iter().flat_map(|v| [v.x, v.y, v.z]));
    MorphableModel::new(
        mean,
        basis,
        DVector::from_vec(cfg.eigenvalues()),
        blend,
        landmark_vertices(&mesh),
        mesh.triangles().to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_for_default_q() {
        assert_eq!(sphere_grid(200), Ok((9, 22)));
        assert!(sphere_grid(199).unwrap_err().contains("try q"));
    }

    #[test]
    fn ellipsoid_is_closed() {
        let m = uv_ellipsoid([1.0, 2.0, 3.0], 5, 8);
        assert_eq!(m.vertex_count(), 42);
        assert_eq!(m.triangle_count(), 80);
        // Closed 2-manifold: every edge shared by exactly two triangles.
        let mut edges = std::collections::HashMap::new();
        for t in m.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]));
                *edges.entry((a, b)).or_insert(0) += 1;
            }
        }
        assert!(edges.values().all(|&n| n == 2));
        assert_eq!(m.surface_triangle_count(), 80);
    }

    #[test]
    fn template_symmetry() {
        let t = ibug68_template();
        assert_eq!(t[36], Point2::new(-45.0, 25.0));
        assert_eq!(t[45], Point2::new(45.0, 25.0));
        assert_eq!(t[39], Point2::new(-15.0, 25.0));
        assert_eq!(t[42], Point2::new(15.0, 25.0));
        assert_eq!(t[33], Point2::new(0.0, -15.0));
        assert!((t[8] - Point2::new(0.0, -85.0)).norm() < 1e-12);
        for (l, r) in [(36, 45), (39, 42), (48, 54), (17, 26), (0, 16)] {
            assert!((t[l].x + t[r].x).abs() < 1e-12 && (t[l].y - t[r].y).abs() < 1e-12);
        }
    }

    #[test]
    fn model_shape_and_determinism() {
        let cfg = SynthConfig {
            m: 5,
            ..Default::default()
        };
        let a = make_model(&cfg).unwrap();
        let gram = a.shape_basis().transpose() * a.shape_basis();
        assert!((gram - DMatrix::identity(5, 5)).amax() < 1e-10);
        assert_eq!(a, make_model(&cfg).unwrap());
        assert_eq!(a.landmark_count(), 68);
        let lm = a.alignment_landmarks(a.mean()).unwrap();
        // Alignment landmarks sit on the face side.
        assert!(lm.points().iter().all(|p| p.z > 0.0));
    }
}
