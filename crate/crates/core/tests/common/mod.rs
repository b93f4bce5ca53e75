#![allow(dead_code)]

use facebench::geometry::{LandmarkSet7, SimilarityTransform, TriMesh};
use facebench::synth::{stream_rng, Stream};
use nalgebra::{Matrix3, Point3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const TEST_SEED: u64 = 0x5eed_f00d;

pub fn rng(stream: u64) -> ChaCha8Rng {
    stream_rng(TEST_SEED, Stream::Custom(stream))
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-uniform rotation from a normalized Gaussian quaternion.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let q = nalgebra::Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng));
    *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix()
}

pub fn random_point(rng: &mut ChaCha8Rng, half: f64) -> Point3<f64> {
    Point3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

pub fn random_similarity(rng: &mut ChaCha8Rng, min_scale: f64, max_scale: f64) -> SimilarityTransform {
    // Log-uniform scale.
    let scale = (rng.random_range(min_scale.ln()..max_scale.ln())).exp();
    let t = random_point(rng, 100.0).coords;
    SimilarityTransform::new(scale, random_rotation(rng), t).unwrap()
}

/// `n_triangles` random triangles over a shared cloud of vertices.
pub fn random_mesh(rng: &mut ChaCha8Rng, n_triangles: usize) -> TriMesh {
    let n_vertices = (n_triangles / 2).max(3) + 3;
    let vertices: Vec<_> = (0..n_vertices).map(|_| random_point(rng, 10.0)).collect();
    let mut triangles = Vec::with_capacity(n_triangles);
    while triangles.len() < n_triangles {
        let t = [
            rng.random_range(0..n_vertices),
            rng.random_range(0..n_vertices),
            rng.random_range(0..n_vertices),
        ];
        if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
            triangles.push(t);
        }
    }
    TriMesh::new(vertices, triangles).unwrap()
}

fn closest_on_segment(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> Point3<f64> {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest point of a closed triangle: the plane projection when it lands
/// inside, otherwise the best of the three edge clamps.
pub fn oracle_closest_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    let n = (b - a).cross(&(c - a));
    let proj = p - n * ((p - a).dot(&n) / n.norm_squared());
    // Barycentric coordinates of the projection by signed sub-areas.
    let area = |u: &Point3<f64>, v: &Point3<f64>, w: &Point3<f64>| (v - u).cross(&(w - u)).dot(&n);
    let total = area(a, b, c);
    let (l0, l1, l2) = (area(&proj, b, c) / total, area(a, &proj, c) / total, area(a, b, &proj) / total);
    if l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0 {
        return proj;
    }
    [closest_on_segment(p, a, b), closest_on_segment(p, b, c), closest_on_segment(p, c, a)]
        .into_iter()
        .min_by(|x, y| (p - x).norm().total_cmp(&(p - y).norm()))
        .unwrap()
}

/// Exhaustive minimum over every non-degenerate triangle: (distance, id).
pub fn brute_closest(mesh: &TriMesh, p: &Point3<f64>) -> (f64, usize) {
    let mut best = (f64::INFINITY, usize::MAX);
    for t in 0..mesh.triangle_count() {
        if mesh.is_degenerate(t) {
            continue;
        }
        let [a, b, c] = mesh.triangle_points(t);
        let d = (p - oracle_closest_on_triangle(p, &a, &b, &c)).norm();
        if d < best.0 {
            best = (d, t);
        }
    }
    best
}

/// Seven face-like landmarks with random perturbation.
pub fn random_landmarks(rng: &mut ChaCha8Rng) -> LandmarkSet7 {
    let base = [
        [-45.0, 25.0, 40.0],
        [-15.0, 25.0, 55.0],
        [15.0, 25.0, 55.0],
        [45.0, 25.0, 40.0],
        [0.0, -15.0, 75.0],
        [-25.0, -45.0, 55.0],
        [25.0, -45.0, 55.0],
    ];
    LandmarkSet7::new_3d(base.map(|b| {
        Point3::from(Vector3::from(b) + Vector3::new(normal(rng), normal(rng), normal(rng)) * 5.0)
    }))
    .unwrap()
}

pub fn print_line(name: &str, pass: bool, detail: impl std::fmt::Display) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
