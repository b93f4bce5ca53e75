mod common;

use common::*;
use facebench::geometry::{load_mesh, MeshFormat, TriMesh};
use facebench::spatial::{closest_point_on_triangle, SurfaceIndex};
use facebench::synth::uv_ellipsoid;
use nalgebra::Point3;
use proptest::prelude::*;

fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn cube_fixture_loads_and_queries() {
    let cube = load_mesh(fixture("cube.ply"), MeshFormat::Ply).unwrap();
    assert_eq!(cube.vertex_count(), 8);
    assert_eq!(cube.triangle_count(), 12);
    assert_eq!(cube.vertices()[0], Point3::origin());
    let index = SurfaceIndex::build(&cube).unwrap();
    let root = index.root_bounds();
    assert_eq!((root.min, root.max), (Point3::origin(), Point3::new(1.0, 1.0, 1.0)));
    let r = index.query_closest(&Point3::new(0.5, 0.5, 2.0));
    assert!((r.distance - 1.0).abs() < 1e-12);
    assert!((r.point - Point3::new(0.5, 0.5, 1.0)).norm() < 1e-12);
}

#[test]
fn single_triangle_has_one_leaf() {
    let m = TriMesh::new(
        vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
        vec![[0, 1, 2]],
    )
    .unwrap();
    let index = SurfaceIndex::build(&m).unwrap();
    assert_eq!(index.leaves(), vec![&[0usize][..]]);
}

#[test]
fn random_meshes_match_exhaustive_search() {
    for m in 0..10u64 {
        let mut rng = rng(100 + m);
        let mesh = random_mesh(&mut rng, 500);
        let index = SurfaceIndex::build(&mesh).unwrap();

        // Structural audit: each indexed triangle sits in exactly one leaf.
        let mut seen = vec![0; mesh.triangle_count()];
        for leaf in index.leaves() {
            for &t in leaf {
                seen[t] += 1;
            }
        }
        for (t, &n) in seen.iter().enumerate() {
            assert_eq!(n, usize::from(!mesh.is_degenerate(t)), "triangle {t}");
        }
        assert!(index.bounds_are_nested());

        for _ in 0..200 {
            let p = random_point(&mut rng, 15.0);
            let r = index.query_closest(&p);
            let (d, _) = brute_closest(&mesh, &p);
            assert!((r.distance - d).abs() < 1e-9, "bvh {} vs brute {d}", r.distance);
            let [a, b, c] = mesh.triangle_points(r.triangle_id);
            let on = oracle_closest_on_triangle(&r.point, &a, &b, &c);
            assert!((on - r.point).norm() < 1e-9, "returned point is off its triangle");
            assert!(((p - r.point).norm() - r.distance).abs() < 1e-9);
            // Never farther than any vertex.
            assert!(mesh.vertices().iter().all(|v| r.distance <= (p - v).norm() + 1e-12));
        }
    }
}

#[test]
fn queries_at_vertices_are_exact() {
    let mut rng = rng(7);
    let mesh = random_mesh(&mut rng, 200);
    let index = SurfaceIndex::build(&mesh).unwrap();
    let used: std::collections::BTreeSet<usize> = mesh.triangles().iter().flatten().copied().collect();
    for &v in &used {
        let r = index.query_closest(&mesh.vertices()[v]);
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.point, mesh.vertices()[v]);
    }
}

#[test]
fn builds_and_queries_are_deterministic() {
    let mut rng = rng(8);
    let mesh = random_mesh(&mut rng, 300);
    let (a, b) = (SurfaceIndex::build(&mesh).unwrap(), SurfaceIndex::build(&mesh).unwrap());
    assert_eq!(a.leaves(), b.leaves());
    for _ in 0..50 {
        let p = random_point(&mut rng, 12.0);
        assert_eq!(a.query_closest(&p), b.query_closest(&p));
    }
}

#[test]
fn query_cost_is_sublinear_on_dense_surface() {
    // 100 rings × 50 segments → 10 000 triangles.
    let mesh = uv_ellipsoid([90.0, 110.0, 80.0], 100, 50);
    assert_eq!(mesh.triangle_count(), 10_000);
    let index = SurfaceIndex::build(&mesh).unwrap();
    let mut rng = rng(9);
    let queries = 500;
    let mut touched = 0;
    for _ in 0..queries {
        // Points near the surface, as in evaluation.
        let v = mesh.vertices()[rand::Rng::random_range(&mut rng, 0..mesh.vertex_count())];
        let p = v + random_point(&mut rng, 3.0).coords;
        touched += index.query_closest_counted(&p).1;
    }
    let fraction = touched as f64 / (queries * mesh.triangle_count()) as f64;
    assert!(fraction < 0.05, "average fraction of triangles touched {fraction}");
}

proptest! {
    #[test]
    fn triangle_closest_point_matches_oracle(
        coords in prop::array::uniform12(-10.0f64..10.0),
    ) {
        let a = Point3::new(coords[0], coords[1], coords[2]);
        let b = Point3::new(coords[3], coords[4], coords[5]);
        let c = Point3::new(coords[6], coords[7], coords[8]);
        let p = Point3::new(coords[9], coords[10], coords[11]);
        prop_assume!((b - a).cross(&(c - a)).norm() > 1e-3);
        let got = closest_point_on_triangle(&p, &a, &b, &c).unwrap();
        let want = oracle_closest_on_triangle(&p, &a, &b, &c);
        prop_assert!(((p - got).norm() - (p - want).norm()).abs() < 1e-9);
        prop_assert!((got - want).norm() < 1e-6);
    }

    #[test]
    fn distance_never_exceeds_vertex_distance(seed in 0u64..1000, qx in -20.0f64..20.0, qy in -20.0f64..20.0, qz in -20.0f64..20.0) {
        let mut rng = rng(10_000 + seed);
        let mesh = random_mesh(&mut rng, 40);
        let index = SurfaceIndex::build(&mesh).unwrap();
        let p = Point3::new(qx, qy, qz);
        let r = index.query_closest(&p);
        prop_assert!(r.distance >= 0.0);
        for t in mesh.triangles() {
            for &v in t {
                prop_assert!(r.distance <= (p - mesh.vertices()[v]).norm() + 1e-12);
            }
        }
        prop_assert!((r.distance - brute_closest(&mesh, &p).0).abs() < 1e-9);
    }
}
