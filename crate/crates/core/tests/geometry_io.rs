mod common;

use common::*;
use facebench::geometry::obj::{parse_obj, to_obj};
use facebench::geometry::ply::{parse_ply, to_ply_ascii, to_ply_binary};
use facebench::geometry::{align_similarity, load_mesh_auto, save_mesh, LandmarkSet7, MeshFormat, SimilarityTransform, TriMesh};
use facebench::Error;
use nalgebra::{Matrix3, Point3, Rotation3, Vector3};
use proptest::prelude::*;

#[test]
fn minimal_obj() {
    let m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", "t.obj").unwrap();
    assert_eq!((m.vertex_count(), m.triangle_count()), (3, 1));
}

#[test]
fn obj_index_out_of_range_names_line() {
    let e = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n", "t.obj").unwrap_err();
    assert!(e.to_string().contains("t.obj:4"), "{e}");
}

#[test]
fn landmark_file_order_does_not_matter() {
    let sorted = "right_eye_outer -45 25 40\nright_eye_inner -15 25 55\nleft_eye_inner 15 25 55\n\
                  left_eye_outer 45 25 40\nnose_bottom 0 -15 75\nright_mouth -25 -45 55\nleft_mouth 25 -45 55\n";
    let mut lines: Vec<&str> = sorted.lines().collect();
    lines.rotate_left(4);
    let shuffled = lines.join("\n");
    assert!(shuffled.starts_with("nose_bottom"));
    let a = LandmarkSet7::parse(sorted, "a").unwrap();
    assert_eq!(a, LandmarkSet7::parse(&shuffled, "b").unwrap());
    assert_eq!(a.dim(), 3);
    let six: String = sorted.lines().take(6).map(|l| format!("{l}\n")).collect();
    assert!(LandmarkSet7::parse(&six, "c").is_err());
}

#[test]
fn files_round_trip_on_disk() {
    let mut rng = rng(1);
    let mesh = random_mesh(&mut rng, 60);
    let dir = tempfile::tempdir().unwrap();
    for (name, fmt) in [("m.obj", MeshFormat::Obj), ("m.ply", MeshFormat::Ply), ("b.ply", MeshFormat::PlyBinary)] {
        let p = dir.path().join(name);
        save_mesh(&mesh, &p, fmt).unwrap();
        assert_eq!(load_mesh_auto(&p).unwrap(), mesh, "{name}");
    }
    let lm = random_landmarks(&mut rng);
    let p = dir.path().join("lm.txt");
    lm.save(&p).unwrap();
    assert_eq!(LandmarkSet7::load(&p).unwrap(), lm);
}

#[test]
fn scaling_the_unit_cube() {
    let cube = facebench::geometry::load_mesh(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cube.ply"),
        MeshFormat::Ply,
    )
    .unwrap();
    let t = SimilarityTransform::new(2.0, Matrix3::identity(), Vector3::zeros()).unwrap();
    let big = t.apply_mesh(&cube);
    let (lo, hi) = big.bounds().unwrap();
    assert_eq!(hi - lo, Vector3::new(2.0, 2.0, 2.0));
    assert_eq!(big.triangles(), cube.triangles());
    assert_eq!(SimilarityTransform::identity().apply_mesh(&cube), cube);
}

#[test]
fn alignment_rejects_collinear_source() {
    let line = LandmarkSet7::new_3d(std::array::from_fn(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0))).unwrap();
    let mut rng = rng(2);
    let target = random_landmarks(&mut rng);
    assert!(matches!(align_similarity(&line, &target), Err(Error::AlignmentDegenerate(_))));
}

#[test]
fn alignment_recovers_documented_example() {
    let mut rng = rng(3);
    let src = random_landmarks(&mut rng);
    let rot = *Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2).matrix();
    let truth = SimilarityTransform::new(2.0, rot, Vector3::new(1.0, 2.0, 3.0)).unwrap();
    let dst = truth.apply_landmarks(&src).unwrap();
    let t = align_similarity(&src, &dst).unwrap();
    assert!((t.scale - 2.0).abs() < 1e-6);
    assert!((t.rotation - rot).norm() < 1e-6);
    assert!((t.translation - Vector3::new(1.0, 2.0, 3.0)).norm() < 1e-6);
}

fn mesh_strategy() -> impl Strategy<Value = TriMesh> {
    (3usize..30).prop_flat_map(|nv| {
        (
            prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), nv),
            prop::collection::vec(prop::array::uniform3(0..nv), 0..40),
        )
            .prop_map(|(vs, ts)| {
                let tris = ts.into_iter().filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2]).collect();
                TriMesh::new(vs.into_iter().map(Point3::from).collect(), tris).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn obj_round_trip_is_exact(mesh in mesh_strategy()) {
        prop_assert_eq!(parse_obj(&to_obj(&mesh), "p").unwrap(), mesh);
    }

    #[test]
    fn ply_round_trips_are_exact(mesh in mesh_strategy()) {
        prop_assert_eq!(&parse_ply(to_ply_ascii(&mesh).as_bytes(), "p").unwrap(), &mesh);
        prop_assert_eq!(&parse_ply(&to_ply_binary(&mesh), "p").unwrap(), &mesh);
    }

    #[test]
    fn exact_similarity_is_undone(seed in 0u64..10_000) {
        let mut rng = rng(20_000 + seed);
        let src = random_landmarks(&mut rng);
        let truth = random_similarity(&mut rng, 0.1, 10.0);
        let dst = truth.apply_landmarks(&src).unwrap();
        let t = align_similarity(&src, &dst).unwrap();
        let mapped = t.apply_landmarks(&src).unwrap();
        for (a, b) in mapped.points().iter().zip(dst.points()) {
            prop_assert!((a - b).norm() < 1e-9 * (1.0 + b.coords.norm()));
        }
        let back = t.inverse().compose(&t);
        prop_assert!((back.apply_point(&src.points()[0]) - src.points()[0]).norm() < 1e-9);
    }

    #[test]
    fn alignment_residual_is_conjugation_invariant(seed in 0u64..10_000) {
        let mut rng = rng(30_000 + seed);
        let src = random_landmarks(&mut rng);
        let dst = random_landmarks(&mut rng);
        let g = random_similarity(&mut rng, 0.5, 2.0);
        let residual = |s: &LandmarkSet7, d: &LandmarkSet7| {
            let t = align_similarity(s, d).unwrap();
            let m = t.apply_landmarks(s).unwrap();
            m.points().iter().zip(d.points()).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt()
        };
        let r0 = residual(&src, &dst);
        let r1 = residual(&g.apply_landmarks(&src).unwrap(), &g.apply_landmarks(&dst).unwrap());
        // Residuals live in the target frame, which g scales.
        prop_assert!((r1 - g.scale * r0).abs() < 1e-9 * (1.0 + r1));
    }
}
