use nalgebra::{DVector, Matrix2xX, Rotation3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{stream_rng, Stream, SynthConfig};
use crate::error::Result;
use crate::fitting::{project_weak_perspective, ImageFrame, MorphableModel, WeakPerspectiveCamera};
use crate::geometry::{LandmarkSet7, TriMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub subject_id: u64,
    pub coeffs: DVector<f64>,
    /// Ground-truth `3q` shape.
    pub shape: DVector<f64>,
    pub landmarks: LandmarkSet7,
    pub mesh: TriMesh,
}

/// A subject with coefficients `αⱼ = √λⱼ·zⱼ`, `z` standard normal.
pub fn make_subject(model: &MorphableModel, cfg: &SynthConfig, subject_id: u64) -> Result<Subject> {
    let mut rng = stream_rng(cfg.seed, Stream::Subject(subject_id));
    let coeffs = DVector::from_iterator(
        model.shape_mode_count(),
        model
            .eigenvalues()
            .iter()
            .map(|l| l.sqrt() * rng.sample::<f64, _>(StandardNormal)),
    );
    let mut s = subject_from_coeffs(model, &coeffs)?;
    s.subject_id = subject_id;
    Ok(s)
}

/// The subject `mean + B·α`, with id 0.
pub fn subject_from_coeffs(model: &MorphableModel, coeffs: &DVector<f64>) -> Result<Subject> {
    let shape = model.shape(coeffs, None)?;
    Ok(Subject {
        subject_id: 0,
        coeffs: coeffs.clone(),
        landmarks: model.alignment_landmarks(&shape)?,
        mesh: model.to_mesh(&shape)?,
        shape,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Observed `2 × l` landmarks.
    pub landmarks: Matrix2xX<f64>,
    /// The same landmarks before noise.
    pub clean: Matrix2xX<f64>,
    pub camera: WeakPerspectiveCamera,
}

/// Yaw in ±90°, pitch in ±30°, roll in ±20°, scale in [0.5, 2] and
/// translation in ±20 mm per axis, drawn in that order.
pub fn random_camera<R: Rng>(rng: &mut R) -> WeakPerspectiveCamera {
    let deg = std::f64::consts::PI / 180.0;
    let yaw = rng.random_range(-90.0..=90.0) * deg;
    let pitch = rng.random_range(-30.0..=30.0) * deg;
    let roll = rng.random_range(-20.0..=20.0) * deg;
    let scale = rng.random_range(0.5..=2.0);
    let t = Vector3::new(
        rng.random_range(-20.0..=20.0),
        rng.random_range(-20.0..=20.0),
        rng.random_range(-20.0..=20.0),
    );
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), roll)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), pitch)
        * Rotation3::from_axis_angle(&Vector3::y_axis(), yaw);
    WeakPerspectiveCamera::new(scale, *r.matrix(), t).expect("rotation is proper")
}

pub fn make_observation(
    model: &MorphableModel,
    shape: &DVector<f64>,
    cfg: &SynthConfig,
    image_id: u64,
) -> Result<Observation> {
    make_observation_with_sd(model, shape, cfg.seed, image_id, cfg.landmark_noise_sd)
}

/// Projects the model landmarks of `shape` through a random camera and adds
/// isotropic Gaussian noise of `noise_sd` RMS landmark radii per coordinate.
pub fn make_observation_with_sd(
    model: &MorphableModel,
    shape: &DVector<f64>,
    seed: u64,
    image_id: u64,
    noise_sd: f64,
) -> Result<Observation> {
    let mut rng = stream_rng(seed, Stream::Observation(image_id));
    let camera = random_camera(&mut rng);
    let clean = project_weak_perspective(&camera, &model.landmarks_of(shape));
    let sd = noise_sd * ImageFrame::of(&clean)?.scale;
    let mut landmarks = clean.clone();
    for c in landmarks.column_iter_mut() {
        for v in c {
            *v += sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(Observation {
        landmarks,
        clean,
        camera,
    })
}
