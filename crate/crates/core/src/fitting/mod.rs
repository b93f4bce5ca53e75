//! Landmark-driven reconstruction: weak-perspective cameras, regularized
//! linear model fitting and cascaded shape regression.

mod camera;
pub mod cascade;
mod landmarks2d;
mod linear;
pub mod model;

pub use camera::{estimate_camera, project_weak_perspective, CameraFit, WeakPerspectiveCamera};
pub use cascade::{
    cascade_predict, cascade_train, CascadeOptions, CascadeTrace, CascadedRegressor, Normalization,
    RegressionTarget, TrainingReport, TrainingSample, view_windows,
};
pub use landmarks2d::{
    assemble_landmark_vector, landmarks_2d_to_pts, load_landmarks_2d, normalize_landmarks,
    parse_landmarks_2d, save_landmarks_2d, ImageFrame, LandmarkVector,
};
pub use linear::{fit_shape_given_camera, fit_shape_linear, LinearFit, LinearFitOptions, RidgeSystem};
pub use model::{MorphableModel, IBUG68_ALIGNMENT_POINTS, IBUG68_LANDMARK_COUNT};
