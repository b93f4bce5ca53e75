//! # facebench
//!
//! Evaluation of dense 3D face reconstructions against ground-truth scans,
//! plus two landmark-driven reconstruction baselines.
//!
//! The evaluation metric works in two steps:
//!
//! 1. The predicted mesh is brought into the ground-truth frame by the
//!    least-squares similarity transform (scale, rotation, translation)
//!    between seven annotated landmarks ([`geometry::align_similarity`]).
//! 2. For every ground-truth vertex inside the face region (a ball around a
//!    face centre derived from the landmarks) the distance to the closest
//!    point on the predicted surface is measured ([`spatial::SurfaceIndex`]),
//!    and the root-mean-square of those distances is the 3D-RMSE
//!    ([`protocol::evaluate_pair`]).
//!
//! Per-image errors are aggregated into cumulative error distribution
//! curves and `mean±std` tables split by image quality.
//!
//! The [`fitting`] module holds the reconstruction baselines: regularised
//! linear morphable-model fitting under a weak-perspective camera, and a
//! cascaded shape regressor that accepts one or several images of a
//! subject. [`synth`] produces deterministic synthetic models, subjects and
//! observations, and [`cli`] wires everything into batch commands.
//!
//! See the crate's `examples/` directory for one runnable program per
//! capability.

pub mod cli;
pub mod error;
pub mod fitting;
pub mod geometry;
pub mod protocol;
pub mod spatial;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{Landmark, LandmarkSet7, SimilarityTransform, TriMesh};
