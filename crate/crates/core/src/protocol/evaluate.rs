use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::rmse;
use super::region::{face_centre, region_radius, select_region, BridgeMode, RegionSpec};
use crate::error::Result;
use crate::geometry::{align_similarity, LandmarkSet7, SimilarityTransform, TriMesh};
use crate::spatial::SurfaceIndex;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub bridge: BridgeMode,
}

/// Outcome of evaluating one prediction against its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// One surface distance per region vertex, in ascending ground-truth
    /// vertex order (parallel to `region.vertex_ids`).
    pub distances: Vec<f64>,
    pub rmse: f64,
    pub region: RegionSpec,
    /// Maps the prediction into the ground-truth frame.
    pub transform: SimilarityTransform,
}

impl ErrorReport {
    /// Distances in ascending order, for plotting distributions.
    pub fn sorted_distances(&self) -> Vec<f64> {
        let mut d = self.distances.clone();
        d.sort_by(f64::total_cmp);
        d
    }
}

/// Evaluates a predicted mesh against a ground-truth scan.
///
/// The prediction is similarity-aligned onto the ground truth through the
/// seven landmarks; then, for each ground-truth vertex within the face
/// region, the distance to the closest point of the aligned prediction's
/// surface is recorded. The ground truth is never moved.
pub fn evaluate_pair(
    pred_mesh: &TriMesh,
    pred_landmarks: &LandmarkSet7,
    gt_mesh: &TriMesh,
    gt_landmarks: &LandmarkSet7,
) -> Result<ErrorReport> {
    evaluate_pair_with(pred_mesh, pred_landmarks, gt_mesh, gt_landmarks, &EvalConfig::default())
}

pub fn evaluate_pair_with(
    pred_mesh: &TriMesh,
    pred_landmarks: &LandmarkSet7,
    gt_mesh: &TriMesh,
    gt_landmarks: &LandmarkSet7,
    config: &EvalConfig,
) -> Result<ErrorReport> {
    let transform = align_similarity(pred_landmarks, gt_landmarks)?;
    let aligned = transform.apply_mesh(pred_mesh);
    let index = SurfaceIndex::build(&aligned)?;

    let centre = face_centre(gt_landmarks, config.bridge);
    let radius = region_radius(gt_landmarks, config.bridge)?;
    let region = select_region(gt_mesh, centre, radius)?;

    let vertices = gt_mesh.vertices();
    let distances: Vec<f64> = region
        .vertex_ids
        .par_iter()
        .map(|&i| index.query_closest(&vertices[i]).distance)
        .collect();
    let rmse = rmse(&distances)?;
    Ok(ErrorReport {
        distances,
        rmse,
        region,
        transform,
    })
}
