use std::path::Path;

use log::warn;

use super::manifest::TrainManifest;
use crate::error::{Error, Result};
use crate::fitting::{
    assemble_landmark_vector, cascade_train, load_landmarks_2d, view_windows, CascadeOptions, MorphableModel,
    RegressionTarget, TrainingReport, TrainingSample,
};
use crate::geometry::load_mesh_auto;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub stages: usize,
    pub ridge: f64,
    /// Image slots `N`.
    pub images: usize,
    pub target: RegressionTarget,
}

impl Default for TrainOptions {
    fn default() -> Self {
        let c = CascadeOptions::default();
        Self {
            stages: c.stages,
            ridge: c.ridge,
            images: 1,
            target: c.target,
        }
    }
}

/// Expands a training manifest into cascade samples: every subject
/// contributes one sample per window of [`view_windows`].
pub fn load_training_samples(
    manifest: &TrainManifest,
    model: &MorphableModel,
    capacity: usize,
) -> Result<Vec<TrainingSample>> {
    let mut samples = Vec::new();
    for entry in &manifest.entries {
        let mesh = load_mesh_auto(manifest.resolve(&entry.shape))?;
        let shape = model
            .shape_from_mesh(&mesh)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", entry.shape)))?;
        let views = entry
            .landmarks
            .iter()
            .map(|p| {
                let u = load_landmarks_2d(manifest.resolve(p))?;
                if u.ncols() != model.landmark_count() {
                    return Err(Error::InvalidLandmarks(format!(
                        "{p}: {} points, the model expects {}",
                        u.ncols(),
                        model.landmark_count()
                    )));
                }
                Ok(u)
            })
            .collect::<Result<Vec<_>>>()?;
        for window in view_windows(views.len(), capacity) {
            let chosen: Vec<_> = window.iter().map(|&i| views[i].clone()).collect();
            samples.push(TrainingSample {
                shape: shape.clone(),
                landmarks: assemble_landmark_vector(&chosen, capacity)?,
            });
        }
    }
    Ok(samples)
}

pub fn cmd_train(manifest_path: &Path, model_path: &Path, output: &Path, opts: &TrainOptions) -> Result<TrainingReport> {
    let model = MorphableModel::load(model_path)?;
    let manifest = TrainManifest::load(manifest_path)?;
    if opts.images == 0 {
        return Err(Error::InvalidArgument("--images must be at least 1".into()));
    }
    let samples = load_training_samples(&manifest, &model, opts.images)?;
    if opts.stages == 0 {
        warn!("training with 0 stages: the regressor will predict the mean training shape");
    }
    let (reg, report) = cascade_train(
        &model,
        &samples,
        &CascadeOptions {
            stages: opts.stages,
            ridge: opts.ridge,
            target: opts.target,
        },
    )?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    reg.save(output)?;
    Ok(report)
}
