use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fitting::{
    assemble_landmark_vector, fit_shape_linear, load_landmarks_2d, CascadedRegressor, LinearFitOptions,
    MorphableModel,
};
use crate::geometry::{save_mesh, MeshFormat};

#[derive(Debug, Clone, PartialEq)]
pub enum FitMethod {
    Linear,
    Cascade { regressor: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub method: FitMethod,
    pub lambda: f64,
    pub iterations: usize,
    pub nonnegative_expressions: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        let l = LinearFitOptions::default();
        Self {
            method: FitMethod::Linear,
            lambda: l.lambda,
            iterations: l.iterations,
            nonnegative_expressions: l.nonnegative_expressions,
        }
    }
}

/// `dir/stem.landmarks.txt` for `dir/stem.ext`.
pub(crate) fn landmarks_path_for(mesh: &Path) -> PathBuf {
    let stem = mesh.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    mesh.with_file_name(format!("{stem}.landmarks.txt"))
}

/// Reconstructs a neutral mesh from 2D landmark files and writes it with
/// its seven alignment landmarks. Returns the written paths.
pub fn cmd_fit(model_path: &Path, landmark_paths: &[PathBuf], output: &Path, opts: &FitOptions) -> Result<Vec<PathBuf>> {
    let format = MeshFormat::from_path(output)?;
    let model = MorphableModel::load(model_path)?;
    let mut images = Vec::with_capacity(landmark_paths.len());
    for p in landmark_paths {
        let u = load_landmarks_2d(p)?;
        if u.ncols() != model.landmark_count() {
            return Err(Error::InvalidLandmarks(format!(
                "{}: {} points, the model expects {}",
                p.display(),
                u.ncols(),
                model.landmark_count()
            )));
        }
        images.push(u);
    }
    if images.is_empty() {
        return Err(Error::EmptyInput("landmark file list"));
    }

    let shape = match &opts.method {
        FitMethod::Linear => {
            if images.len() != 1 {
                return Err(Error::InvalidArgument(format!(
                    "linear fitting takes one landmark file, got {}",
                    images.len()
                )));
            }
            let lin = LinearFitOptions {
                iterations: opts.iterations,
                lambda: opts.lambda,
                nonnegative_expressions: opts.nonnegative_expressions,
            };
            fit_shape_linear(&model, &images[0], &lin)?.neutral_shape(&model)?
        }
        FitMethod::Cascade { regressor } => {
            let reg = CascadedRegressor::load(regressor)?;
            let u = assemble_landmark_vector(&images, reg.capacity())?;
            reg.predict(&model, &u)?
        }
    };

    let mesh = model.to_mesh(&shape)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    save_mesh(&mesh, output, format)?;
    let lm_path = landmarks_path_for(output);
    model.alignment_landmarks(&shape)?.save(&lm_path)?;
    Ok(vec![output.to_path_buf(), lm_path])
}
