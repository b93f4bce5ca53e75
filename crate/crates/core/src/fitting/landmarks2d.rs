//! 2D landmark observations: file I/O, per-image normalization and the
//! stacked multi-image vector consumed by the cascade.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DVector, Matrix2xX, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Similarity frame of one image: `normalized = (raw − centroid) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageFrame {
    pub centroid: Vector2<f64>,
    /// RMS distance of the landmarks from their centroid.
    pub scale: f64,
}

impl ImageFrame {
    pub fn of(points: &Matrix2xX<f64>) -> Result<Self> {
        if points.ncols() == 0 {
            return Err(Error::EmptyInput("landmark set"));
        }
        if !points.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidLandmarks("2D landmarks are not finite".into()));
        }
        let centroid = points.column_mean();
        let ms = points.column_iter().map(|c| (c - centroid).norm_squared()).sum::<f64>() / points.ncols() as f64;
        let scale = ms.sqrt();
        if !(scale > 0.0) {
            return Err(Error::InvalidLandmarks("all 2D landmarks coincide".into()));
        }
        Ok(Self { centroid, scale })
    }

    pub fn normalize(&self, points: &Matrix2xX<f64>) -> Matrix2xX<f64> {
        let mut out = points.clone();
        for mut c in out.column_iter_mut() {
            c -= self.centroid;
            c /= self.scale;
        }
        out
    }

    pub fn denormalize(&self, points: &Matrix2xX<f64>) -> Matrix2xX<f64> {
        let mut out = points * self.scale;
        for mut c in out.column_iter_mut() {
            c += self.centroid;
        }
        out
    }
}

/// Centroid-centred, RMS-scaled copy of `points`.
pub fn normalize_landmarks(points: &Matrix2xX<f64>) -> Result<(Matrix2xX<f64>, ImageFrame)> {
    let frame = ImageFrame::of(points)?;
    Ok((frame.normalize(points), frame))
}

/// `N` slots of `l` normalized 2D landmarks stacked as
/// `x₀ y₀ x₁ y₁ …` per slot; unused slots are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkVector {
    values: DVector<f64>,
    present: Vec<bool>,
    frames: Vec<Option<ImageFrame>>,
    landmark_count: usize,
}

pub fn assemble_landmark_vector(images: &[Matrix2xX<f64>], capacity: usize) -> Result<LandmarkVector> {
    if images.is_empty() {
        return Err(Error::EmptyInput("image list"));
    }
    if capacity == 0 {
        return Err(Error::InvalidArgument("image capacity must be at least 1".into()));
    }
    if images.len() > capacity {
        return Err(Error::Capacity {
            given: images.len(),
            capacity,
        });
    }
    let l = images[0].ncols();
    if let Some(bad) = images.iter().find(|u| u.ncols() != l) {
        return Err(Error::DimensionMismatch(format!(
            "images carry different landmark counts ({l} and {})",
            bad.ncols()
        )));
    }
    let mut values = DVector::zeros(2 * l * capacity);
    let mut frames = vec![None; capacity];
    let mut present = vec![false; capacity];
    for (i, u) in images.iter().enumerate() {
        let (norm, frame) = normalize_landmarks(u)?;
        values.rows_mut(2 * l * i, 2 * l).copy_from_slice(norm.as_slice());
        frames[i] = Some(frame);
        present[i] = true;
    }
    Ok(LandmarkVector {
        values,
        present,
        frames,
        landmark_count: l,
    })
}

impl LandmarkVector {
    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn present(&self) -> &[bool] {
        &self.present
    }

    pub fn frames(&self) -> &[Option<ImageFrame>] {
        &self.frames
    }

    pub fn capacity(&self) -> usize {
        self.present.len()
    }

    pub fn landmark_count(&self) -> usize {
        self.landmark_count
    }

    pub fn present_count(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    /// Normalized landmarks of slot `i`, if it holds an image.
    pub fn block(&self, i: usize) -> Option<Matrix2xX<f64>> {
        let l = self.landmark_count;
        self.present.get(i).copied().unwrap_or(false).then(|| {
            Matrix2xX::from_column_slice(self.values.rows(2 * l * i, 2 * l).as_slice())
        })
    }
}

/// Reads a 2D landmark file: the iBUG `.pts` layout (`version`, `n_points`,
/// braces) or plain whitespace-separated `x y` rows with `#` comments.
pub fn parse_landmarks_2d(text: &str, source: &str) -> Result<Matrix2xX<f64>> {
    let mut coords = Vec::new();
    let mut announced: Option<usize> = None;
    let mut in_braces = false;
    let mut saw_braces = false;
    for (n, raw) in text.lines().enumerate() {
        let loc = || format!("{source}:{}", n + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("version") {
            continue;
        }
        if let Some(rest) = line.strip_prefix("n_points") {
            let count = rest.trim_start_matches([':', ' ', '\t']).trim();
            announced = Some(
                count
                    .parse()
                    .map_err(|_| Error::parse(loc(), format!("bad n_points `{count}`")))?,
            );
            continue;
        }
        if line == "{" {
            in_braces = true;
            saw_braces = true;
            continue;
        }
        if line == "}" {
            in_braces = false;
            continue;
        }
        if saw_braces && !in_braces {
            return Err(Error::parse(loc(), "content after closing brace"));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(loc(), format!("expected `x y`, found {} fields", fields.len())));
        }
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(loc(), format!("`{f}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(loc(), "non-finite coordinate"));
            }
            coords.push(v);
        }
    }
    let count = coords.len() / 2;
    if let Some(a) = announced {
        if a != count {
            return Err(Error::parse(source, format!("n_points announces {a}, found {count}")));
        }
    }
    if count == 0 {
        return Err(Error::parse(source, "no landmarks"));
    }
    Ok(Matrix2xX::from_column_slice(&coords))
}

pub fn load_landmarks_2d(path: impl AsRef<Path>) -> Result<Matrix2xX<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_landmarks_2d(&text, &path.display().to_string())
}

/// iBUG `.pts` text, with coordinates in shortest round-trip form.
pub fn landmarks_2d_to_pts(points: &Matrix2xX<f64>) -> String {
    let mut out = format!("version: 1\nn_points: {}\n{{\n", points.ncols());
    for c in points.column_iter() {
        let _ = writeln!(out, "{} {}", c.x, c.y);
    }
    out.push_str("}\n");
    out
}

pub fn save_landmarks_2d(points: &Matrix2xX<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, landmarks_2d_to_pts(points)).map_err(|e| Error::io(path, e))
}
