//! Cascaded shape regression from one or more 2D landmark sets.
//!
//! Each stage maps the stacked landmark residual `U* − U^{k−1}` to a shape
//! update through a learned linear map `W^k`; `U^{k−1}` is obtained by
//! fitting a weak-perspective camera per present image to the current
//! shape's landmarks and projecting. All 2D quantities live in the
//! per-image normalized frame of [`LandmarkVector`].
//!
//! ## Binary container (`.fbcr`)
//!
//! ```text
//! magic          4 bytes "FBCR"
//! version        u32     1
//! target         u8      0 = vertices, 1 = coefficients
//! normalization  u8      0 = centroid / RMS radius
//! K N l out in   5 × u64 stages, image slots, landmarks, output dim, input dim
//! ridge          f64
//! initial        out × f64
//! stages         K × (out·in) × f64, each column-major
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix3xX};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::camera::{estimate_camera, project_weak_perspective};
use super::landmarks2d::LandmarkVector;
use super::model::{ByteReader, MorphableModel};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FBCR";
const VERSION: u32 = 1;

/// What the stage matrices regress.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionTarget {
    /// The full `3q` vertex vector.
    #[default]
    Vertices,
    /// The `m` shape coefficients; the shape is `mean + B·α`.
    Coefficients,
}

impl std::str::FromStr for RegressionTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertices" => Ok(Self::Vertices),
            "coefficients" => Ok(Self::Coefficients),
            other => Err(Error::InvalidArgument(format!(
                "unknown regression target `{other}` (expected vertices or coefficients)"
            ))),
        }
    }
}

/// How each image's landmarks are brought into a common frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Centred at the centroid, divided by the RMS radius.
    #[default]
    CentroidRms,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeOptions {
    pub stages: usize,
    /// Relative ridge weight; the absolute weight of each stage is
    /// `ridge · ‖X‖²_F / d` for its `d × n` residual matrix `X`.
    pub ridge: f64,
    pub target: RegressionTarget,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self {
            stages: 5,
            ridge: 1e-3,
            target: RegressionTarget::Vertices,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    /// Ground-truth `3q` shape.
    pub shape: DVector<f64>,
    pub landmarks: LandmarkVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// `Σⱼ ‖yⱼ‖²` before the first stage, `y` being the regression target
    /// minus the initial state.
    pub initial_objective: f64,
    /// Data term `Σⱼ ‖yⱼ − Wᵏ·dⱼ‖²` after each stage's solve.
    pub objectives: Vec<f64>,
    /// `sqrt(mean ‖S* − Sᵏ‖²)` over training samples for `k = 0…K`.
    pub shape_rms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadedRegressor {
    target: RegressionTarget,
    normalization: Normalization,
    capacity: usize,
    landmark_count: usize,
    ridge: f64,
    initial: DVector<f64>,
    stages: Vec<DMatrix<f64>>,
}

/// Per-stage landmark residual norms `‖U* − Uᵏ‖` for `k = 0…K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrace {
    pub shape: DVector<f64>,
    pub residual_norms: Vec<f64>,
}

impl CascadedRegressor {
    pub fn new(
        target: RegressionTarget,
        capacity: usize,
        landmark_count: usize,
        ridge: f64,
        initial: DVector<f64>,
        stages: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if capacity == 0 || landmark_count == 0 {
            return Err(Error::InvalidArgument("regressor needs N ≥ 1 and l ≥ 1".into()));
        }
        let input = 2 * landmark_count * capacity;
        for (k, w) in stages.iter().enumerate() {
            if w.nrows() != initial.len() || w.ncols() != input {
                return Err(Error::DimensionMismatch(format!(
                    "stage {} is {}×{}, expected {}×{input}",
                    k + 1,
                    w.nrows(),
                    w.ncols(),
                    initial.len()
                )));
            }
        }
        Ok(Self {
            target,
            normalization: Normalization::CentroidRms,
            capacity,
            landmark_count,
            ridge,
            initial,
            stages,
        })
    }

    pub fn target(&self) -> RegressionTarget {
        self.target
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn landmark_count(&self) -> usize {
        self.landmark_count
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn initial_state(&self) -> &DVector<f64> {
        &self.initial
    }

    pub fn stages(&self) -> &[DMatrix<f64>] {
        &self.stages
    }

    fn check_model(&self, model: &MorphableModel) -> Result<()> {
        let expected = match self.target {
            RegressionTarget::Vertices => 3 * model.vertex_count(),
            RegressionTarget::Coefficients => model.shape_mode_count(),
        };
        if self.initial.len() != expected || model.landmark_count() != self.landmark_count {
            return Err(Error::DimensionMismatch(format!(
                "regressor ({:?}, output {}, {} landmarks) does not match the model",
                self.target,
                self.initial.len(),
                self.landmark_count
            )));
        }
        Ok(())
    }

    fn check_input(&self, u: &LandmarkVector) -> Result<()> {
        if u.capacity() != self.capacity || u.landmark_count() != self.landmark_count {
            return Err(Error::DimensionMismatch(format!(
                "landmark vector has {} slots of {} landmarks, regressor expects {} of {}",
                u.capacity(),
                u.landmark_count(),
                self.capacity,
                self.landmark_count
            )));
        }
        if u.present_count() == 0 {
            return Err(Error::EmptyInput("landmark vector has no images"));
        }
        Ok(())
    }

    pub fn predict(&self, model: &MorphableModel, u: &LandmarkVector) -> Result<DVector<f64>> {
        self.check_model(model)?;
        self.check_input(u)?;
        let mut state = self.initial.clone();
        for (k, w) in self.stages.iter().enumerate() {
            let d = landmark_residual(model, self.target, &state, u).map_err(|e| stage_error(k + 1, e))?;
            state += w * d;
        }
        to_shape(model, self.target, &state)
    }

    /// As [`predict`](Self::predict), also reporting the landmark residual
    /// norm before each stage and after the last.
    pub fn predict_traced(&self, model: &MorphableModel, u: &LandmarkVector) -> Result<CascadeTrace> {
        self.check_model(model)?;
        self.check_input(u)?;
        let mut state = self.initial.clone();
        let mut residual_norms = Vec::with_capacity(self.stages.len() + 1);
        for k in 0..=self.stages.len() {
            let d = landmark_residual(model, self.target, &state, u).map_err(|e| stage_error(k + 1, e))?;
            residual_norms.push(d.norm());
            if let Some(w) = self.stages.get(k) {
                state += w * d;
            }
        }
        Ok(CascadeTrace {
            shape: to_shape(model, self.target, &state)?,
            residual_norms,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = if is_json(path) {
            serde_json::to_vec_pretty(&self.to_json())?
        } else {
            self.to_bytes()
        };
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let source = path.display().to_string();
        if is_json(path) {
            let json: RegressorJson = serde_json::from_slice(&bytes)
                .map_err(|e| Error::parse(&source, format!("invalid regressor JSON: {e}")))?;
            json.into_regressor()
        } else {
            Self::from_bytes(&bytes, &source)
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let input = 2 * self.landmark_count * self.capacity;
        let mut out = Vec::with_capacity(58 + 8 * self.initial.len() * (1 + self.stages.len() * input));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(match self.target {
            RegressionTarget::Vertices => 0,
            RegressionTarget::Coefficients => 1,
        });
        out.push(0);
        for n in [self.stages.len(), self.capacity, self.landmark_count, self.initial.len(), input] {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.ridge.to_le_bytes());
        for v in self.initial.iter().chain(self.stages.iter().flat_map(|w| w.iter())) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], source: &str) -> Result<Self> {
        let mut r = ByteReader::new(bytes, source);
        if r.take(4)? != MAGIC {
            return Err(Error::parse(format!("{source}@0"), "not a cascade regressor file (bad magic)"));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::UnsupportedFormat(format!("{source}: regressor version {version}")));
        }
        let tags = r.take(2)?;
        let target = match tags[0] {
            0 => RegressionTarget::Vertices,
            1 => RegressionTarget::Coefficients,
            t => return Err(Error::parse(format!("{source}@8"), format!("unknown target tag {t}"))),
        };
        if tags[1] != 0 {
            return Err(Error::parse(format!("{source}@9"), format!("unknown normalization tag {}", tags[1])));
        }
        let k = r.count()?;
        let n = r.count()?;
        let l = r.count()?;
        let out = r.count()?;
        let input = r.count()?;
        if input != 2 * l * n {
            return Err(Error::parse(source, format!("input dimension {input} is not 2·l·N = {}", 2 * l * n)));
        }
        let ridge = r.f64()?;
        let initial = DVector::from_vec(r.reals(out)?);
        let stages = (0..k)
            .map(|_| Ok(DMatrix::from_vec(out, input, r.reals(out * input)?)))
            .collect::<Result<Vec<_>>>()?;
        if !r.finished() {
            return Err(Error::parse(format!("{source}@{}", r.offset), "trailing bytes after regressor"));
        }
        Self::new(target, n, l, ridge, initial, stages)
    }

    fn to_json(&self) -> RegressorJson {
        RegressorJson {
            target: self.target,
            normalization: self.normalization,
            capacity: self.capacity,
            landmark_count: self.landmark_count,
            ridge: self.ridge,
            initial: self.initial.as_slice().to_vec(),
            stages: self
                .stages
                .iter()
                .map(|w| w.column_iter().map(|c| c.iter().copied().collect()).collect())
                .collect(),
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

#[derive(Serialize, Deserialize)]
struct RegressorJson {
    target: RegressionTarget,
    normalization: Normalization,
    capacity: usize,
    landmark_count: usize,
    ridge: f64,
    initial: Vec<f64>,
    /// Each stage as an array of columns.
    stages: Vec<Vec<Vec<f64>>>,
}

impl RegressorJson {
    fn into_regressor(self) -> Result<CascadedRegressor> {
        let rows = self.initial.len();
        let stages = self
            .stages
            .into_iter()
            .map(|cols| {
                if cols.iter().any(|c| c.len() != rows) {
                    return Err(Error::DimensionMismatch("stage column length differs from output dimension".into()));
                }
                let n = cols.len();
                Ok(DMatrix::from_vec(rows, n, cols.concat()))
            })
            .collect::<Result<Vec<_>>>()?;
        CascadedRegressor::new(
            self.target,
            self.capacity,
            self.landmark_count,
            self.ridge,
            DVector::from_vec(self.initial),
            stages,
        )
    }
}

fn stage_error(stage: usize, source: Error) -> Error {
    Error::CascadeStage {
        stage,
        source: Box::new(source),
    }
}

fn to_shape(model: &MorphableModel, target: RegressionTarget, state: &DVector<f64>) -> Result<DVector<f64>> {
    match target {
        RegressionTarget::Vertices => Ok(state.clone()),
        RegressionTarget::Coefficients => model.shape(state, None),
    }
}

fn state_landmarks(model: &MorphableModel, target: RegressionTarget, state: &DVector<f64>) -> Matrix3xX<f64> {
    match target {
        RegressionTarget::Vertices => model.landmarks_of(state),
        RegressionTarget::Coefficients => {
            let l = model.landmark_count();
            let mean_l = model.landmarks_of(model.mean());
            let offs = model.landmark_rows(model.shape_basis()) * state;
            mean_l + Matrix3xX::from_column_slice(&offs.as_slice()[..3 * l])
        }
    }
}

/// `U* − U` for the current state, zero in absent slots.
fn landmark_residual(
    model: &MorphableModel,
    target: RegressionTarget,
    state: &DVector<f64>,
    u: &LandmarkVector,
) -> Result<DVector<f64>> {
    let pts = state_landmarks(model, target, state);
    let l = u.landmark_count();
    let mut d = DVector::zeros(u.values().len());
    for i in 0..u.capacity() {
        if let Some(block) = u.block(i) {
            let cam = estimate_camera(&block, &pts)?.camera;
            let diff = block - project_weak_perspective(&cam, &pts);
            d.rows_mut(2 * l * i, 2 * l).copy_from_slice(diff.as_slice());
        }
    }
    Ok(d)
}

/// Ridge solution `W = Y·Xᵀ·(X·Xᵀ + λI)⁻¹` for columns-as-samples `X`
/// (`d × n`) and `Y` (`o × n`), via the `n × n` dual when `n < d`.
fn ridge_map(x: &DMatrix<f64>, y: &DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    let (d, n) = x.shape();
    let energy = x.norm_squared();
    if energy == 0.0 {
        return Ok(DMatrix::zeros(y.nrows(), d));
    }
    let lambda = ridge * energy / d as f64;
    let singular = || Error::SingularSystem("ridge system is not positive definite".into());
    if n < d {
        let mut g = x.tr_mul(x);
        for i in 0..n {
            g[(i, i)] += lambda;
        }
        let z = g.cholesky().ok_or_else(singular)?.solve(&y.transpose());
        Ok((x * z).transpose())
    } else {
        let mut h = x * x.transpose();
        for i in 0..d {
            h[(i, i)] += lambda;
        }
        let z = h.cholesky().ok_or_else(singular)?.solve(&(x * y.transpose()));
        Ok(z.transpose())
    }
}

/// Learns `options.stages` regression stages from ground-truth shapes and
/// their landmark observations.
pub fn cascade_train(
    model: &MorphableModel,
    samples: &[TrainingSample],
    options: &CascadeOptions,
) -> Result<(CascadedRegressor, TrainingReport)> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "cascade training needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !(options.ridge > 0.0) || !options.ridge.is_finite() {
        return Err(Error::InvalidArgument(format!("ridge must be positive, got {}", options.ridge)));
    }
    let dim = 3 * model.vertex_count();
    let (capacity, l) = (samples[0].landmarks.capacity(), samples[0].landmarks.landmark_count());
    if l != model.landmark_count() {
        return Err(Error::DimensionMismatch(format!(
            "samples carry {l} landmarks, model defines {}",
            model.landmark_count()
        )));
    }
    for (j, s) in samples.iter().enumerate() {
        if s.shape.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "sample {j} shape has length {}, model expects {dim}",
                s.shape.len()
            )));
        }
        if s.landmarks.capacity() != capacity || s.landmarks.landmark_count() != l {
            return Err(Error::DimensionMismatch(format!("sample {j} landmark vector layout differs from sample 0")));
        }
        if s.landmarks.present_count() == 0 {
            return Err(Error::EmptyInput("training sample without images"));
        }
    }

    let goals: Vec<DVector<f64>> = samples
        .iter()
        .map(|s| match options.target {
            RegressionTarget::Vertices => s.shape.clone(),
            RegressionTarget::Coefficients => model.coefficients_of(&s.shape),
        })
        .collect();
    let n = samples.len();
    let initial = goals.iter().fold(DVector::zeros(goals[0].len()), |a, g| a + g) / n as f64;
    let mut states = vec![initial.clone(); n];

    let shape_rms = |states: &[DVector<f64>]| -> Result<f64> {
        let mut sq = 0.0;
        for (s, st) in samples.iter().zip(states) {
            sq += (&s.shape - to_shape(model, options.target, st)?).norm_squared();
        }
        Ok((sq / n as f64).sqrt())
    };
    let initial_objective: f64 = goals.iter().zip(&states).map(|(g, s)| (g - s).norm_squared()).sum();
    let mut report = TrainingReport {
        initial_objective,
        objectives: Vec::with_capacity(options.stages),
        shape_rms: vec![shape_rms(&states)?],
    };

    let input = 2 * l * capacity;
    let mut stages = Vec::with_capacity(options.stages);
    for k in 1..=options.stages {
        let residuals = states
            .par_iter()
            .zip(samples.par_iter())
            .map(|(st, s)| landmark_residual(model, options.target, st, &s.landmarks))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| stage_error(k, e))?;
        let x = DMatrix::from_fn(input, n, |r, c| residuals[c][r]);
        let y = DMatrix::from_fn(initial.len(), n, |r, c| goals[c][r] - states[c][r]);
        let w = ridge_map(&x, &y, options.ridge).map_err(|e| stage_error(k, e))?;
        let step = &w * &x;
        for (c, st) in states.iter_mut().enumerate() {
            *st += step.column(c);
        }
        report.objectives.push((y - step).norm_squared());
        report.shape_rms.push(shape_rms(&states)?);
        stages.push(w);
    }
    let reg = CascadedRegressor::new(options.target, capacity, l, options.ridge, initial, stages)?;
    Ok((reg, report))
}

/// Training view subsets for a subject with `n_views` observations and a
/// regressor with `capacity` slots: for every size `p = 1…min(capacity,
/// n_views)` and every start view, the `p` cyclically consecutive views.
pub fn view_windows(n_views: usize, capacity: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for p in 1..=capacity.min(n_views) {
        for start in 0..n_views {
            out.push((0..p).map(|k| (start + k) % n_views).collect());
        }
    }
    out
}

/// Runs the cascade on one observation vector.
pub fn cascade_predict(
    regressor: &CascadedRegressor,
    model: &MorphableModel,
    landmarks: &LandmarkVector,
) -> Result<DVector<f64>> {
    regressor.predict(model, landmarks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_primal_and_dual_agree() {
        let x = DMatrix::from_fn(4, 6, |r, c| ((r * 5 + c * 3) % 7) as f64 - 3.0 + 0.1 * r as f64);
        let y = DMatrix::from_fn(2, 6, |r, c| (r + c) as f64);
        let primal = ridge_map(&x, &y, 0.01).unwrap();
        // Same problem through the dual: fewer samples than features.
        let xt = x.columns(0, 3).into_owned();
        let yt = y.columns(0, 3).into_owned();
        let dual = ridge_map(&xt, &yt, 0.01).unwrap();
        let lambda = 0.01 * xt.norm_squared() / 4.0;
        let direct = &yt * xt.transpose() * (&xt * xt.transpose() + DMatrix::identity(4, 4) * lambda).try_inverse().unwrap();
        assert!((dual - direct).amax() < 1e-9);
        let lambda = 0.01 * x.norm_squared() / 4.0;
        let direct = &y * x.transpose() * (&x * x.transpose() + DMatrix::identity(4, 4) * lambda).try_inverse().unwrap();
        assert!((primal - direct).amax() < 1e-9);
    }

    #[test]
    fn windows_cover_all_sizes() {
        assert_eq!(view_windows(3, 1), vec![vec![0], vec![1], vec![2]]);
        let w = view_windows(3, 2);
        assert_eq!(w.len(), 6);
        assert_eq!(w[5], vec![2, 0]);
        assert_eq!(view_windows(2, 5).len(), 4);
    }

    #[test]
    fn zero_residuals_give_zero_map() {
        let w = ridge_map(&DMatrix::zeros(3, 5), &DMatrix::from_element(2, 5, 1.0), 1e-3).unwrap();
        assert_eq!(w, DMatrix::zeros(2, 3));
    }

    #[test]
    fn binary_round_trip() {
        let r = CascadedRegressor::new(
            RegressionTarget::Coefficients,
            2,
            3,
            1e-3,
            DVector::from_vec(vec![1.0, 2.0]),
            vec![DMatrix::from_fn(2, 12, |r, c| (r * 12 + c) as f64)],
        )
        .unwrap();
        assert_eq!(CascadedRegressor::from_bytes(&r.to_bytes(), "t").unwrap(), r);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        r.save(&p).unwrap();
        assert_eq!(CascadedRegressor::load(&p).unwrap(), r);
    }
}
