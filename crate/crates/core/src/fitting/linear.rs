use nalgebra::{DMatrix, DVector, Matrix2xX};
use serde::{Deserialize, Serialize};

use super::camera::{estimate_camera, WeakPerspectiveCamera};
use super::model::MorphableModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFitOptions {
    pub iterations: usize,
    /// Weight of the prior `Σ αⱼ²/eigenvalueⱼ`.
    pub lambda: f64,
    /// Constrain expression coefficients to `β ≥ 0`.
    pub nonnegative_expressions: bool,
}

impl Default for LinearFitOptions {
    fn default() -> Self {
        Self {
            iterations: 5,
            lambda: 30.0,
            nonnegative_expressions: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub shape_coeffs: DVector<f64>,
    pub expression_coeffs: DVector<f64>,
    pub camera: WeakPerspectiveCamera,
    /// RMS landmark reprojection error of the final shape under the final
    /// camera.
    pub residual: f64,
}

impl LinearFit {
    /// Identity shape without expressions.
    pub fn neutral_shape(&self, model: &MorphableModel) -> Result<DVector<f64>> {
        model.shape(&self.shape_coeffs, None)
    }

    pub fn full_shape(&self, model: &MorphableModel) -> Result<DVector<f64>> {
        model.shape(&self.shape_coeffs, Some(&self.expression_coeffs))
    }
}

/// The linear least-squares problem for a fixed camera.
///
/// Unknowns are `x = [α; β]`; the objective is
/// `‖A·x − y‖² + xᵀ·D·x` with `D = diag(λ/eigenvalue, 0…0)`.
#[derive(Debug, Clone)]
pub struct RidgeSystem {
    pub design: DMatrix<f64>,
    pub target: DVector<f64>,
    pub penalty: DVector<f64>,
}

impl RidgeSystem {
    pub fn build(
        model: &MorphableModel,
        image: &Matrix2xX<f64>,
        camera: &WeakPerspectiveCamera,
        lambda: f64,
    ) -> Result<Self> {
        check_inputs(model, image, lambda)?;
        let (m, e, l) = (model.shape_mode_count(), model.expression_count(), model.landmark_count());
        let lin = camera.linear_part();
        let t = camera.translation();
        let mean = model.mean();
        let basis = model.shape_basis();
        let blend = model.blendshapes();
        let mut design = DMatrix::zeros(2 * l, m + e);
        let mut target = DVector::zeros(2 * l);
        for (j, &v) in model.landmark_map().iter().enumerate() {
            let rows = 3 * v..3 * v + 3;
            let anchor = mean.rows(rows.start, 3) + t;
            let rest = image.column(j) - lin * anchor;
            target[2 * j] = rest.x;
            target[2 * j + 1] = rest.y;
            let bl = lin * basis.rows(rows.start, 3);
            design.view_mut((2 * j, 0), (2, m)).copy_from(&bl);
            if e > 0 {
                let el = lin * blend.rows(rows.start, 3);
                design.view_mut((2 * j, m), (2, e)).copy_from(&el);
            }
        }
        let mut penalty = DVector::zeros(m + e);
        for k in 0..m {
            penalty[k] = lambda / model.eigenvalues()[k];
        }
        Ok(Self {
            design,
            target,
            penalty,
        })
    }

    /// `(AᵀA + D)·x − Aᵀy`.
    pub fn normal_residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let ax = &self.design * x;
        self.design.tr_mul(&(ax - &self.target)) + self.penalty.component_mul(x)
    }

    /// Solves the normal equations over the unknowns where `free` is true;
    /// the others are held at zero.
    fn solve_subset(&self, free: &[bool]) -> Result<DVector<f64>> {
        let idx: Vec<usize> = (0..free.len()).filter(|&i| free[i]).collect();
        let a = self.design.select_columns(idx.iter());
        let mut lhs = a.tr_mul(&a);
        for (r, &i) in idx.iter().enumerate() {
            lhs[(r, r)] += self.penalty[i];
        }
        let rhs = a.tr_mul(&self.target);
        let sol = solve_spd(lhs, &rhs)?;
        let mut x = DVector::zeros(free.len());
        for (r, &i) in idx.iter().enumerate() {
            x[i] = sol[r];
        }
        Ok(x)
    }

    /// Minimizer of the ridge objective, optionally with the trailing
    /// `expressions` unknowns constrained to be non-negative.
    pub fn solve(&self, expressions: usize, nonnegative_expressions: bool) -> Result<DVector<f64>> {
        let n = self.design.ncols();
        if !nonnegative_expressions || expressions == 0 {
            return self.solve_subset(&vec![true; n]);
        }
        // Lawson–Hanson active set over the expression weights; shape
        // coefficients are always free.
        let first = n - expressions;
        let mut free: Vec<bool> = (0..n).map(|i| i < first).collect();
        let mut x = self.solve_subset(&free)?;
        let tol = 1e-12 * self.design.tr_mul(&self.target).amax().max(1.0);
        for _ in 0..100 * (expressions + 1) {
            let g = self.normal_residual(&x);
            let enter = (first..n)
                .filter(|&i| !free[i] && -g[i] > tol)
                .max_by(|&a, &b| (-g[a]).total_cmp(&-g[b]));
            let Some(i) = enter else {
                return Ok(x);
            };
            free[i] = true;
            loop {
                let z = self.solve_subset(&free)?;
                let blocking: Vec<usize> = (first..n).filter(|&k| free[k] && z[k] <= 0.0).collect();
                if blocking.is_empty() {
                    x = z;
                    break;
                }
                let (hit, step) = blocking
                    .iter()
                    .map(|&k| (k, x[k] / (x[k] - z[k])))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("blocking is non-empty");
                x += (&z - &x) * step.clamp(0.0, 1.0);
                x[hit] = 0.0;
                for k in first..n {
                    if free[k] && x[k] <= 0.0 {
                        free[k] = false;
                        x[k] = 0.0;
                    }
                }
            }
        }
        Err(Error::SingularSystem("non-negative expression solve did not converge".into()))
    }
}

/// Cholesky with an LU fallback; both failing means the system is singular.
pub(crate) fn solve_spd(lhs: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if lhs.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let scale = lhs.diagonal().amax();
    if !(scale > 0.0) {
        return Err(Error::SingularSystem("normal matrix is zero".into()));
    }
    if let Some(ch) = lhs.clone().cholesky() {
        // Reject numerically singular factors that Cholesky let through.
        let d = ch.l_dirty().diagonal();
        if d.min() * d.min() > 1e-14 * scale {
            return Ok(ch.solve(rhs));
        }
    }
    let lu = lhs.lu();
    lu.solve(rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::SingularSystem("normal equations are singular".into()))
}

fn check_inputs(model: &MorphableModel, image: &Matrix2xX<f64>, lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite and ≥ 0, got {lambda}")));
    }
    if image.ncols() != model.landmark_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} image landmarks, model defines {}",
            image.ncols(),
            model.landmark_count()
        )));
    }
    if !image.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("image landmarks are not finite".into()));
    }
    Ok(())
}

fn finish(
    model: &MorphableModel,
    image: &Matrix2xX<f64>,
    x: &DVector<f64>,
    camera: WeakPerspectiveCamera,
) -> Result<LinearFit> {
    let m = model.shape_mode_count();
    let alpha = x.rows(0, m).into_owned();
    let beta = x.rows(m, model.expression_count()).into_owned();
    let shape = model.shape(&alpha, Some(&beta))?;
    let proj = super::camera::project_weak_perspective(&camera, &model.landmarks_of(&shape));
    let sq: f64 = (proj - image).column_iter().map(|c| c.norm_squared()).sum();
    Ok(LinearFit {
        shape_coeffs: alpha,
        expression_coeffs: beta,
        camera,
        residual: (sq / image.ncols() as f64).sqrt(),
    })
}

/// Shape and expression coefficients for a known camera (one ridge solve).
pub fn fit_shape_given_camera(
    model: &MorphableModel,
    image: &Matrix2xX<f64>,
    camera: &WeakPerspectiveCamera,
    options: &LinearFitOptions,
) -> Result<LinearFit> {
    let sys = RidgeSystem::build(model, image, camera, options.lambda)?;
    let x = sys.solve(model.expression_count(), options.nonnegative_expressions)?;
    finish(model, image, &x, *camera)
}

/// Landmark-driven model fit alternating camera estimation and a
/// regularized linear solve for the coefficients, starting from the mean.
pub fn fit_shape_linear(
    model: &MorphableModel,
    image: &Matrix2xX<f64>,
    options: &LinearFitOptions,
) -> Result<LinearFit> {
    check_inputs(model, image, options.lambda)?;
    if options.iterations == 0 {
        return Err(Error::InvalidArgument("at least one fitting iteration is required".into()));
    }
    let n = model.shape_mode_count() + model.expression_count();
    let mut x = DVector::zeros(n);
    let mut camera = WeakPerspectiveCamera::identity();
    for _ in 0..options.iterations {
        let m = model.shape_mode_count();
        let shape = model.shape(&x.rows(0, m).into_owned(), Some(&x.rows(m, n - m).into_owned()))?;
        camera = estimate_camera(image, &model.landmarks_of(&shape))?.camera;
        let sys = RidgeSystem::build(model, image, &camera, options.lambda)?;
        x = sys.solve(model.expression_count(), options.nonnegative_expressions)?;
    }
    finish(model, image, &x, camera)
}
