//! Least-squares fitting of lagged linear models.
//!
//! The solver standardizes feature columns internally, forms the normal
//! equations over `[1 | Z]` with `ridge_eps` added to the non-intercept
//! diagonal, and solves them by Cholesky factorization. The intercept is
//! never penalized, and the ridge acts on the standardized scale, so scaling
//! every input by a constant scales every prediction by the same constant.
//! When `normalize` is off the fitted coefficients are mapped back to the raw
//! feature scale and the stored statistics are the identity.

use crate::error::{Error, Result};
use crate::forecast::lag::{LagColumn, LagMatrix};

/// A fitted linear model with its training normalization statistics.
#[derive(Debug, Clone)]
pub struct OlsModel {
    intercept: f64,
    coefficients: Vec<f64>,
    feature_means: Vec<f64>,
    feature_stds: Vec<f64>,
    layout: Vec<LagColumn>,
    lags: usize,
    horizon: usize,
}

impl OlsModel {
    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Training means, one per column (all zero when fitted unnormalized).
    pub fn feature_means(&self) -> &[f64] {
        &self.feature_means
    }

    /// Training standard deviations, one per column (all one when fitted
    /// unnormalized; degenerate columns are stored as one).
    pub fn feature_stds(&self) -> &[f64] {
        &self.feature_stds
    }

    pub fn layout(&self) -> &[LagColumn] {
        &self.layout
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// Fits a linear model on the lag matrix by ridge-stabilized least squares.
///
/// With `ridge_eps = 0` and a full-rank design this is the exact
/// least-squares solution; a singular system then yields
/// [`Error::DegenerateSystem`]. With `ridge_eps > 0` fitting always succeeds.
pub fn ols_fit(matrix: &LagMatrix, normalize: bool, ridge_eps: f64) -> Result<OlsModel> {
    let n = matrix.n_rows();
    let p = matrix.width();
    if n == 0 {
        return Err(Error::DegenerateSystem);
    }

    // Column statistics. A column whose spread is zero up to rounding noise
    // carries no information: it gets std 1, its z-scores are pinned to zero,
    // and its coefficient comes out exactly zero. The threshold is relative
    // to the column mean, so the classification is scale-equivariant.
    let mut means = vec![0.0; p];
    let mut stds = vec![1.0; p];
    let mut degenerate = vec![false; p];
    for j in 0..p {
        let mut sum = 0.0;
        for i in 0..n {
            sum += matrix.row(i)[j];
        }
        means[j] = sum / n as f64;
        let mut ss = 0.0;
        for i in 0..n {
            let d = matrix.row(i)[j] - means[j];
            ss += d * d;
        }
        let std = (ss / n as f64).sqrt();
        degenerate[j] = std <= 1e3 * f64::EPSILON * means[j].abs();
        stds[j] = if degenerate[j] { 1.0 } else { std };
    }

    // Normal equations over [1 | Z]; ridge on the non-intercept diagonal.
    let m = p + 1;
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    let targets = matrix.targets();
    a[0] = n as f64;
    b[0] = targets.iter().sum();
    let mut z_row = vec![0.0; p];
    for i in 0..n {
        let row = matrix.row(i);
        for j in 0..p {
            z_row[j] = if degenerate[j] {
                0.0
            } else {
                (row[j] - means[j]) / stds[j]
            };
        }
        for j in 0..p {
            a[j + 1] += z_row[j];
            b[j + 1] += z_row[j] * targets[i];
            for k in j..p {
                a[(j + 1) * m + (k + 1)] += z_row[j] * z_row[k];
            }
        }
    }
    for j in 0..p {
        a[(j + 1) * m + (j + 1)] += ridge_eps;
    }
    // Mirror into the lower triangle.
    for r in 0..m {
        for c in (r + 1)..m {
            a[c * m + r] = a[r * m + c];
        }
    }

    let solution = solve_symmetric(&mut a, &b, m).ok_or(Error::DegenerateSystem)?;
    let intercept_z = solution[0];
    let beta_z = &solution[1..];

    let model = if normalize {
        OlsModel {
            intercept: intercept_z,
            coefficients: beta_z.to_vec(),
            feature_means: means,
            feature_stds: stds,
            layout: matrix.layout().to_vec(),
            lags: matrix.lags(),
            horizon: matrix.horizon(),
        }
    } else {
        let coefficients: Vec<f64> = beta_z.iter().zip(&stds).map(|(c, s)| c / s).collect();
        let intercept = intercept_z
            - beta_z
                .iter()
                .zip(&means)
                .zip(&stds)
                .map(|((c, mu), s)| c * mu / s)
                .sum::<f64>();
        OlsModel {
            intercept,
            coefficients,
            feature_means: vec![0.0; p],
            feature_stds: vec![1.0; p],
            layout: matrix.layout().to_vec(),
            lags: matrix.lags(),
            horizon: matrix.horizon(),
        }
    };
    Ok(model)
}

/// Evaluates the model on a raw feature vector.
pub fn ols_predict(model: &OlsModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: model.coefficients.len(),
            actual: features.len(),
        });
    }
    let mut acc = model.intercept;
    for j in 0..features.len() {
        acc += model.coefficients[j] * (features[j] - model.feature_means[j]) / model.feature_stds[j];
    }
    Ok(acc)
}

/// Solves the symmetric positive-definite system `a * x = b` in place by
/// Cholesky factorization. Returns `None` when a pivot falls below the
/// rank tolerance, i.e. the system is singular.
fn solve_symmetric(a: &mut [f64], b: &[f64], m: usize) -> Option<Vec<f64>> {
    let max_diag = (0..m).map(|i| a[i * m + i]).fold(0.0f64, f64::max);
    let tol = f64::EPSILON * m as f64 * max_diag.max(f64::MIN_POSITIVE);

    // Lower-triangular factor, stored over `a`.
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if !(d > tol) {
            return None;
        }
        let l_jj = d.sqrt();
        a[j * m + j] = l_jj;
        for i in (j + 1)..m {
            let mut v = a[i * m + j];
            for k in 0..j {
                v -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = v / l_jj;
        }
    }

    // Forward then back substitution.
    let mut x = b.to_vec();
    for i in 0..m {
        for k in 0..i {
            x[i] -= a[i * m + k] * x[k];
        }
        x[i] /= a[i * m + i];
    }
    for i in (0..m).rev() {
        for k in (i + 1)..m {
            x[i] -= a[k * m + i] * x[k];
        }
        x[i] /= a[i * m + i];
    }
    Some(x)
}
