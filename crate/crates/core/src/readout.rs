//! Trained readouts: closed-form ridge regression for the time-series tasks
//! and a logistic classifier trained by full-batch gradient descent for the
//! image task, plus the evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, Mat};
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// Linear readout `y = w0 + sum_i w_i X_i` from the ridge solution
/// `W = Y X^T (X X^T + lambda I)^-1` with the bias carried as the constant
/// feature `X_0 = 1` (and therefore included in the penalty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeReadout<T> {
    /// `weights[0]` is the bias.
    pub weights: Vec<T>,
    pub lambda: T,
}

pub const DEFAULT_RIDGE_LAMBDA: f64 = 5e-4;

/// Fits the ridge readout on `x` (rows = steps, columns = features) against
/// `y_target`.
pub fn ridge_fit<T: Real>(x: &Mat<T>, y_target: &[T], lambda: T) -> Result<RidgeReadout<T>> {
    if x.rows() != y_target.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y_target.len(),
        });
    }
    if lambda < T::zero() {
        return Err(Error::InvalidParameter("lambda must be >= 0".into()));
    }
    let n = x.cols() + 1; // bias feature prepended
    let mut normal = Mat::zeros(n, n);
    let mut rhs = vec![T::zero(); n];
    for (r, &target) in y_target.iter().enumerate() {
        let row = x.row(r);
        // accumulate [1, row] x [1, row]^T
        normal[(0, 0)] += T::one();
        for i in 0..x.cols() {
            normal[(0, i + 1)] += row[i];
            for j in i..x.cols() {
                normal[(i + 1, j + 1)] += row[i] * row[j];
            }
        }
        rhs[0] += target;
        for i in 0..x.cols() {
            rhs[i + 1] += row[i] * target;
        }
    }
    for i in 0..n {
        normal[(i, i)] += lambda;
        for j in 0..i {
            normal[(i, j)] = normal[(j, i)];
        }
    }
    let weights = cholesky_solve(&normal, &rhs).map_err(|_| Error::SingularNormalMatrix)?;
    Ok(RidgeReadout { weights, lambda })
}

impl<T: Real> RidgeReadout<T> {
    pub fn predict(&self, x: &Mat<T>) -> Result<Vec<T>> {
        if x.cols() + 1 != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len() - 1,
                actual: x.cols(),
            });
        }
        Ok((0..x.rows())
            .map(|r| {
                x.row(r)
                    .iter()
                    .zip(&self.weights[1..])
                    .fold(self.weights[0], |acc, (&v, &w)| acc + v * w)
            })
            .collect())
    }

    /// Ridge cost `J = 1/2 sum (y_t - y)^2 + lambda/2 sum w_i^2` of this
    /// readout on the given data (the bias weight is penalized too).
    pub fn cost(&self, x: &Mat<T>, y_target: &[T]) -> Result<T> {
        let pred = self.predict(x)?;
        let half = T::of(0.5);
        let residual: T = pred
            .iter()
            .zip(y_target)
            .map(|(&p, &t)| (t - p) * (t - p))
            .sum();
        let penalty: T = self.weights.iter().map(|&w| w * w).sum();
        Ok(half * residual + half * self.lambda * penalty)
    }
}

/// Normalized mean squared error with the population variance of the target
/// over the same window (so the constant mean predictor scores exactly 1).
pub fn nmse<T: Real>(y_target: &[T], y_pred: &[T]) -> Result<T> {
    if y_target.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_target.len(),
            actual: y_pred.len(),
        });
    }
    if y_target.len() < 2 {
        return Err(Error::InvalidParameter(
            "nmse needs at least two samples".into(),
        ));
    }
    let n = T::of_usize(y_target.len());
    let mean = y_target.iter().copied().sum::<T>() / n;
    let variance = y_target
        .iter()
        .map(|&y| (y - mean) * (y - mean))
        .sum::<T>()
        / n;
    if !(variance > T::zero()) {
        return Err(Error::ZeroVarianceTarget);
    }
    let mse = y_target
        .iter()
        .zip(y_pred)
        .map(|(&t, &p)| (t - p) * (t - p))
        .sum::<T>()
        / n;
    Ok(mse / variance)
}

/// Prediction error `sum (y_t - y)^2 / sum y_t^2`.
pub fn prediction_error<T: Real>(y_target: &[T], y_pred: &[T]) -> Result<T> {
    if y_target.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_target.len(),
            actual: y_pred.len(),
        });
    }
    let norm: T = y_target.iter().map(|&y| y * y).sum();
    if !(norm > T::zero()) {
        return Err(Error::ZeroNormTarget);
    }
    let sse: T = y_target
        .iter()
        .zip(y_pred)
        .map(|(&t, &p)| (t - p) * (t - p))
        .sum();
    Ok(sse / norm)
}

/// Logistic classifier `h(x) = g(W x)`, one output per class, trained by
/// full-batch gradient descent on the squared error
/// `E = 1/2 sum_i (y_i - h(x_i))^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticReadout<T> {
    /// classes x features.
    pub weights: Mat<T>,
}

pub fn logistic<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

impl<T: Real> LogisticReadout<T> {
    /// Seeded uniform init in [-0.01, 0.01].
    pub fn init(classes: usize, features: usize, rng: &mut SplitMix64) -> Self {
        let mut weights = Mat::zeros(classes, features);
        let b = T::of(0.01);
        for c in 0..classes {
            for f in 0..features {
                weights[(c, f)] = rng.uniform(-b, b);
            }
        }
        Self { weights }
    }

    /// Class activations `g(W x)` for every row of `x`: rows x classes.
    pub fn activations(&self, x: &Mat<T>) -> Result<Mat<T>> {
        if x.cols() != self.weights.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.cols(),
                actual: x.cols(),
            });
        }
        let classes = self.weights.rows();
        let mut out = Mat::zeros(x.rows(), classes);
        for r in 0..x.rows() {
            let row = x.row(r);
            for c in 0..classes {
                let z = self
                    .weights
                    .row(c)
                    .iter()
                    .zip(row)
                    .fold(T::zero(), |acc, (&w, &v)| acc + w * v);
                out[(r, c)] = logistic(z);
            }
        }
        Ok(out)
    }

    /// Squared error over the set.
    pub fn squared_error(&self, x: &Mat<T>, one_hot: &Mat<T>) -> Result<T> {
        let h = self.activations(x)?;
        let half = T::of(0.5);
        let mut e = T::zero();
        for r in 0..x.rows() {
            for c in 0..one_hot.cols() {
                let d = one_hot[(r, c)] - h[(r, c)];
                e += d * d;
            }
        }
        Ok(half * e)
    }

    /// Gradient of the squared error with respect to the weights.
    pub fn gradient(&self, x: &Mat<T>, one_hot: &Mat<T>) -> Result<Mat<T>> {
        let h = self.activations(x)?;
        let classes = self.weights.rows();
        let mut grad = Mat::zeros(classes, self.weights.cols());
        for r in 0..x.rows() {
            let row = x.row(r);
            for c in 0..classes {
                let hv = h[(r, c)];
                let delta = (hv - one_hot[(r, c)]) * hv * (T::one() - hv);
                let grow = grad.row_mut(c);
                for (g, &v) in grow.iter_mut().zip(row) {
                    *g += delta * v;
                }
            }
        }
        Ok(grad)
    }

    /// Predicted class per row: argmax over the logistic outputs, ties
    /// broken toward the lowest class index.
    pub fn classify(&self, x: &Mat<T>) -> Result<Vec<usize>> {
        let h = self.activations(x)?;
        Ok((0..h.rows())
            .map(|r| {
                let row = h.row(r);
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }
}

/// Trains the logistic readout for `epochs` passes over the set, applying
/// `W -= alpha dE_i/dW` per sample in row order from the seeded init.
///
/// Updates are per sample rather than one summed batch step: at learning
/// rates around 0.1 the summed gradient of a few thousand rows drives the
/// sigmoids straight into saturation, where training stalls.
pub fn logistic_fit<T: Real>(
    x: &Mat<T>,
    one_hot: &Mat<T>,
    alpha: T,
    epochs: usize,
    rng: &mut SplitMix64,
) -> Result<LogisticReadout<T>> {
    if x.rows() != one_hot.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: one_hot.rows(),
        });
    }
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter("alpha must be > 0".into()));
    }
    for r in 0..one_hot.rows() {
        let row = one_hot.row(r);
        let ones = row.iter().filter(|&&v| v == T::one()).count();
        let zeros = row.iter().filter(|&&v| v == T::zero()).count();
        if ones != 1 || zeros != row.len() - 1 {
            return Err(Error::InvalidParameter(format!(
                "labels row {r} is not one-hot"
            )));
        }
    }
    let classes = one_hot.cols();
    let mut readout = LogisticReadout::init(classes, x.cols(), rng);
    for _ in 0..epochs {
        for r in 0..x.rows() {
            let row = x.row(r);
            for c in 0..classes {
                let z = readout
                    .weights
                    .row(c)
                    .iter()
                    .zip(row)
                    .fold(T::zero(), |acc, (&w, &v)| acc + w * v);
                let h = logistic(z);
                let delta = (h - one_hot[(r, c)]) * h * (T::one() - h);
                let wrow = readout.weights.row_mut(c);
                for (w, &v) in wrow.iter_mut().zip(row) {
                    *w -= alpha * delta * v;
                }
            }
        }
    }
    if !readout.weights.is_finite() {
        return Err(Error::NonFinite("logistic weights after training"));
    }
    Ok(readout)
}

/// Fraction of rows classified correctly.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    if predicted.is_empty() {
        return 0.0;
    }
    let hits = predicted
        .iter()
        .zip(truth)
        .filter(|(p, t)| p == t)
        .count();
    hits as f64 / predicted.len() as f64
}

/// Serialization schema for trained ridge weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RidgeWeightsFile<T> {
    pub lambda: T,
    pub weights: Vec<T>,
    /// Column labels for provenance; `weights[0]` is the bias and has no label.
    pub labels: Vec<String>,
}

#[cfg(test)]
mod tests;
