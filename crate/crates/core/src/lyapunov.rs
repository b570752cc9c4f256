//! Lyapunov-spectrum estimation from time series by the Jacobi-matrix
//! method: local linear maps are fitted over epsilon-neighborhoods of each
//! trajectory point and their products are accumulated through repeated QR
//! re-orthonormalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve_multi, qr, Mat};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Real"))]
pub struct EmbeddingConfig<T> {
    /// Evolution stride `s` between a point and its image.
    pub evolution_steps: usize,
    /// Neighbors required per fit; `None` means twice the dimension.
    pub neighbor_count: Option<usize>,
    /// Initial neighborhood radius as a fraction of the attractor diameter.
    pub epsilon_frac: T,
    /// Radius growth factor applied when too few neighbors are found.
    pub epsilon_growth: T,
    /// Upper radius bound as a fraction of the attractor diameter.
    pub max_epsilon_frac: T,
}

impl<T: Real> Default for EmbeddingConfig<T> {
    fn default() -> Self {
        Self {
            evolution_steps: 1,
            neighbor_count: None,
            epsilon_frac: T::of(0.05),
            epsilon_growth: T::of(1.5),
            max_epsilon_frac: T::of(0.5),
        }
    }
}

impl<T: Real> EmbeddingConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.evolution_steps < 1 {
            return Err(Error::InvalidParameter("evolution_steps must be >= 1".into()));
        }
        if !(self.epsilon_frac > T::zero() && self.epsilon_growth > T::one()) {
            return Err(Error::InvalidParameter(
                "epsilon_frac must be > 0 and epsilon_growth > 1".into(),
            ));
        }
        if !(self.max_epsilon_frac >= self.epsilon_frac) {
            return Err(Error::InvalidParameter(
                "max_epsilon_frac must be >= epsilon_frac".into(),
            ));
        }
        Ok(())
    }

    fn neighbors_needed(&self, dimension: usize) -> usize {
        self.neighbor_count.unwrap_or(2 * dimension).max(dimension)
    }
}

/// A sequence of m-dimensional state points.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    points: Mat<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dimension(&self) -> usize {
        self.points.cols()
    }

    pub fn point(&self, t: usize) -> &[T] {
        self.points.row(t)
    }

    /// Bounding-box diagonal of the point cloud.
    pub fn diameter(&self) -> T {
        let m = self.dimension();
        let mut lo = vec![T::infinity(); m];
        let mut hi = vec![T::neg_infinity(); m];
        for t in 0..self.len() {
            for (d, &v) in self.point(t).iter().enumerate() {
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
        lo.iter()
            .zip(&hi)
            .map(|(&l, &h)| (h - l) * (h - l))
            .sum::<T>()
            .sqrt()
    }
}

/// Builds the trajectory from reservoir states (one point per row), with the
/// input sequence appended as the last coordinate when provided.
pub fn embed<T: Real>(states: &Mat<T>, input: Option<&[T]>) -> Result<Trajectory<T>> {
    if !states.is_finite() {
        return Err(Error::NonFinite("reservoir states"));
    }
    let points = match input {
        None => states.clone(),
        Some(u) => {
            if u.len() != states.rows() {
                return Err(Error::DimensionMismatch {
                    expected: states.rows(),
                    actual: u.len(),
                });
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("input sequence"));
            }
            let mut m = Mat::zeros(states.rows(), states.cols() + 1);
            for r in 0..states.rows() {
                m.row_mut(r)[..states.cols()].copy_from_slice(states.row(r));
                m[(r, states.cols())] = u[r];
            }
            m
        }
    };
    Ok(Trajectory { points })
}

fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// Indices of all points inside the epsilon-sphere around `v(t)` (excluding
/// `t` itself and points whose image leaves the trajectory), growing the
/// radius until enough neighbors are found or the bound is hit.
pub fn neighbors<T: Real>(
    traj: &Trajectory<T>,
    t: usize,
    config: &EmbeddingConfig<T>,
    diameter: T,
) -> Result<Vec<usize>> {
    config.validate()?;
    let s = config.evolution_steps;
    let needed = config.neighbors_needed(traj.dimension());
    let center = traj.point(t);
    let candidates: Vec<(usize, T)> = (0..traj.len().saturating_sub(s))
        .filter(|&k| k != t)
        .map(|k| (k, distance(traj.point(k), center)))
        .collect();

    let mut eps = config.epsilon_frac * diameter;
    let max_eps = config.max_epsilon_frac * diameter;
    loop {
        let found: Vec<usize> = candidates
            .iter()
            .filter(|(_, d)| *d <= eps)
            .map(|(k, _)| *k)
            .collect();
        if found.len() >= needed {
            return Ok(found);
        }
        let next = eps * config.epsilon_growth;
        if eps >= max_eps {
            return Err(Error::InsufficientNeighbors {
                t,
                found: found.len(),
                needed,
            });
        }
        eps = next.min(max_eps);
    }
}

/// Least-squares local linear map from displacement pairs:
/// `J = (sum z u^T)(sum u u^T + rho I)^-1` with a small Tikhonov term to
/// survive degenerate neighbor clouds.
pub fn estimate_jacobian<T: Real>(pairs: &[(&[T], &[T])], dimension: usize) -> Result<Mat<T>> {
    if pairs.len() < dimension {
        return Err(Error::InvalidParameter(format!(
            "need at least {dimension} displacement pairs, got {}",
            pairs.len()
        )));
    }
    let m = dimension;
    let mut cov = Mat::zeros(m, m);
    let mut cross = Mat::zeros(m, m);
    for (mu, z) in pairs {
        for i in 0..m {
            for j in 0..m {
                cov[(i, j)] += mu[i] * mu[j];
                cross[(i, j)] += z[i] * mu[j];
            }
        }
    }
    let trace: T = (0..m).map(|i| cov[(i, i)]).sum();
    let rho = T::of(1e-10) * trace / T::of_usize(m);
    for i in 0..m {
        cov[(i, i)] += rho;
    }
    // J cov = cross  =>  cov J^T = cross^T (cov symmetric)
    let jt = cholesky_solve_multi(&cov, &cross.transpose())
        .map_err(|_| Error::SingularCovariance)?;
    Ok(jt.transpose())
}

/// Ordered Lyapunov exponents in natural-log units per discrete step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum<T> {
    /// Sorted descending.
    pub exponents: Vec<T>,
    pub iterations_used: usize,
    pub skipped_steps: usize,
    pub mean_neighbor_count: f64,
}

/// Jacobi-matrix spectrum: estimate the local Jacobian along the orbit,
/// propagate an orthonormal frame through `J(t) Q_t = Q_{t+1} R_{t+1}`, and
/// average the log diagonal stretches. Steps with too few neighbors are
/// skipped and excluded from the average.
pub fn spectrum<T: Real>(
    traj: &Trajectory<T>,
    config: &EmbeddingConfig<T>,
) -> Result<LyapunovSpectrum<T>> {
    config.validate()?;
    let m = traj.dimension();
    let required = 10 * m;
    if traj.len() < required {
        return Err(Error::InvalidParameter(format!(
            "trajectory of {} points is too short for dimension {m}",
            traj.len()
        )));
    }
    let s = config.evolution_steps;
    let diameter = traj.diameter();
    if !(diameter > T::zero()) {
        return Err(Error::InvalidParameter(
            "degenerate trajectory: zero diameter".into(),
        ));
    }

    let mut q = Mat::identity(m);
    let mut sums = vec![T::zero(); m];
    let mut iterations = 0usize;
    let mut skipped = 0usize;
    let mut neighbor_total = 0usize;

    let mut t = 0;
    while t + s < traj.len() {
        let found = match neighbors(traj, t, config, diameter) {
            Ok(found) => found,
            Err(Error::InsufficientNeighbors { .. }) => {
                skipped += 1;
                t += s;
                continue;
            }
            Err(e) => return Err(e),
        };
        let center = traj.point(t);
        let image = traj.point(t + s);
        let pairs: Vec<(Vec<T>, Vec<T>)> = found
            .iter()
            .map(|&k| {
                let mu = traj
                    .point(k)
                    .iter()
                    .zip(center)
                    .map(|(&a, &b)| a - b)
                    .collect();
                let z = traj
                    .point(k + s)
                    .iter()
                    .zip(image)
                    .map(|(&a, &b)| a - b)
                    .collect();
                (mu, z)
            })
            .collect();
        let pair_refs: Vec<(&[T], &[T])> = pairs
            .iter()
            .map(|(mu, z)| (mu.as_slice(), z.as_slice()))
            .collect();
        let jac = estimate_jacobian(&pair_refs, m)?;

        let (q_next, r) = qr(&jac.mul(&q));
        #[cfg(debug_assertions)]
        {
            let qtq = q_next.transpose().mul(&q_next);
            debug_assert!(
                qtq.max_abs_diff(&Mat::identity(m)) < T::of(1e-10),
                "Q lost orthonormality"
            );
        }
        for (i, sum) in sums.iter_mut().enumerate() {
            *sum += r[(i, i)].abs().ln();
        }
        q = q_next;
        iterations += 1;
        neighbor_total += found.len();
        t += s;
    }

    if iterations < required {
        return Err(Error::TooFewValidIterations {
            valid: iterations,
            required,
        });
    }
    let denom = T::of_usize(iterations * s);
    let mut exponents: Vec<T> = sums.into_iter().map(|sum| sum / denom).collect();
    exponents.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(LyapunovSpectrum {
        exponents,
        iterations_used: iterations,
        skipped_steps: skipped,
        mean_neighbor_count: neighbor_total as f64 / iterations as f64,
    })
}

/// Pairs `(x(k), x(k+1))` of one node series, for return-map export.
pub fn return_map<T: Real>(series: &[T]) -> Vec<(T, T)> {
    series.windows(2).map(|w| (w[0], w[1])).collect()
}

/// CSV export of a return map: `x_k,x_k1`.
pub fn return_map_csv<T: Real>(series: &[T]) -> String {
    let mut out = String::from("x_k,x_k1\n");
    for (a, b) in return_map(series) {
        out.push_str(&format!(
            "{:.8e},{:.8e}\n",
            a.to_f64().unwrap(),
            b.to_f64().unwrap()
        ));
    }
    out
}

#[cfg(test)]
mod tests;
