//! Benchmark target generators.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scalar::Real;

/// `count` i.i.d. uniform draws from `[low, high)`.
pub fn gen_input<T: Real>(count: usize, low: T, high: T, seed: u64) -> Result<Vec<T>> {
    if !(low < high) {
        return Err(Error::InvalidParameter("input range empty".into()));
    }
    let mut rng = SplitMix64::new(seed);
    Ok((0..count).map(|_| rng.uniform(low, high)).collect())
}

fn check_bounded<T: Real>(y: T, index: usize) -> Result<T> {
    if !(y >= T::zero() && y < T::one()) || !y.is_finite() {
        return Err(Error::DivergentTarget { index });
    }
    Ok(y)
}

/// NARMA2 targets: `y(k+1) = 0.4 y(k) + 0.4 y(k) y(k-1) + 0.6 u^3(k) + 0.1`
/// with zero initial history. Element `k` of the output is `y(k+1)`, the
/// value to predict after input `u(k)` has been seen.
pub fn narma2<T: Real>(u: &[T]) -> Result<Vec<T>> {
    let half = T::of(0.5);
    for (k, &v) in u.iter().enumerate() {
        if !(v >= T::zero() && v <= half) {
            return Err(Error::OutOfRange(format!(
                "u({k}) = {v} outside [0, 0.5]"
            )));
        }
    }
    let (a, b, c, d) = (T::of(0.4), T::of(0.4), T::of(0.6), T::of(0.1));
    let mut out = Vec::with_capacity(u.len());
    let (mut prev, mut prev2) = (T::zero(), T::zero()); // y(k), y(k-1)
    for (k, &uk) in u.iter().enumerate() {
        let y = a * prev + b * prev * prev2 + c * uk * uk * uk + d;
        out.push(check_bounded(y, k)?);
        prev2 = prev;
        prev = y;
    }
    Ok(out)
}

/// Second-order nonlinear dynamic targets:
/// `y(k) = 0.4 y(k-1) + 0.4 y(k-1) y(k-2) + 0.6 u^3(k) + 0.1` with zero
/// initial history, emitted for `k = 1..len(u)-1` (element `k-1` of the
/// output is `y(k)`). The same recurrence as NARMA2 re-indexed, so on the
/// same input this equals `narma2(&u[1..])`.
pub fn second_order<T: Real>(u: &[T]) -> Result<Vec<T>> {
    if u.len() < 2 {
        return Err(Error::InvalidParameter(
            "second_order needs at least two inputs".into(),
        ));
    }
    narma2(&u[1..])
}
