//! Gate-voltage waveforms driving the device.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A pulse-train gate program: one pulse per discrete input step.
///
/// Each period starts with the on-phase (`duty_ratio` of the period) at the
/// step's value, followed by the off-phase at `baseline_voltage`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Real"))]
pub struct PulseProgram<T> {
    pub step_values: Vec<T>,
    pub period: T,
    pub duty_ratio: T,
    pub baseline_voltage: T,
}

impl<T: Real> PulseProgram<T> {
    pub fn new(step_values: Vec<T>, period: T, duty_ratio: T, baseline_voltage: T) -> Result<Self> {
        let p = Self {
            step_values,
            period,
            duty_ratio,
            baseline_voltage,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > T::zero()) {
            return Err(Error::InvalidParameter("pulse period must be > 0".into()));
        }
        if !(self.duty_ratio > T::zero() && self.duty_ratio <= T::one()) {
            return Err(Error::InvalidParameter(
                "duty ratio must lie in (0, 1]".into(),
            ));
        }
        if self.step_values.is_empty() {
            return Err(Error::InvalidParameter("program has no steps".into()));
        }
        Ok(())
    }

    pub fn num_steps(&self) -> usize {
        self.step_values.len()
    }

    pub fn pulse_width(&self) -> T {
        self.period * self.duty_ratio
    }

    pub fn interval_width(&self) -> T {
        self.period - self.pulse_width()
    }

    pub fn duration(&self) -> T {
        self.period * T::of_usize(self.num_steps())
    }

    /// Gate voltage at phase time `tau` (seconds into step `k`).
    #[inline]
    pub fn value_at(&self, step: usize, tau: T) -> T {
        if tau < self.pulse_width() {
            self.step_values[step]
        } else {
            self.baseline_voltage
        }
    }

    /// Gate voltage at absolute time `t` in `[0, duration)`.
    pub fn sample(&self, t: T) -> Result<T> {
        if !(t >= T::zero()) || t >= self.duration() {
            return Err(Error::OutOfRange(format!(
                "t = {t} outside program duration"
            )));
        }
        let k = (t / self.period).floor();
        let step = (k.to_f64().unwrap() as usize).min(self.num_steps() - 1);
        Ok(self.value_at(step, t - k * self.period))
    }
}

/// Symmetric triangular gate waveform between 0 and `amplitude`.
///
/// One period contains two identical teeth: the waveform rises from 0 to the
/// peak at `period/4`, returns to 0 at `period/2`, and repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangularWave<T> {
    pub amplitude: T,
    pub period: T,
    pub cycles: usize,
}

impl<T: Real> TriangularWave<T> {
    pub fn new(amplitude: T, period: T, cycles: usize) -> Result<Self> {
        if amplitude == T::zero() {
            return Err(Error::InvalidParameter("amplitude must be nonzero".into()));
        }
        if !(period > T::zero()) {
            return Err(Error::InvalidParameter("period must be > 0".into()));
        }
        if cycles < 1 {
            return Err(Error::InvalidParameter("cycles must be >= 1".into()));
        }
        Ok(Self {
            amplitude,
            period,
            cycles,
        })
    }

    pub fn duration(&self) -> T {
        self.period * T::of_usize(self.cycles)
    }

    /// Waveform value at time `t` in `[0, duration)`.
    pub fn sample(&self, t: T) -> Result<T> {
        if !(t >= T::zero()) || t >= self.duration() {
            return Err(Error::OutOfRange(format!(
                "t = {t} outside waveform duration"
            )));
        }
        Ok(self.shape(t))
    }

    /// Periodic extension of the waveform (no range check).
    pub fn shape(&self, t: T) -> T {
        let half = self.period / T::of(2.0);
        let s = (t / half).fract();
        let two = T::of(2.0);
        self.amplitude * (T::one() - (two * s - T::one()).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_phases() {
        // period 20 ms, duty 0.5, first step 0.4 V, baseline 0 V
        let p = PulseProgram::new(vec![0.4, 0.2], 20e-3, 0.5, 0.0).unwrap();
        assert_eq!(p.sample(5e-3).unwrap(), 0.4); // inside on-phase
        assert_eq!(p.sample(15e-3).unwrap(), 0.0); // inside off-phase
        assert_eq!(p.sample(25e-3).unwrap(), 0.2); // second step on-phase
        assert!(p.sample(40e-3).is_err());
        assert!(p.sample(-1e-3).is_err());
    }

    #[test]
    fn mnist_interval_holds_negative_baseline() {
        // width 10 ms, interval 12.5 ms, baseline -0.5 V
        let period = 22.5e-3;
        let duty = 10.0 / 22.5;
        let p = PulseProgram::new(vec![0.3; 4], period, duty, -0.5).unwrap();
        assert_eq!(p.sample(11e-3).unwrap(), -0.5);
        assert_eq!(p.sample(period + 5e-3).unwrap(), 0.3);
    }

    #[test]
    fn rejects_bad_programs() {
        assert!(PulseProgram::new(vec![0.1], 0.0, 0.5, 0.0).is_err());
        assert!(PulseProgram::new(vec![0.1], 1.0, 0.0, 0.0).is_err());
        assert!(PulseProgram::new(vec![0.1], 1.0, 1.5, 0.0).is_err());
        assert!(PulseProgram::<f64>::new(vec![], 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn triangle_peak_and_zero() {
        let w = TriangularWave::<f64>::new(1.0, 4.0, 2).unwrap();
        assert!((w.sample(1.0).unwrap() - 1.0).abs() < 1e-15); // apex
        assert!(w.sample(2.0).unwrap().abs() < 1e-15);
        assert!(w.sample(8.0).is_err());
    }

    #[test]
    fn triangle_area_over_one_period() {
        let w = TriangularWave::<f64>::new(1.0, 4.0, 1).unwrap();
        let n = 400_000;
        let dt = w.period / n as f64;
        let integral: f64 = (0..n).map(|i| w.shape(i as f64 * dt) * dt).sum();
        let expected = w.amplitude * w.period / 2.0;
        assert!((integral - expected).abs() < 1e-4 * expected);
    }

    #[test]
    fn triangle_rejects_bad_params() {
        assert!(TriangularWave::new(0.0, 1.0, 1).is_err());
        assert!(TriangularWave::new(1.0, 1.0, 0).is_err());
        assert!(TriangularWave::new(1.0, -1.0, 3).is_err());
    }
}
