//! Config file loading. Unknown keys are rejected so typos fail fast.

use std::path::Path;

use serde::{Deserialize, Serialize};

use igr_core::device::DeviceParams;

use crate::CliError;

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// The pulse sequence of a `simulate` run: either explicit gate voltages or
/// seeded uniform draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PulseSpec {
    Values(Vec<f64>),
    Random { count: usize, low: f64, high: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub device: DeviceParams<f64>,
    pub period_s: f64,
    pub duty_ratio: f64,
    pub baseline_voltage: f64,
    pub v_drain: f64,
    pub samples_per_step: usize,
    /// Export per-segment hole densities alongside the currents.
    pub segment_profiles: bool,
    /// Relax to the bias operating point before the program starts.
    pub steady_init: bool,
    pub pulses: PulseSpec,
    pub rng_seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            device: DeviceParams::default(),
            period_s: 50e-3,
            duty_ratio: 0.75,
            baseline_voltage: 0.0,
            v_drain: -0.5,
            samples_per_step: 100,
            segment_profiles: false,
            steady_init: true,
            pulses: PulseSpec::Random {
                count: 20,
                low: 0.0,
                high: 0.5,
            },
            rng_seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub base: igr_core::tasks::SeriesTaskConfig<f64>,
    #[serde(default = "default_periods")]
    pub periods_s: Vec<f64>,
    #[serde(default = "default_duties")]
    pub duty_ratios: Vec<f64>,
}

fn default_periods() -> Vec<f64> {
    vec![10e-3, 20e-3, 50e-3, 100e-3]
}

fn default_duties() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 0.9]
}
