//! Ion-gating reservoir simulator.
//!
//! A desk-scale model of an electric-double-layer transistor as a
//! state-dependent RC transmission line, plus the reservoir-computing
//! pipeline built on it: pulse encoding, virtual-node extraction, ridge and
//! logistic readouts, benchmark tasks, and Lyapunov-spectrum analysis.
//!
//! All numerics are generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the CLI
//! and the test suites use.

// Validation intentionally writes `!(x > 0)` instead of `x <= 0`: the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod device;
pub mod readout;
pub mod reservoir;
pub mod error;
pub mod linalg;
pub mod lyapunov;
pub mod rng;
pub mod scalar;
pub mod tasks;

pub use error::{Error, Result};
pub use rng::SplitMix64;
pub use scalar::Real;

/// Double-precision aliases for the main domain types.
pub type DeviceParams = device::DeviceParams<f64>;
pub type Device = device::Device<f64>;
pub type TerminalCurrents = device::TerminalCurrents<f64>;
pub type PulseProgram = device::PulseProgram<f64>;
pub type TriangularWave = device::TriangularWave<f64>;
pub type TraceSeries = device::TraceSeries<f64>;
pub type NodeSpec = reservoir::NodeSpec<f64>;
pub type StateMatrix = reservoir::StateMatrix<f64>;
pub type Normalizer = reservoir::Normalizer<f64>;
pub type RidgeReadout = readout::RidgeReadout<f64>;
pub type LogisticReadout = readout::LogisticReadout<f64>;
pub type SeriesTaskConfig = tasks::SeriesTaskConfig<f64>;
pub type MnistConfig = tasks::mnist::MnistConfig<f64>;
pub type LyapunovRunConfig = tasks::chaos::LyapunovRunConfig<f64>;
pub type EmbeddingConfig = lyapunov::EmbeddingConfig<f64>;
pub type LyapunovSpectrum = lyapunov::LyapunovSpectrum<f64>;
