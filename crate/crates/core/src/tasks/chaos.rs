//! Edge-of-chaos diagnosis of the simulated reservoir: drive the channels
//! with a pulse train whose amplitudes trace a triangular wave, collect the
//! on-phase virtual nodes of every channel plus the input as a phase-space
//! trajectory, and estimate its Lyapunov spectrum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{Device, DeviceParams, TriangularWave};
use crate::error::Result;
use crate::lyapunov::{embed, spectrum, EmbeddingConfig, LyapunovSpectrum};
use crate::reservoir::{
    assemble_states, encode_input, extract_virtual_nodes, NodeSpec, Normalizer, SourceStates,
    StateMatrix,
};
use crate::scalar::Real;
use crate::tasks::series::DEFAULT_CHANNELS_UM;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Real"))]
pub struct LyapunovRunConfig<T> {
    /// Number of pulse steps in the drive.
    pub steps: usize,
    /// Peak of the triangular amplitude envelope, volts.
    pub amplitude: T,
    /// Envelope period in units of pulse steps; a non-integer value makes
    /// the drive quasi-periodic so the trajectory fills a tube instead of
    /// retracing one loop.
    pub triangle_period_steps: T,
    pub period_s: T,
    pub duty_ratio: T,
    pub v_drain: T,
    pub samples_per_step: usize,
    pub channel_lengths_um: Vec<u32>,
    /// On-phase virtual nodes per channel (no off-phase nodes here).
    pub virtual_nodes_on: usize,
    /// Append the input sequence as the last trajectory coordinate.
    pub include_input: bool,
    pub rng_seed: u64,
    pub device: DeviceParams<T>,
    pub embedding: EmbeddingConfig<T>,
}

impl<T: Real> Default for LyapunovRunConfig<T> {
    fn default() -> Self {
        Self {
            steps: 1500,
            amplitude: T::of(0.5),
            triangle_period_steps: T::of(23.7),
            period_s: T::of(50e-3),
            duty_ratio: T::of(0.75),
            v_drain: T::of(-0.5),
            samples_per_step: 50,
            channel_lengths_um: DEFAULT_CHANNELS_UM.to_vec(),
            virtual_nodes_on: 5,
            include_input: true,
            rng_seed: 42,
            device: DeviceParams::default(),
            embedding: EmbeddingConfig::default(),
        }
    }
}

impl<T: Real> LyapunovRunConfig<T> {
    /// The drive amplitudes u(k): a triangular envelope sampled per step.
    pub fn input_sequence(&self) -> Result<Vec<T>> {
        let wave = TriangularWave::new(self.amplitude, self.triangle_period_steps, 1)?;
        Ok((0..self.steps)
            .map(|k| wave.shape(T::of_usize(k)))
            .collect())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovRunReport<T> {
    pub config: LyapunovRunConfig<T>,
    pub seed: u64,
    pub trajectory_dimension: usize,
    pub spectrum: LyapunovSpectrum<T>,
}

pub struct LyapunovRunOutcome<T> {
    pub report: LyapunovRunReport<T>,
    /// Normalized reservoir states (the trajectory without the input column).
    pub states: StateMatrix<T>,
    pub input: Vec<T>,
}

pub fn run_lyapunov<T: Real>(cfg: &LyapunovRunConfig<T>) -> Result<LyapunovRunOutcome<T>> {
    let u = cfg.input_sequence()?;
    let program = encode_input(&u, cfg.amplitude, cfg.period_s, cfg.duty_ratio, T::one())?;
    let spec = NodeSpec {
        virtual_nodes_on: cfg.virtual_nodes_on,
        virtual_nodes_off: 0,
        first_sample_offset: None,
    };

    let sources: Vec<SourceStates<T>> = cfg
        .channel_lengths_um
        .par_iter()
        .map(|&channel_um| -> Result<SourceStates<T>> {
            let mut params = cfg.device.clone();
            params.channel_length = T::of(channel_um as f64 * 1e-6);
            params.timestep = cfg.period_s / T::of(1000.0);
            let mut dev = Device::new(params)?;
            dev.steady_state(T::zero(), cfg.v_drain, T::of(1e-9))?;
            let trace = dev.run_trace(&program, cfg.v_drain, cfg.samples_per_step, false)?;
            Ok(SourceStates {
                channel_um,
                inverted: false,
                virtual_nodes_on: spec.virtual_nodes_on,
                rows: extract_virtual_nodes(&trace, &program, &spec)?,
            })
        })
        .collect::<Result<_>>()?;

    let assembled = assemble_states(&sources)?;
    let normalizer = Normalizer::fit(&assembled.values, 0..assembled.values.rows())?;
    let values = normalizer.apply(&assembled.values)?;
    let states = StateMatrix {
        values,
        labels: assembled.labels,
    };

    let trajectory = embed(&states.values, cfg.include_input.then_some(u.as_slice()))?;
    let lyapunov = spectrum(&trajectory, &cfg.embedding)?;
    Ok(LyapunovRunOutcome {
        report: LyapunovRunReport {
            config: cfg.clone(),
            seed: cfg.rng_seed,
            trajectory_dimension: trajectory.dimension(),
            spectrum: lyapunov,
        },
        states,
        input: u,
    })
}
