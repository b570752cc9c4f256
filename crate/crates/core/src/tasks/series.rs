//! End-to-end time-series experiments: drive all physical nodes with the
//! (optionally inverted) pulse-encoded input, assemble and normalize the
//! reservoir state matrix, ridge-fit and evaluate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{Device, DeviceParams};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::readout::{nmse, prediction_error, ridge_fit, RidgeReadout};
use crate::reservoir::{
    assemble_states, encode_input, extract_virtual_nodes, invert_input, NodeSpec, Normalizer,
    SourceStates, StateMatrix,
};
use crate::scalar::Real;
use crate::tasks::narma::{gen_input, narma2, second_order};

pub const DEFAULT_CHANNELS_UM: [u32; 8] = [20, 50, 70, 100, 200, 500, 700, 1000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Narma2,
    SecondOrder,
}

/// Configuration of one time-series experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Real"))]
pub struct SeriesTaskConfig<T> {
    pub task: TaskKind,
    pub train_length: usize,
    pub test_length: usize,
    /// Leading steps excluded from both splits.
    pub washout: usize,
    pub input_low: T,
    pub input_high: T,
    pub rng_seed: u64,
    pub period_s: T,
    pub duty_ratio: T,
    pub volts_per_unit: T,
    /// Method 2: add an inverted input stream per channel, halving the
    /// virtual nodes per source so the reservoir size is unchanged.
    pub inversion: bool,
    pub v_drain: T,
    pub channel_lengths_um: Vec<u32>,
    pub samples_per_step: usize,
    pub virtual_nodes_on: usize,
    pub virtual_nodes_off: usize,
    pub ridge_lambda: T,
    /// Device template; `channel_length` is overridden per channel and
    /// `timestep` is set to `period_s / 1000` for every run.
    pub device: DeviceParams<T>,
    pub steady_init_tol: T,
}

impl<T: Real> Default for SeriesTaskConfig<T> {
    fn default() -> Self {
        Self {
            task: TaskKind::Narma2,
            train_length: 450,
            test_length: 150,
            washout: 0,
            input_low: T::zero(),
            input_high: T::of(0.5),
            rng_seed: 42,
            period_s: T::of(50e-3),
            duty_ratio: T::of(0.75),
            volts_per_unit: T::one(),
            inversion: false,
            v_drain: T::of(-0.5),
            channel_lengths_um: DEFAULT_CHANNELS_UM.to_vec(),
            samples_per_step: 100,
            virtual_nodes_on: 5,
            virtual_nodes_off: 5,
            ridge_lambda: T::of(crate::readout::DEFAULT_RIDGE_LAMBDA),
            device: DeviceParams::default(),
            steady_init_tol: T::of(1e-9),
        }
    }
}

impl<T: Real> SeriesTaskConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.train_length == 0 || self.test_length == 0 {
            return Err(Error::InvalidParameter(
                "train_length and test_length must be > 0".into(),
            ));
        }
        if !(self.input_low < self.input_high) {
            return Err(Error::InvalidParameter(
                "input_low must be below input_high".into(),
            ));
        }
        if self.channel_lengths_um.is_empty() {
            return Err(Error::InvalidParameter("no channel lengths".into()));
        }
        self.node_spec().validate()?;
        Ok(())
    }

    pub fn node_spec(&self) -> NodeSpec<T> {
        NodeSpec {
            virtual_nodes_on: self.virtual_nodes_on,
            virtual_nodes_off: self.virtual_nodes_off,
            first_sample_offset: None,
        }
    }

    fn device_for_channel(&self, channel_um: u32) -> DeviceParams<T> {
        let mut p = self.device.clone();
        p.channel_length = T::of(channel_um as f64 * 1e-6);
        p.timestep = self.period_s / T::of(1000.0);
        p
    }
}

/// Reservoir states plus aligned targets, ready for fitting.
pub struct PreparedSeries<T> {
    /// Normalized state matrix over all program steps.
    pub states: StateMatrix<T>,
    pub normalizer: Normalizer<T>,
    /// First row of the training split (washout + 1).
    pub first_row: usize,
    /// Targets aligned to rows `first_row..first_row + targets.len()`.
    pub targets: Vec<T>,
    /// Newest input seen by each of those rows (memoryless baseline feature).
    pub inputs: Vec<T>,
}

impl<T: Real> PreparedSeries<T> {
    fn slice(&self, offset: usize, len: usize, columns: Option<&[usize]>) -> (Mat<T>, Vec<T>) {
        let cols: Vec<usize> = match columns {
            Some(c) => c.to_vec(),
            None => (0..self.states.cols()).collect(),
        };
        let mut x = Mat::zeros(len, cols.len());
        for r in 0..len {
            for (ci, &c) in cols.iter().enumerate() {
                x[(r, ci)] = self.states.values[(self.first_row + offset + r, c)];
            }
        }
        let y = self.targets[offset..offset + len].to_vec();
        (x, y)
    }

    pub fn train(&self, cfg: &SeriesTaskConfig<T>, columns: Option<&[usize]>) -> (Mat<T>, Vec<T>) {
        self.slice(0, cfg.train_length, columns)
    }

    pub fn test(&self, cfg: &SeriesTaskConfig<T>, columns: Option<&[usize]>) -> (Mat<T>, Vec<T>) {
        self.slice(cfg.train_length, cfg.test_length, columns)
    }
}

/// Simulates every source and assembles the normalized state matrix with
/// aligned targets.
pub fn prepare_series<T: Real>(cfg: &SeriesTaskConfig<T>) -> Result<PreparedSeries<T>> {
    cfg.validate()?;
    let rows_needed = cfg.train_length + cfg.test_length;
    let input_len = cfg.washout + rows_needed + 1;
    let u = gen_input(input_len, cfg.input_low, cfg.input_high, cfg.rng_seed)?;

    let targets_full = match cfg.task {
        TaskKind::Narma2 => narma2(&u)?, // element k is y(k+1)
        TaskKind::SecondOrder => second_order(&u)?, // element k-1 is y(k)
    };
    let first_row = cfg.washout + 1;
    let targets: Vec<T> = (0..rows_needed)
        .map(|i| {
            let row = first_row + i;
            match cfg.task {
                TaskKind::Narma2 => targets_full[row],
                TaskKind::SecondOrder => targets_full[row - 1],
            }
        })
        .collect();
    let inputs: Vec<T> = (0..rows_needed).map(|i| u[first_row + i]).collect();

    let program = encode_input(
        &u,
        cfg.input_high,
        cfg.period_s,
        cfg.duty_ratio,
        cfg.volts_per_unit,
    )?;
    let mut streams = vec![(program, false)];
    if cfg.inversion {
        let u_inv = invert_input(&u)?;
        streams.push((
            encode_input(
                &u_inv,
                cfg.input_high,
                cfg.period_s,
                cfg.duty_ratio,
                cfg.volts_per_unit,
            )?,
            true,
        ));
    }
    let spec = if cfg.inversion {
        cfg.node_spec().halved()?
    } else {
        cfg.node_spec()
    };

    let jobs: Vec<(u32, usize)> = cfg
        .channel_lengths_um
        .iter()
        .flat_map(|&ch| (0..streams.len()).map(move |s| (ch, s)))
        .collect();
    let sources: Vec<SourceStates<T>> = jobs
        .par_iter()
        .map(|&(channel_um, stream)| -> Result<SourceStates<T>> {
            let (program, inverted) = &streams[stream];
            let mut dev = Device::new(cfg.device_for_channel(channel_um))?;
            dev.steady_state(T::zero(), cfg.v_drain, cfg.steady_init_tol)?;
            let trace = dev.run_trace(program, cfg.v_drain, cfg.samples_per_step, false)?;
            let rows = extract_virtual_nodes(&trace, program, &spec)?;
            Ok(SourceStates {
                channel_um,
                inverted: *inverted,
                virtual_nodes_on: spec.virtual_nodes_on,
                rows,
            })
        })
        .collect::<Result<_>>()?;

    let assembled = assemble_states(&sources)?;
    let normalizer = Normalizer::fit(
        &assembled.values,
        first_row..first_row + cfg.train_length,
    )?;
    let values = normalizer.apply(&assembled.values)?;
    Ok(PreparedSeries {
        states: StateMatrix {
            values,
            labels: assembled.labels,
        },
        normalizer,
        first_row,
        targets,
        inputs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitMetrics<T> {
    pub nmse: T,
    pub prediction_error: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport<T> {
    pub config: SeriesTaskConfig<T>,
    pub seed: u64,
    pub reservoir_size: usize,
    pub train: SplitMetrics<T>,
    pub test: SplitMetrics<T>,
    /// Ridge on `[u, u^2, u^3]` only: what a memoryless readout achieves.
    pub baseline_train: SplitMetrics<T>,
    pub baseline_test: SplitMetrics<T>,
    pub targets_train: Vec<T>,
    pub predictions_train: Vec<T>,
    pub targets_test: Vec<T>,
    pub predictions_test: Vec<T>,
    pub node_labels: Vec<String>,
}

pub struct SeriesOutcome<T> {
    pub report: SeriesReport<T>,
    pub states: StateMatrix<T>,
    pub readout: RidgeReadout<T>,
}

fn metrics<T: Real>(targets: &[T], predictions: &[T]) -> Result<SplitMetrics<T>> {
    Ok(SplitMetrics {
        nmse: nmse(targets, predictions)?,
        prediction_error: prediction_error(targets, predictions)?,
    })
}

/// Memoryless polynomial features of the newest input.
fn baseline_features<T: Real>(inputs: &[T]) -> Mat<T> {
    Mat::from_rows(
        &inputs
            .iter()
            .map(|&v| vec![v, v * v, v * v * v])
            .collect::<Vec<_>>(),
    )
}

pub fn run_series_task<T: Real>(cfg: &SeriesTaskConfig<T>) -> Result<SeriesOutcome<T>> {
    let prepared = prepare_series(cfg)?;
    let (x_train, y_train) = prepared.train(cfg, None);
    let (x_test, y_test) = prepared.test(cfg, None);

    let readout = ridge_fit(&x_train, &y_train, cfg.ridge_lambda)?;
    let pred_train = readout.predict(&x_train)?;
    let pred_test = readout.predict(&x_test)?;

    let ub_train = baseline_features(&prepared.inputs[..cfg.train_length]);
    let ub_test = baseline_features(&prepared.inputs[cfg.train_length..]);
    let baseline = ridge_fit(&ub_train, &y_train, cfg.ridge_lambda)?;
    let bl_train = baseline.predict(&ub_train)?;
    let bl_test = baseline.predict(&ub_test)?;

    let report = SeriesReport {
        config: cfg.clone(),
        seed: cfg.rng_seed,
        reservoir_size: prepared.states.cols(),
        train: metrics(&y_train, &pred_train)?,
        test: metrics(&y_test, &pred_test)?,
        baseline_train: metrics(&y_train, &bl_train)?,
        baseline_test: metrics(&y_test, &bl_test)?,
        targets_train: y_train,
        predictions_train: pred_train,
        targets_test: y_test,
        predictions_test: pred_test,
        node_labels: prepared.states.labels.iter().map(ToString::to_string).collect(),
    };
    Ok(SeriesOutcome {
        report,
        states: prepared.states,
        readout,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell<T> {
    pub period_s: T,
    pub duty_ratio: T,
    pub nmse_test: Option<T>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport<T> {
    pub base_config: SeriesTaskConfig<T>,
    pub cells: Vec<SweepCell<T>>,
    /// Index of the cell with the lowest test NMSE.
    pub best_cell: Option<usize>,
}

/// Runs the task over an operating-condition grid. Per-cell failures are
/// recorded in place, not fatal.
pub fn sweep<T: Real>(
    cfg: &SeriesTaskConfig<T>,
    periods_s: &[T],
    duty_ratios: &[T],
) -> Result<SweepReport<T>> {
    if periods_s.is_empty() || duty_ratios.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    let grid: Vec<(T, T)> = periods_s
        .iter()
        .flat_map(|&p| duty_ratios.iter().map(move |&d| (p, d)))
        .collect();
    let cells: Vec<SweepCell<T>> = grid
        .par_iter()
        .map(|&(period_s, duty_ratio)| {
            let mut cell_cfg = cfg.clone();
            cell_cfg.period_s = period_s;
            cell_cfg.duty_ratio = duty_ratio;
            match run_series_task(&cell_cfg) {
                Ok(outcome) => SweepCell {
                    period_s,
                    duty_ratio,
                    nmse_test: Some(outcome.report.test.nmse),
                    error: None,
                },
                Err(e) => SweepCell {
                    period_s,
                    duty_ratio,
                    nmse_test: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let best_cell = cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.nmse_test.map(|n| (i, n)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(i, _)| i);
    Ok(SweepReport {
        base_config: cfg.clone(),
        cells,
        best_cell,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeAblation<T> {
    pub virtual_node: usize,
    pub nmse_train: T,
    pub nmse_test: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationReport<T> {
    pub config: SeriesTaskConfig<T>,
    pub per_node: Vec<NodeAblation<T>>,
    pub all_nodes_nmse_train: T,
    pub all_nodes_nmse_test: T,
}

/// Per-virtual-node readout quality: for each node index, ridge-fit using
/// only that node's column from every channel (physical nodes only, no
/// inversion).
pub fn node_ablation<T: Real>(cfg: &SeriesTaskConfig<T>) -> Result<AblationReport<T>> {
    if cfg.inversion {
        return Err(Error::InvalidParameter(
            "node ablation uses physical nodes without inversion".into(),
        ));
    }
    let prepared = prepare_series(cfg)?;
    let (x_train, y_train) = prepared.train(cfg, None);
    let (x_test, y_test) = prepared.test(cfg, None);
    let all = ridge_fit(&x_train, &y_train, cfg.ridge_lambda)?;
    let all_train = nmse(&y_train, &all.predict(&x_train)?)?;
    let all_test = nmse(&y_test, &all.predict(&x_test)?)?;

    let total_nodes = cfg.virtual_nodes_on + cfg.virtual_nodes_off;
    let mut per_node = Vec::with_capacity(total_nodes);
    for v in 1..=total_nodes {
        let columns: Vec<usize> = prepared
            .states
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.virtual_index == v)
            .map(|(i, _)| i)
            .collect();
        let (x_train, y_train) = prepared.train(cfg, Some(&columns));
        let (x_test, y_test) = prepared.test(cfg, Some(&columns));
        let fit = ridge_fit(&x_train, &y_train, cfg.ridge_lambda)?;
        per_node.push(NodeAblation {
            virtual_node: v,
            nmse_train: nmse(&y_train, &fit.predict(&x_train)?)?,
            nmse_test: nmse(&y_test, &fit.predict(&x_test)?)?,
        });
    }
    Ok(AblationReport {
        config: cfg.clone(),
        per_node,
        all_nodes_nmse_train: all_train,
        all_nodes_nmse_test: all_test,
    })
}
