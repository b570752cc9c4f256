//! Reservoir state construction.
//!
//! Input sequences become gate programs; traces from one device per channel
//! length become per-step virtual-node samples; the samples from all sources
//! are assembled into the reservoir state matrix and normalized to the
//! training range.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::device::{PulseProgram, TraceSeries};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Placement of time-multiplexed samples within each pulse period.
///
/// Node 1 sits `first_sample_offset` after the rising edge (by default one
/// trace sample period, the discrete analogue of "at the spike peak"), the
/// remaining on-phase nodes are equally spaced to the end of the on-phase;
/// the off-phase repeats the pattern after the falling edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Real"))]
pub struct NodeSpec<T> {
    pub virtual_nodes_on: usize,
    pub virtual_nodes_off: usize,
    /// Delay of nodes 1 and `virtual_nodes_on + 1` after their edge, in
    /// seconds. `None` means one trace sample period.
    pub first_sample_offset: Option<T>,
}

impl<T: Real> Default for NodeSpec<T> {
    fn default() -> Self {
        Self {
            virtual_nodes_on: 5,
            virtual_nodes_off: 5,
            first_sample_offset: None,
        }
    }
}

impl<T: Real> NodeSpec<T> {
    pub fn total(&self) -> usize {
        self.virtual_nodes_on + self.virtual_nodes_off
    }

    pub fn validate(&self) -> Result<()> {
        if self.total() < 1 {
            return Err(Error::InvalidParameter(
                "at least one virtual node required".into(),
            ));
        }
        Ok(())
    }

    /// Per-source layout for inversion mode: half the nodes per source,
    /// split across the phases proportionally to the configured counts
    /// (ties go to the on-phase), so the total reservoir size is unchanged
    /// when every physical node contributes two streams.
    pub fn halved(&self) -> Result<Self> {
        let total = self.total();
        if !total.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "inversion mode needs an even virtual-node total".into(),
            ));
        }
        let half = total / 2;
        let mut on = ((half * self.virtual_nodes_on) as f64 / total as f64).round() as usize;
        if self.virtual_nodes_on > 0 {
            on = on.max(1);
        }
        if self.virtual_nodes_off > 0 {
            on = on.min(half - 1);
        }
        Ok(Self {
            virtual_nodes_on: on,
            virtual_nodes_off: half - on,
            first_sample_offset: self.first_sample_offset,
        })
    }
}

/// Converts an input sequence in `[0, u_max]` into a gate pulse program with
/// `step_values[k] = u(k) * volts_per_unit` and a 0 V baseline.
pub fn encode_input<T: Real>(
    u: &[T],
    u_max: T,
    period: T,
    duty_ratio: T,
    volts_per_unit: T,
) -> Result<PulseProgram<T>> {
    for (k, &v) in u.iter().enumerate() {
        if !(v >= T::zero() && v <= u_max) || !v.is_finite() {
            return Err(Error::OutOfRange(format!(
                "u({k}) = {v} outside [0, {u_max}]"
            )));
        }
    }
    PulseProgram::new(
        u.iter().map(|&v| v * volts_per_unit).collect(),
        period,
        duty_ratio,
        T::zero(),
    )
}

/// Inversion-pulse stream: `u_inv(k) = 0.5 - u(k)`.
pub fn invert_input<T: Real>(u: &[T]) -> Result<Vec<T>> {
    let half = T::of(0.5);
    for (k, &v) in u.iter().enumerate() {
        if !(v >= T::zero() && v <= half) {
            return Err(Error::OutOfRange(format!(
                "u({k}) = {v} outside [0, 0.5]"
            )));
        }
    }
    Ok(u.iter().map(|&v| half - v).collect())
}

/// Sample indices (within one program step) of every virtual node.
fn node_sample_indices<T: Real>(
    trace: &TraceSeries<T>,
    program: &PulseProgram<T>,
    spec: &NodeSpec<T>,
) -> Result<Vec<usize>> {
    spec.validate()?;
    let samples = trace.samples_per_step;
    let delta = trace.sample_period;
    let offset = spec.first_sample_offset.unwrap_or(delta);
    let w_on = program.pulse_width();
    let w_off = program.interval_width();
    if spec.virtual_nodes_on > 0 && !(offset < w_on) {
        return Err(Error::InvalidParameter(
            "first_sample_offset must be smaller than the pulse width".into(),
        ));
    }
    if spec.virtual_nodes_off > 0 && !(offset < w_off) {
        return Err(Error::InvalidParameter(
            "first_sample_offset must be smaller than the interval width".into(),
        ));
    }

    let mut times = Vec::with_capacity(spec.total());
    for j in 0..spec.virtual_nodes_on {
        let frac = T::of_usize(j) / T::of_usize(spec.virtual_nodes_on);
        times.push(offset + (w_on - offset) * frac);
    }
    for j in 0..spec.virtual_nodes_off {
        let frac = T::of_usize(j) / T::of_usize(spec.virtual_nodes_off);
        times.push(w_on + offset + (w_off - offset) * frac);
    }

    let mut indices = Vec::with_capacity(times.len());
    for t in times {
        let s = (t / delta).round().to_f64().unwrap() as isize - 1;
        indices.push(s.clamp(0, samples as isize - 1) as usize);
    }
    for a in 0..indices.len() {
        for b in a + 1..indices.len() {
            if indices[a] == indices[b] {
                return Err(Error::InsufficientResolution { a: a + 1, b: b + 1 });
            }
        }
    }
    Ok(indices)
}

/// Extracts the per-step virtual-node values (drain current at the node
/// times) from a trace: one row per program step.
pub fn extract_virtual_nodes<T: Real>(
    trace: &TraceSeries<T>,
    program: &PulseProgram<T>,
    spec: &NodeSpec<T>,
) -> Result<Vec<Vec<T>>> {
    let steps = program.num_steps();
    let samples = trace.samples_per_step;
    if trace.len() != steps * samples {
        return Err(Error::TraceMismatch {
            expected: steps * samples,
            actual: trace.len(),
        });
    }
    let indices = node_sample_indices(trace, program, spec)?;
    Ok((0..steps)
        .map(|k| {
            indices
                .iter()
                .map(|&s| trace.i_drain[k * samples + s])
                .collect()
        })
        .collect())
}

/// One reservoir column's provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeLabel {
    pub channel_um: u32,
    pub on_phase: bool,
    /// 1-based index across the step (on-phase nodes first).
    pub virtual_index: usize,
    pub inverted: bool,
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ch{}_{}_v{}{}",
            self.channel_um,
            if self.on_phase { "on" } else { "off" },
            self.virtual_index,
            if self.inverted { "_inv" } else { "" }
        )
    }
}

/// Virtual-node rows contributed by one source (one device, one stream).
#[derive(Debug, Clone)]
pub struct SourceStates<T> {
    pub channel_um: u32,
    pub inverted: bool,
    pub virtual_nodes_on: usize,
    pub rows: Vec<Vec<T>>,
}

/// The reservoir state matrix: rows are discrete steps, columns are
/// physical x virtual nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix<T> {
    pub values: Mat<T>,
    pub labels: Vec<NodeLabel>,
}

/// Assembles per-source rows into one matrix, columns ordered by
/// (channel ascending, virtual node ascending, non-inverted first).
pub fn assemble_states<T: Real>(sources: &[SourceStates<T>]) -> Result<StateMatrix<T>> {
    if sources.is_empty() {
        return Err(Error::InvalidParameter("no sources to assemble".into()));
    }
    let steps = sources[0].rows.len();
    for s in sources {
        if s.rows.len() != steps {
            return Err(Error::TraceMismatch {
                expected: steps,
                actual: s.rows.len(),
            });
        }
    }

    struct Column {
        label: NodeLabel,
        source: usize,
        offset: usize,
    }
    let mut columns = Vec::new();
    for (si, s) in sources.iter().enumerate() {
        for v in 0..s.rows.first().map_or(0, Vec::len) {
            columns.push(Column {
                label: NodeLabel {
                    channel_um: s.channel_um,
                    on_phase: v < s.virtual_nodes_on,
                    virtual_index: v + 1,
                    inverted: s.inverted,
                },
                source: si,
                offset: v,
            });
        }
    }
    columns.sort_by_key(|c| (c.label.channel_um, c.label.virtual_index, c.label.inverted));

    let mut values = Mat::zeros(steps, columns.len());
    for (ci, col) in columns.iter().enumerate() {
        for k in 0..steps {
            values[(k, ci)] = sources[col.source].rows[k][col.offset];
        }
    }
    Ok(StateMatrix {
        values,
        labels: columns.into_iter().map(|c| c.label).collect(),
    })
}

impl<T: Real> StateMatrix<T> {
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows()).map(|r| self.values[(r, c)]).collect()
    }

    /// CSV export with one header row of node labels.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.labels.iter().map(NodeLabel::to_string).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in 0..self.rows() {
            let row: Vec<String> = self
                .values
                .row(r)
                .iter()
                .map(|v| format!("{:.8e}", v.to_f64().unwrap()))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Column-affine map to `[0, 1]` fitted on training rows and applied
/// unchanged everywhere (test rows may leave the unit interval).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer<T> {
    pub min: Vec<T>,
    pub max: Vec<T>,
}

impl<T: Real> Normalizer<T> {
    /// Captures per-column min/max over rows `train.start..train.end`.
    pub fn fit(matrix: &Mat<T>, train: std::ops::Range<usize>) -> Result<Self> {
        if train.is_empty() || train.end > matrix.rows() {
            return Err(Error::InvalidParameter(
                "training row range empty or out of bounds".into(),
            ));
        }
        let cols = matrix.cols();
        let mut min = vec![T::infinity(); cols];
        let mut max = vec![T::neg_infinity(); cols];
        for r in train {
            for c in 0..cols {
                let v = matrix[(r, c)];
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
        for c in 0..cols {
            if !(max[c] > min[c]) {
                return Err(Error::DegenerateColumn { column: c });
            }
        }
        Ok(Self { min, max })
    }

    pub fn apply(&self, matrix: &Mat<T>) -> Result<Mat<T>> {
        if matrix.cols() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                actual: matrix.cols(),
            });
        }
        let mut out = matrix.clone();
        for r in 0..out.rows() {
            for c in 0..out.cols() {
                out[(r, c)] = (out[(r, c)] - self.min[c]) / (self.max[c] - self.min[c]);
            }
        }
        Ok(out)
    }
}
