//! Benchmark tasks built on the simulated reservoir.

pub mod chaos;
pub mod mnist;
pub mod narma;
pub mod series;

pub use chaos::{run_lyapunov, LyapunovRunConfig, LyapunovRunReport};
pub use narma::{gen_input, narma2, second_order};
pub use series::{
    node_ablation, prepare_series, run_series_task, sweep, AblationReport, SeriesOutcome,
    SeriesReport, SeriesTaskConfig, SweepReport, TaskKind, DEFAULT_CHANNELS_UM,
};
