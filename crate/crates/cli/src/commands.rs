//! Subcommand implementations.

use std::path::{Path, PathBuf};

use serde::Serialize;

use igr_core::device::{Device, PulseProgram};
use igr_core::lyapunov::return_map_csv;
use igr_core::readout::RidgeWeightsFile;
use igr_core::rng::SplitMix64;
use igr_core::tasks::chaos::{run_lyapunov, LyapunovRunConfig};
use igr_core::tasks::mnist::{load_mnist, run_mnist, MnistConfig};
use igr_core::tasks::{node_ablation, run_series_task, SeriesTaskConfig, TaskKind};

use crate::config::{self, PulseSpec, SimulateConfig, SweepConfig};
use crate::output::{waveform_csv, OutDir};
use crate::{CliError, CommonArgs};

fn resolve_seed(seed: &mut u64, args: &CommonArgs) {
    if let Some(s) = args.seed {
        *seed = s;
    }
}

pub fn simulate(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: SimulateConfig = config::load(&args.config)?;
    resolve_seed(&mut cfg.rng_seed, args);
    cfg.device.validate().map_err(CliError::config)?;

    let values = match &cfg.pulses {
        PulseSpec::Values(v) => v.clone(),
        PulseSpec::Random { count, low, high } => {
            if low.partial_cmp(high) != Some(std::cmp::Ordering::Less) {
                return Err(CliError::Config("pulse range empty".into()));
            }
            let mut rng = SplitMix64::new(cfg.rng_seed);
            (0..*count).map(|_| rng.uniform(*low, *high)).collect()
        }
    };
    let program = PulseProgram::new(
        values,
        cfg.period_s,
        cfg.duty_ratio,
        cfg.baseline_voltage,
    )
    .map_err(CliError::config)?;

    let mut device = Device::new(cfg.device.clone()).map_err(CliError::config)?;
    if cfg.steady_init {
        device
            .steady_state(cfg.baseline_voltage, cfg.v_drain, 1e-9)
            .map_err(CliError::runtime)?;
    }
    let trace = device
        .run_trace(&program, cfg.v_drain, cfg.samples_per_step, cfg.segment_profiles)
        .map_err(CliError::runtime)?;

    #[derive(Serialize)]
    struct SimulateReport<'a> {
        config: &'a SimulateConfig,
        seed: u64,
        samples: usize,
        gate_charge_coulombs: f64,
    }
    let out = OutDir::create(&args.out)?;
    out.write_json(
        "report.json",
        &SimulateReport {
            config: &cfg,
            seed: cfg.rng_seed,
            samples: trace.len(),
            gate_charge_coulombs: trace.gate_charge,
        },
    )?;
    out.write_text("trace.csv", &trace.to_csv())
}

pub fn series(args: &CommonArgs, task: TaskKind) -> Result<(), CliError> {
    let mut cfg: SeriesTaskConfig<f64> = config::load(&args.config)?;
    cfg.task = task;
    resolve_seed(&mut cfg.rng_seed, args);
    cfg.validate().map_err(CliError::config)?;

    let outcome = run_series_task(&cfg).map_err(CliError::runtime)?;
    let out = OutDir::create(&args.out)?;
    out.write_json("report.json", &outcome.report)?;
    out.write_text("states.csv", &outcome.states.to_csv())?;
    out.write_json(
        "weights.json",
        &RidgeWeightsFile {
            lambda: outcome.readout.lambda,
            weights: outcome.readout.weights.clone(),
            labels: outcome.report.node_labels.clone(),
        },
    )?;
    out.write_text(
        "waveform_train.csv",
        &waveform_csv(
            &outcome.report.targets_train,
            &outcome.report.predictions_train,
        ),
    )?;
    out.write_text(
        "waveform_test.csv",
        &waveform_csv(
            &outcome.report.targets_test,
            &outcome.report.predictions_test,
        ),
    )
}

pub fn sweep(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: SweepConfig = config::load(&args.config)?;
    resolve_seed(&mut cfg.base.rng_seed, args);
    cfg.base.validate().map_err(CliError::config)?;
    if cfg.periods_s.is_empty() || cfg.duty_ratios.is_empty() {
        return Err(CliError::Config("empty sweep grid".into()));
    }

    let report = igr_core::tasks::sweep(&cfg.base, &cfg.periods_s, &cfg.duty_ratios)
        .map_err(CliError::runtime)?;
    let out = OutDir::create(&args.out)?;
    out.write_json("report.json", &report)?;

    let mut csv = String::from("period_s,duty_ratio,nmse_test,error\n");
    for cell in &report.cells {
        csv.push_str(&format!(
            "{:.8e},{:.8e},{},{}\n",
            cell.period_s,
            cell.duty_ratio,
            cell.nmse_test
                .map_or(String::new(), |v| format!("{v:.8e}")),
            cell.error.as_deref().unwrap_or(""),
        ));
    }
    out.write_text("sweep.csv", &csv)
}

pub fn ablation(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: SeriesTaskConfig<f64> = config::load(&args.config)?;
    resolve_seed(&mut cfg.rng_seed, args);
    if cfg.inversion {
        return Err(CliError::Config(
            "node ablation uses physical nodes only; set inversion to false".into(),
        ));
    }
    cfg.validate().map_err(CliError::config)?;

    let report = node_ablation(&cfg).map_err(CliError::runtime)?;
    let out = OutDir::create(&args.out)?;
    out.write_json("report.json", &report)?;
    let mut csv = String::from("virtual_node,nmse_train,nmse_test\n");
    for n in &report.per_node {
        csv.push_str(&format!(
            "{},{:.8e},{:.8e}\n",
            n.virtual_node, n.nmse_train, n.nmse_test
        ));
    }
    out.write_text("ablation.csv", &csv)
}

pub fn mnist(args: &CommonArgs, flag_dir: Option<&Path>) -> Result<(), CliError> {
    let mut cfg: MnistConfig<f64> = config::load(&args.config)?;
    resolve_seed(&mut cfg.rng_seed, args);

    let dir: PathBuf = flag_dir
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("IGR_MNIST_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data/mnist"));
    let train = load_mnist(
        &dir.join("train-images-idx3-ubyte"),
        &dir.join("train-labels-idx1-ubyte"),
    )
    .map_err(|e| CliError::Config(format!("training set in {}: {e}", dir.display())))?;
    let test = load_mnist(
        &dir.join("t10k-images-idx3-ubyte"),
        &dir.join("t10k-labels-idx1-ubyte"),
    )
    .map_err(|e| CliError::Config(format!("test set in {}: {e}", dir.display())))?;

    let report = run_mnist(&train, &test, &cfg).map_err(CliError::runtime)?;
    let out = OutDir::create(&args.out)?;
    out.write_json("report.json", &report)
}

pub fn lyapunov(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg: LyapunovRunConfig<f64> = config::load(&args.config)?;
    resolve_seed(&mut cfg.rng_seed, args);

    let outcome = run_lyapunov(&cfg).map_err(CliError::runtime)?;
    let out = OutDir::create(&args.out)?;
    out.write_json("report.json", &outcome.report)?;
    out.write_text("states.csv", &outcome.states.to_csv())?;

    let mut input_csv = String::from("k,u\n");
    for (k, u) in outcome.input.iter().enumerate() {
        input_csv.push_str(&format!("{k},{u:.8e}\n"));
    }
    out.write_text("input.csv", &input_csv)?;

    // return maps of the first and last channel's edge and last on-phase
    // nodes, the usual diagnostic set
    let labels = &outcome.states.labels;
    let mut wanted: Vec<usize> = Vec::new();
    if let Some(first_ch) = labels.first().map(|l| l.channel_um) {
        let last_ch = labels.last().map(|l| l.channel_um).unwrap_or(first_ch);
        for (i, l) in labels.iter().enumerate() {
            let edge = l.virtual_index == 1;
            let last_on = l.virtual_index == cfg.virtual_nodes_on;
            if (l.channel_um == first_ch || l.channel_um == last_ch) && (edge || last_on) {
                wanted.push(i);
            }
        }
    }
    for i in wanted {
        let series = outcome.states.column(i);
        out.write_text(
            &format!("return_map_{}.csv", labels[i]),
            &return_map_csv(&series),
        )?;
    }
    Ok(())
}
