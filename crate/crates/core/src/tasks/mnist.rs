//! Handwritten-digit task: IDX ingestion, the 4-pixel reservoir encoding
//! through a simulated pattern table, and the logistic-readout pipeline.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{Device, DeviceParams, PulseProgram};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::readout::{accuracy, logistic_fit, LogisticReadout};
use crate::rng::SplitMix64;
use crate::scalar::Real;

pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;
pub const FEATURES_PER_IMAGE: usize = IMAGE_PIXELS / 4;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// In-memory digit set: `count` 28x28 images with one label byte each.
#[derive(Debug, Clone)]
pub struct MnistDataset {
    pub count: usize,
    images: Vec<u8>,
    pub labels: Vec<u8>,
}

impl MnistDataset {
    pub fn image(&self, i: usize) -> &[u8] {
        &self.images[i * IMAGE_PIXELS..(i + 1) * IMAGE_PIXELS]
    }

    pub fn from_parts(images: Vec<u8>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() * IMAGE_PIXELS {
            return Err(Error::CountMismatch {
                images: images.len() / IMAGE_PIXELS,
                labels: labels.len(),
            });
        }
        Ok(Self {
            count: labels.len(),
            images,
            labels,
        })
    }
}

struct IdxReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> IdxReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn read_u32(&mut self) -> Result<u32> {
        if self.pos + 4 > self.bytes.len() {
            return Err(Error::TruncatedFile {
                expected: self.pos + 4,
                actual: self.bytes.len(),
            });
        }
        let v = u32::from_be_bytes(self.bytes[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn read_payload(&mut self, expected: usize) -> Result<Vec<u8>> {
        let available = self.bytes.len() - self.pos;
        if available < expected {
            return Err(Error::TruncatedFile {
                expected: self.pos + expected,
                actual: self.bytes.len(),
            });
        }
        Ok(self.bytes[self.pos..self.pos + expected].to_vec())
    }
}

/// Parses big-endian IDX image/label files (magic 0x803 / 0x801).
pub fn load_mnist(images_path: &Path, labels_path: &Path) -> Result<MnistDataset> {
    let image_bytes = std::fs::read(images_path)?;
    let mut r = IdxReader::new(&image_bytes);
    let magic = r.read_u32()?;
    if magic != IMAGES_MAGIC {
        return Err(Error::BadMagic {
            expected: IMAGES_MAGIC,
            actual: magic,
        });
    }
    let count = r.read_u32()? as usize;
    let rows = r.read_u32()? as usize;
    let cols = r.read_u32()? as usize;
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(Error::InvalidParameter(format!(
            "expected 28x28 images, file reports {rows}x{cols}"
        )));
    }
    let images = r.read_payload(count * IMAGE_PIXELS)?;

    let label_bytes = std::fs::read(labels_path)?;
    let mut r = IdxReader::new(&label_bytes);
    let magic = r.read_u32()?;
    if magic != LABELS_MAGIC {
        return Err(Error::BadMagic {
            expected: LABELS_MAGIC,
            actual: magic,
        });
    }
    let label_count = r.read_u32()? as usize;
    let labels = r.read_payload(label_count)?;
    if label_count != count {
        return Err(Error::CountMismatch {
            images: count,
            labels: label_count,
        });
    }
    for (i, &l) in labels.iter().enumerate() {
        if l > 9 {
            return Err(Error::InvalidParameter(format!(
                "label {l} at index {i} outside 0..9"
            )));
        }
    }
    MnistDataset::from_parts(images, labels)
}

/// Pulse protocol of the image task: bits map to gate levels, the baseline
/// between pulses holds the bit-0 level, and the reservoir state is the
/// drain current one interval after the fourth pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Real"))]
pub struct MnistProtocol<T> {
    pub bit0_volts: T,
    pub bit1_volts: T,
    pub pulse_width_s: T,
    pub interval_s: T,
    pub v_drain: T,
    pub samples_per_step: usize,
}

impl<T: Real> Default for MnistProtocol<T> {
    fn default() -> Self {
        Self {
            bit0_volts: T::of(-0.5),
            bit1_volts: T::of(0.3),
            pulse_width_s: T::of(10e-3),
            interval_s: T::of(12.5e-3),
            v_drain: T::of(-0.5),
            samples_per_step: 45,
        }
    }
}

/// Normalized reservoir value for every 4-bit pulse pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternTable<T> {
    /// Indexed by the pattern bits, first pulse = most significant bit.
    pub values: Vec<T>,
    /// Offset current added before normalization, amperes.
    pub offset_amps: T,
}

/// Simulates all sixteen 4-pulse streams and normalizes the read currents:
/// the smallest whole-microampere offset makes every entry positive, then
/// pattern 1111 maps to exactly 1.
pub fn build_pattern_table<T: Real>(
    params: &DeviceParams<T>,
    protocol: &MnistProtocol<T>,
) -> Result<PatternTable<T>> {
    let period = protocol.pulse_width_s + protocol.interval_s;
    let duty = protocol.pulse_width_s / period;
    let raw: Vec<T> = (0..16usize)
        .into_par_iter()
        .map(|pattern| -> Result<T> {
            let values: Vec<T> = (0..4)
                .map(|i| {
                    if (pattern >> (3 - i)) & 1 == 1 {
                        protocol.bit1_volts
                    } else {
                        protocol.bit0_volts
                    }
                })
                .collect();
            let program = PulseProgram::new(values, period, duty, protocol.bit0_volts)?;
            let mut dev = Device::new(params.clone())?;
            dev.steady_state(protocol.bit0_volts, protocol.v_drain, T::of(1e-9))?;
            let trace =
                dev.run_trace(&program, protocol.v_drain, protocol.samples_per_step, false)?;
            // read point: one interval after the fourth pulse = end of trace
            Ok(*trace.i_drain.last().expect("non-empty trace"))
        })
        .collect::<Result<_>>()?;

    let min = raw.iter().copied().fold(T::infinity(), T::min);
    let micro = T::of(1e-6);
    let offset_amps = if min > T::zero() {
        T::zero()
    } else {
        ((-min / micro).floor() + T::one()) * micro
    };
    let reference = raw[15] + offset_amps;
    let values: Vec<T> = raw.iter().map(|&v| (v + offset_amps) / reference).collect();

    for a in 0..16 {
        for b in a + 1..16 {
            let diff = (values[a] - values[b]).abs();
            let scale = values[a].abs().max(values[b].abs()).max(T::of(1e-30));
            if diff / scale < T::of(1e-6) {
                return Err(Error::NonSeparatedPatterns { a, b });
            }
        }
    }
    Ok(PatternTable {
        values,
        offset_amps,
    })
}

/// Binarizes an image (>= threshold is 1) and maps each row-major group of
/// four pixels through the pattern table (first pixel of the group is the
/// most significant bit).
pub fn encode_image<T: Real>(image: &[u8], table: &PatternTable<T>, threshold: u8) -> Vec<T> {
    assert_eq!(image.len(), IMAGE_PIXELS, "expected a 28x28 image");
    image
        .chunks_exact(4)
        .map(|quad| {
            let mut pattern = 0usize;
            for &px in quad {
                pattern = (pattern << 1) | usize::from(px >= threshold);
            }
            table.values[pattern]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Real"))]
pub struct MnistConfig<T> {
    pub train_count: usize,
    pub test_count: usize,
    /// Accuracy is reported for each of these training-set sizes.
    pub curve_sizes: Vec<usize>,
    pub threshold: u8,
    pub learning_rate: T,
    pub epochs: usize,
    pub rng_seed: u64,
    pub device: DeviceParams<T>,
    pub protocol: MnistProtocol<T>,
}

impl<T: Real> Default for MnistConfig<T> {
    fn default() -> Self {
        // A long channel with a softer carrier floor keeps all sixteen
        // pattern currents well separated at the read point even after two
        // trailing write pulses.
        let mut device = DeviceParams::default();
        device.channel_length = T::of(1000e-6);
        device.hole_sheet_density_floor = device.hole_sheet_density_p0 / T::of(50.0);
        Self {
            train_count: 2000,
            test_count: 500,
            curve_sizes: vec![100, 500, 1000, 2000],
            threshold: 128,
            learning_rate: T::of(0.1),
            epochs: 20,
            rng_seed: 42,
            device,
            protocol: MnistProtocol::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub train_size: usize,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MnistReport<T> {
    pub config: MnistConfig<T>,
    pub seed: u64,
    pub pattern_table: PatternTable<T>,
    pub accuracy_curve: Vec<CurvePoint>,
    /// Accuracy at the full configured training size.
    pub test_accuracy: f64,
}

fn one_hot<T: Real>(labels: &[u8], classes: usize) -> Mat<T> {
    let mut m = Mat::zeros(labels.len(), classes);
    for (r, &l) in labels.iter().enumerate() {
        m[(r, l as usize)] = T::one();
    }
    m
}

/// Full image-recognition run: pattern table, encoding, logistic training
/// at each curve size, test accuracy.
pub fn run_mnist<T: Real>(
    train: &MnistDataset,
    test: &MnistDataset,
    cfg: &MnistConfig<T>,
) -> Result<MnistReport<T>> {
    if cfg.train_count > train.count {
        return Err(Error::InvalidParameter(format!(
            "train_count {} exceeds available {}",
            cfg.train_count, train.count
        )));
    }
    if cfg.test_count > test.count {
        return Err(Error::InvalidParameter(format!(
            "test_count {} exceeds available {}",
            cfg.test_count, test.count
        )));
    }
    let table = build_pattern_table(&cfg.device, &cfg.protocol)?;

    let encode_set = |set: &MnistDataset, count: usize| -> Mat<T> {
        let rows: Vec<Vec<T>> = (0..count)
            .into_par_iter()
            .map(|i| encode_image(set.image(i), &table, cfg.threshold))
            .collect();
        Mat::from_rows(&rows)
    };
    let x_train = encode_set(train, cfg.train_count);
    let x_test = encode_set(test, cfg.test_count);
    let y_train = one_hot::<T>(&train.labels[..cfg.train_count], 10);
    let truth: Vec<usize> = test.labels[..cfg.test_count]
        .iter()
        .map(|&l| l as usize)
        .collect();

    let mut sizes: Vec<usize> = cfg
        .curve_sizes
        .iter()
        .copied()
        .filter(|&s| s <= cfg.train_count)
        .collect();
    if !sizes.contains(&cfg.train_count) {
        sizes.push(cfg.train_count);
    }

    let mut accuracy_curve = Vec::with_capacity(sizes.len());
    let mut final_fit: Option<LogisticReadout<T>> = None;
    for &size in &sizes {
        let mut xs = Mat::zeros(size, x_train.cols());
        for r in 0..size {
            xs.row_mut(r).copy_from_slice(x_train.row(r));
        }
        let mut ys = Mat::zeros(size, 10);
        for r in 0..size {
            ys.row_mut(r).copy_from_slice(y_train.row(r));
        }
        let mut rng = SplitMix64::new(cfg.rng_seed);
        let fit = logistic_fit(&xs, &ys, cfg.learning_rate, cfg.epochs, &mut rng)?;
        let predictions = fit.classify(&x_test)?;
        accuracy_curve.push(CurvePoint {
            train_size: size,
            test_accuracy: accuracy(&predictions, &truth),
        });
        if size == cfg.train_count {
            final_fit = Some(fit);
        }
    }
    let final_fit = final_fit.expect("train_count is always in sizes");
    let predictions = final_fit.classify(&x_test)?;
    let test_accuracy = accuracy(&predictions, &truth);

    Ok(MnistReport {
        config: cfg.clone(),
        seed: cfg.rng_seed,
        pattern_table: table,
        accuracy_curve,
        test_accuracy,
    })
}
