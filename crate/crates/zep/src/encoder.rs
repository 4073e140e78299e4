//! Zero-crossing epoch encoding of normalized projections.
//!
//! A projection is first centered on its mean and scaled into a symmetric
//! range; every maximal run of same-sign samples between zero-crossings
//! then becomes an *epoch* described by three parameters:
//!
//! * `duration` — number of samples in the run,
//! * `amplitude` — the signed sample of largest magnitude,
//! * `shape` — the number of modes (local magnitude peaks) in the run.
//!
//! Normalized epoch triples from the four window profiles (gray-level
//! horizontal/vertical, edge horizontal/vertical), truncated or zero-padded
//! to a fixed epoch count, concatenate into the fixed-width feature vector
//! consumed by the discriminator.

use crate::error::{Error, Result};
use crate::projections::Projection;

/// Symmetric range the normalization maps into.
pub const NORM_MIN: f64 = -128.0;
pub const NORM_MAX: f64 = 127.0;

/// One zero-crossing interval of an encoded signal.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Epoch {
    /// Samples in the run. Always >= 1.
    pub duration: usize,
    /// Signed maximal deviation from zero; first occurrence wins ties.
    pub amplitude: f64,
    /// Local magnitude peaks in the run. Always >= 1: the amplitude sample
    /// itself is a peak against its differing neighbours (run boundaries
    /// count as zero-valued neighbours, plateaus count once at their first
    /// sample).
    pub shape: usize,
}

/// Third epoch parameter emitted into the feature vector.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ShapeParam {
    /// Mode count, capped and divided by `shape_cap`.
    #[default]
    ExtremeCount,
    /// Spread between the strongest and weakest mode magnitude, scaled by
    /// the normalization range. Keeps the triple layout unchanged.
    ModeRange,
}

/// Which projections are concatenated into the feature.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ProjectionSet {
    /// Gray-level and edge profiles, both orientations (four signals).
    #[default]
    Both,
    /// Gray-level profiles only.
    IntegralOnly,
    /// Edge profiles only.
    EdgeOnly,
}

impl ProjectionSet {
    pub fn count(self) -> usize {
        match self {
            ProjectionSet::Both => 4,
            ProjectionSet::IntegralOnly | ProjectionSet::EdgeOnly => 2,
        }
    }
}

/// Encoder configuration. Defaults give the preferred 60-element feature:
/// five epochs per projection, three parameters each, four projections.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct EncoderParams {
    /// Epochs kept per projection; extra epochs are dropped, missing ones
    /// zero-filled.
    pub max_epochs: usize,
    /// Cap applied to the mode count before dividing it into (0, 1].
    pub shape_cap: usize,
    pub shape_param: ShapeParam,
    pub projection_set: ProjectionSet,
}

impl Default for EncoderParams {
    fn default() -> Self {
        Self {
            max_epochs: 5,
            shape_cap: 7,
            shape_param: ShapeParam::ExtremeCount,
            projection_set: ProjectionSet::Both,
        }
    }
}

impl EncoderParams {
    /// Total feature length under this configuration.
    pub fn feature_len(&self) -> usize {
        self.projection_set.count() * self.max_epochs * 3
    }
}

/// A projection mapped into the symmetric [-128, 127] range around zero.
#[derive(Clone, PartialEq, Debug)]
pub struct NormalizedProjection {
    values: Vec<f64>,
}

impl NormalizedProjection {
    /// Wraps pre-normalized samples. Used by signal-level entry points and
    /// test fixtures; values must already lie in [-128, 127].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values
            .iter()
            .any(|v| !v.is_finite() || *v < NORM_MIN || *v > NORM_MAX)
        {
            return Err(Error::InvalidInput(
                "normalized samples must be finite and within [-128, 127]".to_string(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Mean-centers a projection and scales it by `127 / max-deviation` into
/// [-127, 127]; a constant projection maps to all zeros.
///
/// The computation runs on the projection's exact integer sums: with
/// element sums `S_j`, count `n` and divisor `N`, the centered deviation is
/// `(n * S_j - sum(S)) / (n * N)`, and the scale cancels the common
/// denominator. Adding a constant to every underlying pixel leaves the
/// integer numerators untouched, so the output is bit-identical under
/// uniform brightness shifts.
pub fn normalize_projection(p: &Projection) -> Result<NormalizedProjection> {
    if p.is_empty() {
        return Err(Error::EmptyProjection);
    }
    let n = p.len() as i128;
    let total: i128 = p.sums().iter().map(|&s| s as i128).sum();
    let numerators: Vec<i128> = p.sums().iter().map(|&s| n * s as i128 - total).collect();
    let max_abs = numerators.iter().map(|d| d.unsigned_abs()).max().unwrap();
    if max_abs == 0 {
        return Ok(NormalizedProjection {
            values: vec![0.0; p.len()],
        });
    }
    let scale = max_abs as f64;
    let values = numerators
        .iter()
        .map(|&d| 127.0 * d as f64 / scale)
        .collect();
    Ok(NormalizedProjection { values })
}

/// Mean-centers and scales a raw sample sequence the same way; for signals
/// that do not come with integer sums.
pub fn normalize_signal(samples: &[f64]) -> Result<NormalizedProjection> {
    if samples.is_empty() {
        return Err(Error::EmptyProjection);
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("signal contains non-finite samples".into()));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let max_dev = samples
        .iter()
        .map(|v| (v - mean).abs())
        .fold(0.0f64, f64::max);
    if max_dev == 0.0 {
        return Ok(NormalizedProjection {
            values: vec![0.0; samples.len()],
        });
    }
    let values = samples.iter().map(|v| 127.0 * (v - mean) / max_dev).collect();
    Ok(NormalizedProjection { values })
}

/// Epoch plus the magnitudes of its individual modes, in signal order.
#[derive(Clone, PartialEq, Debug)]
pub(crate) struct EpochDetail {
    pub epoch: Epoch,
    pub mode_peaks: Vec<f64>,
}

/// Splits a zero-centered signal into its epochs, left to right.
///
/// Exact zeros terminate the current run and belong to no epoch.
pub fn extract_epochs(p: &NormalizedProjection) -> Vec<Epoch> {
    extract_epochs_counted(p.values()).0
}

/// Single-pass extraction that also reports how many samples were visited;
/// the count equals the signal length.
pub fn extract_epochs_counted(values: &[f64]) -> (Vec<Epoch>, usize) {
    let (details, visited) = extract_epoch_details(values);
    (details.into_iter().map(|d| d.epoch).collect(), visited)
}

pub(crate) fn extract_epoch_details(values: &[f64]) -> (Vec<EpochDetail>, usize) {
    #[derive(Clone, Copy, PartialEq)]
    enum Slope {
        Rising,
        Falling,
    }

    struct Run {
        positive: bool,
        duration: usize,
        amplitude: f64,
        // Mode detection on sample magnitudes: a run enters rising against
        // the implicit zero boundary; each rising->falling turn closes a
        // mode, as does ending while still rising.
        slope: Slope,
        last_mag: f64,
        segment_peak: f64,
        mode_peaks: Vec<f64>,
    }

    impl Run {
        fn start(sample: f64) -> Self {
            Self {
                positive: sample > 0.0,
                duration: 1,
                amplitude: sample,
                slope: Slope::Rising,
                last_mag: sample.abs(),
                segment_peak: sample.abs(),
                mode_peaks: Vec::new(),
            }
        }

        fn push(&mut self, sample: f64) {
            self.duration += 1;
            let mag = sample.abs();
            if mag > self.amplitude.abs() {
                self.amplitude = sample;
            }
            if mag > self.last_mag {
                self.slope = Slope::Rising;
                self.segment_peak = self.segment_peak.max(mag);
            } else if mag < self.last_mag {
                if self.slope == Slope::Rising {
                    self.mode_peaks.push(self.segment_peak);
                }
                self.slope = Slope::Falling;
                self.segment_peak = mag;
            }
            // Equal magnitudes extend a plateau: no slope change, the
            // plateau's first sample already carries the candidate peak.
            self.last_mag = mag;
        }

        fn finish(mut self) -> EpochDetail {
            if self.slope == Slope::Rising {
                self.mode_peaks.push(self.segment_peak);
            }
            EpochDetail {
                epoch: Epoch {
                    duration: self.duration,
                    amplitude: self.amplitude,
                    shape: self.mode_peaks.len(),
                },
                mode_peaks: self.mode_peaks,
            }
        }
    }

    let mut epochs = Vec::new();
    let mut run: Option<Run> = None;
    let mut visited = 0usize;

    for &v in values {
        visited += 1;
        if v == 0.0 {
            if let Some(r) = run.take() {
                epochs.push(r.finish());
            }
            continue;
        }
        match run.as_mut() {
            Some(r) if r.positive == (v > 0.0) => r.push(v),
            _ => {
                if let Some(r) = run.take() {
                    epochs.push(r.finish());
                }
                run = Some(Run::start(v));
            }
        }
    }
    if let Some(r) = run.take() {
        epochs.push(r.finish());
    }
    (epochs, visited)
}

/// Scales epoch parameters into the feature ranges: duration by the signal
/// length into (0, 1], amplitude by 128 into [-1, 1], shape by the capped
/// mode count into (0, 1].
pub fn normalize_epoch_params(
    epochs: &[Epoch],
    signal_len: usize,
    shape_cap: usize,
) -> Result<Vec<[f64; 3]>> {
    if signal_len == 0 {
        return Err(Error::InvalidInput("signal length must be positive".into()));
    }
    if shape_cap == 0 {
        return Err(Error::InvalidInput("shape cap must be positive".into()));
    }
    Ok(epochs
        .iter()
        .map(|e| {
            [
                e.duration as f64 / signal_len as f64,
                e.amplitude / 128.0,
                e.shape.min(shape_cap) as f64 / shape_cap as f64,
            ]
        })
        .collect())
}

/// The fixed-width feature: encoded epoch triples of the selected
/// projections, concatenated in (gray-H, gray-V, edge-H, edge-V) order.
/// Absent epochs are zero-filled; every element lies in [-1, 1].
#[derive(Clone, PartialEq, Debug)]
pub struct ZepFeature {
    values: Vec<f64>,
}

impl ZepFeature {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Builds the feature for one window from its four profiles.
pub fn assemble_zep(
    gray_h: &Projection,
    gray_v: &Projection,
    edge_h: &Projection,
    edge_v: &Projection,
    params: &EncoderParams,
) -> Result<ZepFeature> {
    let selected: &[&Projection] = match params.projection_set {
        ProjectionSet::Both => &[gray_h, gray_v, edge_h, edge_v],
        ProjectionSet::IntegralOnly => &[gray_h, gray_v],
        ProjectionSet::EdgeOnly => &[edge_h, edge_v],
    };
    let mut values = Vec::with_capacity(params.feature_len());
    for projection in selected {
        let normalized = normalize_projection(projection)?;
        encode_into(normalized.values(), params, &mut values);
    }
    Ok(ZepFeature { values })
}

/// Encodes one already-normalized signal into its feature slice.
pub fn encode_signal_feature(signal: &NormalizedProjection, params: &EncoderParams) -> ZepFeature {
    let mut values = Vec::with_capacity(params.max_epochs * 3);
    encode_into(signal.values(), params, &mut values);
    ZepFeature { values }
}

fn encode_into(values: &[f64], params: &EncoderParams, out: &mut Vec<f64>) {
    let (details, _) = extract_epoch_details(values);
    let len = values.len().max(1);
    for slot in 0..params.max_epochs {
        match details.get(slot) {
            Some(d) => {
                out.push(d.epoch.duration as f64 / len as f64);
                out.push(d.epoch.amplitude / 128.0);
                out.push(match params.shape_param {
                    ShapeParam::ExtremeCount => {
                        d.epoch.shape.min(params.shape_cap) as f64 / params.shape_cap as f64
                    }
                    ShapeParam::ModeRange => {
                        let max = d.mode_peaks.iter().cloned().fold(f64::MIN, f64::max);
                        let min = d.mode_peaks.iter().cloned().fold(f64::MAX, f64::min);
                        (max - min) / 128.0
                    }
                });
            }
            None => out.extend_from_slice(&[0.0, 0.0, 0.0]),
        }
    }
}
