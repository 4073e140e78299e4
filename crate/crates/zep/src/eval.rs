//! Localization scoring: the worst-eye error criterion, accuracy curves,
//! the noise-robustness sweep and the cross-platform throughput aggregate.

use crate::config::Config;
use crate::dataset::{derive_seed, Annotation};
use crate::error::{Error, Result};
use crate::image::{add_gaussian_noise, GrayImage};
use crate::localizer::{localize, EyePair};
use crate::mlp::Mlp;

/// Per-face localization error. `eps` normalizes the worse of the two eye
/// distances by the ground-truth inter-ocular distance, so a pass at a
/// threshold bounds the worst case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalizationError {
    /// Euclidean distance of the found left eye to truth, pixels.
    pub eps_left: f64,
    /// Euclidean distance of the found right eye to truth, pixels.
    pub eps_right: f64,
    /// Ground-truth inter-ocular distance, pixels.
    pub d_eye: f64,
    /// `max(eps_left, eps_right) / d_eye`.
    pub eps: f64,
}

impl LocalizationError {
    /// Normalized error of the better-localized eye.
    pub fn best_normalized(&self) -> f64 {
        self.eps_left.min(self.eps_right) / self.d_eye
    }

    /// Mean of the two normalized per-eye errors.
    pub fn avg_normalized(&self) -> f64 {
        (self.eps_left + self.eps_right) / (2.0 * self.d_eye)
    }

    /// Normalized error of the worse eye (same as `eps`).
    pub fn worst_normalized(&self) -> f64 {
        self.eps
    }
}

/// Scores one localization against ground truth.
pub fn stringent_error(found: &EyePair, truth: &Annotation) -> Result<LocalizationError> {
    let d_eye = truth.left_eye.distance(&truth.right_eye);
    if d_eye <= 0.0 {
        return Err(Error::InvalidInput(
            "ground-truth eye centers coincide".to_string(),
        ));
    }
    let eps_left = found.left.distance(&truth.left_eye);
    let eps_right = found.right.distance(&truth.right_eye);
    Ok(LocalizationError {
        eps_left,
        eps_right,
        d_eye,
        eps: eps_left.max(eps_right) / d_eye,
    })
}

/// Accuracy over a set of faces at ascending error thresholds, under the
/// best-eye (`max_curve`), average (`avg_curve`) and worst-eye
/// (`min_curve`) readings of the per-face error.
#[derive(Clone, Debug)]
pub struct AccuracyCurve {
    pub thresholds: Vec<f64>,
    pub max_curve: Vec<f64>,
    pub avg_curve: Vec<f64>,
    pub min_curve: Vec<f64>,
}

/// Fractions of faces whose error falls strictly below each threshold.
pub fn accuracy_curve(errors: &[LocalizationError], thresholds: &[f64]) -> Result<AccuracyCurve> {
    if errors.is_empty() {
        return Err(Error::InvalidInput("no errors to score".to_string()));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput(
            "thresholds must be ascending".to_string(),
        ));
    }
    let fraction = |f: &dyn Fn(&LocalizationError) -> f64, t: f64| {
        errors.iter().filter(|e| f(e) < t).count() as f64 / errors.len() as f64
    };
    Ok(AccuracyCurve {
        thresholds: thresholds.to_vec(),
        max_curve: thresholds
            .iter()
            .map(|&t| fraction(&LocalizationError::best_normalized, t))
            .collect(),
        avg_curve: thresholds
            .iter()
            .map(|&t| fraction(&LocalizationError::avg_normalized, t))
            .collect(),
        min_curve: thresholds
            .iter()
            .map(|&t| fraction(&LocalizationError::worst_normalized, t))
            .collect(),
    })
}

/// One noise-sweep measurement.
#[derive(Clone, Copy, Debug)]
pub struct NoisePoint {
    pub sigma: f64,
    /// Worst-eye accuracy at the 0.1 threshold.
    pub accuracy: f64,
}

/// Worst-eye accuracy threshold used by the noise sweep.
pub const NOISE_SWEEP_THRESHOLD: f64 = 0.1;

/// Re-runs localization on noise-degraded copies of the corpus for each
/// sigma and reports the worst-eye accuracy at the 0.1 threshold. A face
/// that yields no candidates counts as a miss.
pub fn noise_sweep(
    corpus: &[(GrayImage, Annotation)],
    frontal_model: &Mlp,
    lateral_model: &Mlp,
    config: &Config,
    sigmas: &[f64],
    seed: u64,
) -> Result<Vec<NoisePoint>> {
    sigmas
        .iter()
        .map(|&sigma| {
            let mut passed = 0usize;
            for (i, (img, ann)) in corpus.iter().enumerate() {
                let degraded = add_gaussian_noise(img, sigma, derive_seed(seed, i as u64))?;
                match localize(&degraded, ann.face_rect, frontal_model, lateral_model, config) {
                    Ok(pair) => {
                        if stringent_error(&pair, ann)?.eps < NOISE_SWEEP_THRESHOLD {
                            passed += 1;
                        }
                    }
                    Err(Error::NoCandidates(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(NoisePoint {
                sigma,
                accuracy: passed as f64 / corpus.len() as f64,
            })
        })
        .collect()
}

/// Cross-platform throughput aggregate: frame rate times the smaller
/// frame dimension, divided by the host's single-thread benchmark score.
pub fn tp_score(fps: f64, frame_w: usize, frame_h: usize, cpu_score: f64) -> Result<f64> {
    if fps <= 0.0 || frame_w == 0 || frame_h == 0 || cpu_score <= 0.0 {
        return Err(Error::InvalidInput(
            "throughput inputs must be positive".to_string(),
        ));
    }
    Ok(fps * frame_w.min(frame_h) as f64 / cpu_score)
}
