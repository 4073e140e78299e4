//! Pipeline configuration: every tuning constant of the localizer, the
//! encoder and the trainer, with a flat `key=value` text representation so
//! any of them can be overridden without code changes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::encoder::{EncoderParams, ProjectionSet, ShapeParam};
use crate::error::{Error, Result};
use crate::mlp::Head;

/// Region-selection rule applied to the thresholded response map.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RegionRule {
    /// Prefer low-lying regions among those of comparable size; rejects
    /// eyebrow responses sitting above the eye.
    LargestLower,
    /// Plain largest region.
    Largest,
}

impl fmt::Display for RegionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionRule::LargestLower => "largest-lower",
            RegionRule::Largest => "largest",
        })
    }
}

impl FromStr for RegionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "largest-lower" => Ok(RegionRule::LargestLower),
            "largest" => Ok(RegionRule::Largest),
            other => Err(Error::Config(format!("unknown region rule {other:?}"))),
        }
    }
}

/// Final center extraction rule for the selected region.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CenterRule {
    /// Response-weighted center of mass of the region cells.
    WeightedCentroid,
    /// Geometric center of the region's bounding rectangle.
    BoundingRectCenter,
}

impl fmt::Display for CenterRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CenterRule::WeightedCentroid => "weighted-centroid",
            CenterRule::BoundingRectCenter => "bounding-rect-center",
        })
    }
}

impl FromStr for CenterRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted-centroid" => Ok(CenterRule::WeightedCentroid),
            "bounding-rect-center" => Ok(CenterRule::BoundingRectCenter),
            other => Err(Error::Config(format!("unknown center rule {other:?}"))),
        }
    }
}

/// Full pipeline configuration. `Config::default()` is the reference
/// parameter set; the frontal/lateral pairs hold the two merged solutions
/// side by side.
#[derive(Clone, PartialEq, Debug)]
pub struct Config {
    /// Side length faces are resampled to before scanning.
    pub face_size: usize,
    /// Side length of the sliding analysis patch.
    pub patch_size: usize,
    /// Scan step in pixels.
    pub scan_stride: usize,
    /// Epochs kept per projection in the feature.
    pub max_epochs: usize,
    /// Cap for the epoch mode count.
    pub shape_cap: usize,
    /// Third epoch parameter variant.
    pub shape_param: ShapeParam,
    /// Which projections enter the feature.
    pub projection_set: ProjectionSet,

    pub learning_rate: f64,
    pub train_epochs: usize,

    /// Eye-patch brightness ratios inside this closed band count as
    /// frontal illumination.
    pub illumination_ratio_min: f64,
    pub illumination_ratio_max: f64,

    /// Candidate centers brighter than `(1 - threshold) * max(roi)` are
    /// discarded before scanning.
    pub darkness_threshold_frontal: f64,
    pub darkness_threshold_lateral: f64,

    /// Discriminator responses must exceed these to count as eye evidence.
    pub accept_threshold_frontal: f64,
    pub accept_threshold_lateral: f64,

    pub region_rule_frontal: RegionRule,
    pub region_rule_lateral: RegionRule,

    pub center_rule_frontal: CenterRule,
    pub center_rule_lateral: CenterRule,

    pub training_scheme_frontal: Head,
    pub training_scheme_lateral: Head,

    /// Informational tags recording which corpus each model variant is
    /// meant to be trained from.
    pub training_source_frontal: String,
    pub training_source_lateral: String,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            face_size: 300,
            patch_size: 71,
            scan_stride: 2,
            max_epochs: 5,
            shape_cap: 7,
            shape_param: ShapeParam::ExtremeCount,
            projection_set: ProjectionSet::Both,
            learning_rate: 0.01,
            train_epochs: 50,
            illumination_ratio_min: 0.5,
            illumination_ratio_max: 1.75,
            darkness_threshold_frontal: 0.15,
            darkness_threshold_lateral: 0.3,
            accept_threshold_frontal: 0.0,
            accept_threshold_lateral: -0.5,
            region_rule_frontal: RegionRule::LargestLower,
            region_rule_lateral: RegionRule::Largest,
            center_rule_frontal: CenterRule::WeightedCentroid,
            center_rule_lateral: CenterRule::BoundingRectCenter,
            training_scheme_frontal: Head::Regression,
            training_scheme_lateral: Head::Binary,
            training_source_frontal: "georgiatech+authors".to_string(),
            training_source_lateral: "yaleb".to_string(),
        }
    }
}

impl Config {
    /// Encoder parameters implied by this configuration.
    pub fn encoder_params(&self) -> EncoderParams {
        EncoderParams {
            max_epochs: self.max_epochs,
            shape_cap: self.shape_cap,
            shape_param: self.shape_param,
            projection_set: self.projection_set,
        }
    }

    /// Feature width the discriminators must be sized for.
    pub fn feature_len(&self) -> usize {
        self.encoder_params().feature_len()
    }

    /// Canonical `key=value` dump; parsing it back reproduces the config.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        kv("face_size", self.face_size.to_string());
        kv("patch_size", self.patch_size.to_string());
        kv("scan_stride", self.scan_stride.to_string());
        kv("max_epochs", self.max_epochs.to_string());
        kv("shape_cap", self.shape_cap.to_string());
        kv(
            "shape_param",
            match self.shape_param {
                ShapeParam::ExtremeCount => "extreme-count".to_string(),
                ShapeParam::ModeRange => "mode-range".to_string(),
            },
        );
        kv(
            "projection_set",
            match self.projection_set {
                ProjectionSet::Both => "both".to_string(),
                ProjectionSet::IntegralOnly => "integral-only".to_string(),
                ProjectionSet::EdgeOnly => "edge-only".to_string(),
            },
        );
        kv("learning_rate", format_f64(self.learning_rate));
        kv("train_epochs", self.train_epochs.to_string());
        kv(
            "illumination_ratio_min",
            format_f64(self.illumination_ratio_min),
        );
        kv(
            "illumination_ratio_max",
            format_f64(self.illumination_ratio_max),
        );
        kv(
            "darkness_threshold_frontal",
            format_f64(self.darkness_threshold_frontal),
        );
        kv(
            "darkness_threshold_lateral",
            format_f64(self.darkness_threshold_lateral),
        );
        kv(
            "accept_threshold_frontal",
            format_f64(self.accept_threshold_frontal),
        );
        kv(
            "accept_threshold_lateral",
            format_f64(self.accept_threshold_lateral),
        );
        kv("region_rule_frontal", self.region_rule_frontal.to_string());
        kv("region_rule_lateral", self.region_rule_lateral.to_string());
        kv("center_rule_frontal", self.center_rule_frontal.to_string());
        kv("center_rule_lateral", self.center_rule_lateral.to_string());
        kv(
            "training_scheme_frontal",
            self.training_scheme_frontal.to_string(),
        );
        kv(
            "training_scheme_lateral",
            self.training_scheme_lateral.to_string(),
        );
        kv(
            "training_source_frontal",
            self.training_source_frontal.clone(),
        );
        kv(
            "training_source_lateral",
            self.training_source_lateral.clone(),
        );
        s
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
        }
        match key {
            "face_size" => self.face_size = num(key, value)?,
            "patch_size" => self.patch_size = num(key, value)?,
            "scan_stride" => self.scan_stride = num(key, value)?,
            "max_epochs" => self.max_epochs = num(key, value)?,
            "shape_cap" => self.shape_cap = num(key, value)?,
            "shape_param" => {
                self.shape_param = match value {
                    "extreme-count" => ShapeParam::ExtremeCount,
                    "mode-range" => ShapeParam::ModeRange,
                    _ => return Err(Error::Config(format!("unknown shape_param {value:?}"))),
                }
            }
            "projection_set" => {
                self.projection_set = match value {
                    "both" => ProjectionSet::Both,
                    "integral-only" => ProjectionSet::IntegralOnly,
                    "edge-only" => ProjectionSet::EdgeOnly,
                    _ => return Err(Error::Config(format!("unknown projection_set {value:?}"))),
                }
            }
            "learning_rate" => self.learning_rate = num(key, value)?,
            "train_epochs" => self.train_epochs = num(key, value)?,
            "illumination_ratio_min" => self.illumination_ratio_min = num(key, value)?,
            "illumination_ratio_max" => self.illumination_ratio_max = num(key, value)?,
            "darkness_threshold_frontal" => self.darkness_threshold_frontal = num(key, value)?,
            "darkness_threshold_lateral" => self.darkness_threshold_lateral = num(key, value)?,
            "accept_threshold_frontal" => self.accept_threshold_frontal = num(key, value)?,
            "accept_threshold_lateral" => self.accept_threshold_lateral = num(key, value)?,
            "region_rule_frontal" => self.region_rule_frontal = value.parse()?,
            "region_rule_lateral" => self.region_rule_lateral = value.parse()?,
            "center_rule_frontal" => self.center_rule_frontal = value.parse()?,
            "center_rule_lateral" => self.center_rule_lateral = value.parse()?,
            "training_scheme_frontal" => self.training_scheme_frontal = value.parse()?,
            "training_scheme_lateral" => self.training_scheme_lateral = value.parse()?,
            "training_source_frontal" => self.training_source_frontal = value.to_string(),
            "training_source_lateral" => self.training_source_lateral = value.to_string(),
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a `key=value` text, starting from the defaults. Blank lines
    /// and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Config::parse(&std::fs::read_to_string(path)?)
    }
}

/// Shortest representation without scientific notation surprises for the
/// values used here (plain decimals).
fn format_f64(v: f64) -> String {
    format!("{v}")
}
