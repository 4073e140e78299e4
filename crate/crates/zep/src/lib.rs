//! Eye-center localization from zero-crossing encoded image projections.
//!
//! The pipeline resamples a detected face square to a working size, slides
//! an analysis patch over each eye region of interest, compresses every
//! patch into a short fixed-width feature (the ZEP feature: epoch-encoded,
//! normalized gray-level and edge projections) and scores it with a small
//! perceptron. Thresholded responses form a per-eye response map whose
//! connected regions yield sub-pixel eye centers.
//!
//! Modules:
//!
//! * [`image`] — grayscale rasters, PGM I/O, resampling, noise.
//! * [`projections`] — window profiles with a prefix-sum fast path and a
//!   naive reference path.
//! * [`encoder`] — projection normalization and epoch encoding into the
//!   ZEP feature.
//! * [`mlp`] — the two-head perceptron, training, gradient checking,
//!   serialization.
//! * [`localizer`] — the per-face pipeline: ROIs, illumination branch,
//!   darkness pre-filter, scanning, region post-processing.
//! * [`dataset`] — training example extraction, annotation files,
//!   synthetic fixtures.
//! * [`eval`] — the worst-eye error criterion, accuracy curves, noise
//!   sweep, throughput aggregate.
//! * [`config`] — every pipeline constant, with a `key=value` file format.

pub mod config;
pub mod dataset;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod image;
pub mod localizer;
pub mod mlp;
pub mod projections;

pub use config::Config;
pub use error::{Error, Result};
pub use image::{GrayImage, Point, Rect};
