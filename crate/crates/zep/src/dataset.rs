//! Training-example extraction, annotation files and synthetic face
//! fixtures for desk-scale verification.
//!
//! Positive examples come from a 5x5 grid of patch centers around the
//! ground-truth eye whose patches overlap the centered patch by more than
//! 75% (intersection over union); negatives are a seeded sample of the
//! 50-75% overlap band. Regression targets encode closeness to the true
//! center, binary targets the eye / non-eye label.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::encoder::{assemble_zep, ZepFeature};
use crate::error::{Error, Result};
use crate::image::{add_gaussian_noise, map_point_into_resized, GrayImage, Point, Rect};
use crate::mlp::{Head, TrainingSet};
use crate::projections::{
    build_oriented_integrals, fast_projection, sobel_energy, Axis, OrientedIntegralImages,
};

/// Ground truth for one face: its rectangle and both eye centers, all in
/// source-image coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    pub id: String,
    pub face_rect: Rect,
    pub left_eye: Point,
    pub right_eye: Point,
}

impl Annotation {
    pub fn new(id: String, face_rect: Rect, left_eye: Point, right_eye: Point) -> Result<Self> {
        for (eye, p) in [("left", left_eye), ("right", right_eye)] {
            let inside = p.row >= face_rect.row_min as f64
                && p.row <= face_rect.row_max as f64
                && p.col >= face_rect.col_min as f64
                && p.col <= face_rect.col_max as f64;
            if !inside {
                return Err(Error::Geometry(format!(
                    "{eye} eye ({}, {}) outside face rectangle {face_rect}",
                    p.row, p.col
                )));
            }
        }
        Ok(Self {
            id,
            face_rect,
            left_eye,
            right_eye,
        })
    }

    /// Eye centers mapped into the resampled working-face frame.
    pub fn working_eyes(&self, face_size: usize) -> (Point, Point) {
        (
            map_point_into_resized(self.left_eye, &self.face_rect, face_size, face_size),
            map_point_into_resized(self.right_eye, &self.face_rect, face_size, face_size),
        )
    }
}

pub const ANNOTATION_HEADER: &str = "id,face_r0,face_r1,face_c0,face_c1,le_row,le_col,re_row,re_col";

/// Reads the annotation CSV (see [`ANNOTATION_HEADER`]): face bounds as
/// inclusive integer pixels, eye centers as reals.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
    parse_annotations(&std::fs::read_to_string(path)?)
}

pub fn parse_annotations(text: &str) -> Result<Vec<Annotation>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == ANNOTATION_HEADER => {}
        _ => {
            return Err(Error::Annotation {
                line: 1,
                message: format!("expected header {ANNOTATION_HEADER:?}"),
            })
        }
    }

    let mut annotations = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Annotation {
                line: lineno,
                message: format!("expected 9 fields, found {}", fields.len()),
            });
        }
        let int = |i: usize| -> Result<usize> {
            fields[i].trim().parse().map_err(|_| Error::Annotation {
                line: lineno,
                message: format!("bad integer {:?}", fields[i]),
            })
        };
        let real = |i: usize| -> Result<f64> {
            fields[i].trim().parse().map_err(|_| Error::Annotation {
                line: lineno,
                message: format!("bad number {:?}", fields[i]),
            })
        };
        let face_rect =
            Rect::new(int(1)?, int(2)?, int(3)?, int(4)?).map_err(|e| Error::Annotation {
                line: lineno,
                message: e.to_string(),
            })?;
        let annotation = Annotation::new(
            fields[0].trim().to_string(),
            face_rect,
            Point::new(real(5)?, real(6)?),
            Point::new(real(7)?, real(8)?),
        )
        .map_err(|e| Error::Annotation {
            line: lineno,
            message: e.to_string(),
        })?;
        annotations.push(annotation);
    }
    Ok(annotations)
}

pub fn format_annotations(annotations: &[Annotation]) -> String {
    let mut out = String::from(ANNOTATION_HEADER);
    out.push('\n');
    for a in annotations {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            a.id,
            a.face_rect.row_min,
            a.face_rect.row_max,
            a.face_rect.col_min,
            a.face_rect.col_max,
            a.left_eye.row,
            a.left_eye.col,
            a.right_eye.row,
            a.right_eye.col
        );
    }
    out
}

pub fn save_annotations(annotations: &[Annotation], path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, format_annotations(annotations))?)
}

/// One training example: a window feature, its target and where it came
/// from.
#[derive(Clone, Debug)]
pub struct PatchSample {
    pub feature: ZepFeature,
    pub target: f64,
    pub image_id: String,
    /// Patch-center offset from the rounded true eye center.
    pub offset: (i32, i32),
}

/// Intersection over union of two equally sized square patches whose
/// centers differ by `(dr, dc)`.
pub fn patch_overlap(patch: usize, dr: i64, dc: i64) -> f64 {
    let inter = patch_intersection(patch, dr, dc);
    let union = 2 * (patch * patch) as i64 - inter;
    inter as f64 / union as f64
}

fn patch_intersection(patch: usize, dr: i64, dc: i64) -> i64 {
    let p = patch as i64;
    let h = (p - dr.abs()).max(0);
    let w = (p - dc.abs()).max(0);
    h * w
}

// Band membership via exact integer comparisons: with intersection I and
// patch area A, IoU > 3/4 iff 7I > 6A and IoU > 1/2 iff 3I > 2A.
fn above_three_quarters(patch: usize, dr: i64, dc: i64) -> bool {
    let area = (patch * patch) as i64;
    7 * patch_intersection(patch, dr, dc) > 6 * area
}

fn in_negative_band(patch: usize, dr: i64, dc: i64) -> bool {
    let area = (patch * patch) as i64;
    let inter = patch_intersection(patch, dr, dc);
    3 * inter > 2 * area && 7 * inter <= 6 * area
}

/// The 5x5 positive offset grid: the widest symmetric stride whose corner
/// offsets still overlap the centered patch by more than 75%.
pub fn positive_offsets(patch: usize) -> Vec<(i64, i64)> {
    let mut step = 1i64;
    while above_three_quarters(patch, 2 * (step + 1), 2 * (step + 1)) {
        step += 1;
    }
    let mut offsets = Vec::with_capacity(25);
    for dr in -2..=2i64 {
        for dc in -2..=2i64 {
            offsets.push((dr * step, dc * step));
        }
    }
    offsets
}

/// Every offset whose patches overlap the centered patch by 50-75%.
pub fn negative_band_offsets(patch: usize) -> Vec<(i64, i64)> {
    let p = patch as i64;
    let mut offsets = Vec::new();
    for dr in -p..=p {
        for dc in -p..=p {
            if in_negative_band(patch, dr, dc) {
                offsets.push((dr, dc));
            }
        }
    }
    offsets
}

const NEGATIVES_PER_EYE: usize = 100;

/// Extracts the per-face training samples: for each eye, the 25 positive
/// patch centers and a seeded 100-element sample of the negative band.
///
/// `face` must already be the resampled working square and the
/// annotation's eye points given in its coordinates.
pub fn extract_patches(
    face: &GrayImage,
    ann: &Annotation,
    head: Head,
    seed: u64,
    config: &Config,
) -> Result<Vec<PatchSample>> {
    let patch = config.patch_size;
    let half = patch / 2;
    if face.width() < patch || face.height() < patch {
        return Err(Error::Geometry(format!(
            "face {}x{} smaller than the {patch}x{patch} patch",
            face.width(),
            face.height()
        )));
    }

    let gray_tables = build_oriented_integrals(face);
    let energy = sobel_energy(face)?;
    let edge_tables = build_oriented_integrals(&energy);
    let enc = config.encoder_params();
    let d_max = patch as f64 * std::f64::consts::SQRT_2 / 2.0;

    let positives = positive_offsets(patch);
    let band = negative_band_offsets(patch);
    debug_assert!(band.len() > NEGATIVES_PER_EYE);

    let mut samples = Vec::with_capacity(2 * (positives.len() + NEGATIVES_PER_EYE));
    for (eye_idx, truth) in [ann.left_eye, ann.right_eye].into_iter().enumerate() {
        let center = (truth.row.round() as i64, truth.col.round() as i64);
        let fits = |offset: (i64, i64)| -> bool {
            let r = center.0 + offset.0;
            let c = center.1 + offset.1;
            r >= half as i64
                && c >= half as i64
                && r + (patch - half) as i64 <= face.height() as i64
                && c + (patch - half) as i64 <= face.width() as i64
        };
        if !positives.iter().chain(band.iter()).all(|&o| fits(o)) {
            return Err(Error::Geometry(format!(
                "eye ({}, {}) too close to the face border for the sampling band",
                truth.row, truth.col
            )));
        }

        let negatives = sample_without_replacement(
            &band,
            NEGATIVES_PER_EYE,
            derive_seed(seed, eye_idx as u64),
        );

        for (offsets, positive) in [(&positives, true), (&negatives, false)] {
            for &(dr, dc) in offsets.iter() {
                let r = (center.0 + dr) as usize;
                let c = (center.1 + dc) as usize;
                let window = Rect {
                    row_min: r - half,
                    row_max: r - half + patch - 1,
                    col_min: c - half,
                    col_max: c - half + patch - 1,
                };
                let feature = window_feature(&gray_tables, &edge_tables, window, &enc)?;
                let target = match head {
                    Head::Binary => {
                        if positive {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    Head::Regression => {
                        let d = Point::new(r as f64, c as f64).distance(&truth);
                        (1.0 - d / d_max).clamp(0.0, 1.0)
                    }
                };
                samples.push(PatchSample {
                    feature,
                    target,
                    image_id: ann.id.clone(),
                    offset: (dr as i32, dc as i32),
                });
            }
        }
    }
    Ok(samples)
}

fn window_feature(
    gray_tables: &OrientedIntegralImages,
    edge_tables: &OrientedIntegralImages,
    window: Rect,
    enc: &crate::encoder::EncoderParams,
) -> Result<ZepFeature> {
    let gray_h = fast_projection(gray_tables, window, Axis::Horizontal)?;
    let gray_v = fast_projection(gray_tables, window, Axis::Vertical)?;
    let edge_h = fast_projection(edge_tables, window, Axis::Horizontal)?;
    let edge_v = fast_projection(edge_tables, window, Axis::Vertical)?;
    assemble_zep(&gray_h, &gray_v, &edge_h, &edge_v, enc)
}

fn sample_without_replacement(pool: &[(i64, i64)], n: usize, seed: u64) -> Vec<(i64, i64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    // Partial Fisher-Yates: the first n slots end up uniformly sampled.
    for i in 0..n.min(pool.len()) {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    indices[..n.min(pool.len())].iter().map(|&i| pool[i]).collect()
}

pub(crate) fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Synthetic fixtures
// ---------------------------------------------------------------------------

/// Geometry and gray levels of one rendered eye assembly. The face-wide
/// fields (`skin_level`, `noise_sigma`, `shading`) are taken from the left
/// spec when a face is rendered.
#[derive(Clone, Debug)]
pub struct SyntheticEyeSpec {
    /// Pupil center in working-face coordinates.
    pub center: Point,
    pub pupil_radius: f64,
    pub iris_radius: f64,
    pub pupil_level: u8,
    pub iris_level: u8,
    pub sclera_level: u8,
    pub sclera_half_width: f64,
    pub skin_level: u8,
    pub eyebrow_offset: f64,
    pub eyebrow_half_width: f64,
    pub eyebrow_thickness: f64,
    pub eyebrow_level: u8,
    /// Eyelid opening in [0, 1]; 0 renders a closed lid line.
    pub openness: f64,
    pub noise_sigma: f64,
    /// Signed side-shadow strength: one face half is darkened by up to
    /// `|shading|`, ramping across the middle 30% of the width; the sign
    /// picks which side darkens (positive: right).
    pub shading: f64,
}

impl SyntheticEyeSpec {
    fn validate(&self) -> Result<()> {
        if self.pupil_radius >= self.iris_radius {
            return Err(Error::InvalidInput(
                "pupil radius must be smaller than iris radius".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.openness) {
            return Err(Error::InvalidInput("openness must be in [0, 1]".to_string()));
        }
        Ok(())
    }
}

/// Sampling ranges for corpus generation.
#[derive(Clone, Debug)]
pub struct VariationRanges {
    pub openness: (f64, f64),
    pub noise_sigma: (f64, f64),
    /// Magnitude of the horizontal shading ramp; direction is seeded.
    pub shading_mag: (f64, f64),
    pub skin: (u8, u8),
    pub sclera: (u8, u8),
    pub iris: (u8, u8),
    pub pupil: (u8, u8),
    pub eyebrow: (u8, u8),
    pub center_jitter: f64,
}

impl Default for VariationRanges {
    fn default() -> Self {
        // Frontal corpus: mild shading that stays inside the frontal
        // illumination band. Skin is the brightest surface by a wide
        // margin, so the darkness cutoff (a fraction of the ROI maximum)
        // keeps rejecting skin candidates even when noise inflates the
        // maximum.
        Self {
            openness: (0.65, 1.0),
            noise_sigma: (0.0, 10.0),
            shading_mag: (0.0, 0.12),
            skin: (230, 242),
            sclera: (185, 200),
            iris: (38, 52),
            pupil: (15, 25),
            eyebrow: (48, 66),
            center_jitter: 6.0,
        }
    }
}

impl VariationRanges {
    /// Strongly side-lit variant that trips the lateral illumination
    /// detector in either shadow direction.
    pub fn lateral() -> Self {
        Self {
            shading_mag: (0.58, 0.75),
            noise_sigma: (0.0, 8.0),
            ..Self::default()
        }
    }

    /// Noise-free variant for brightness-shift invariance fixtures: gray
    /// levels leave at least 25 levels of headroom below 255, and no
    /// surface level falls near the darkness cutoff of either the
    /// original or the shifted face, so the candidate set cannot change
    /// under a uniform +25 shift.
    pub fn headroom() -> Self {
        Self {
            openness: (0.7, 1.0),
            noise_sigma: (0.0, 0.0),
            shading_mag: (0.0, 0.03),
            skin: (210, 222),
            sclera: (140, 155),
            ..Self::default()
        }
    }

    fn sample_pair(&self, face_size: usize, rng: &mut ChaCha8Rng) -> (SyntheticEyeSpec, SyntheticEyeSpec) {
        let s = face_size as f64;
        let skin = rng.gen_range(self.skin.0..=self.skin.1);
        let noise = rng.gen_range(self.noise_sigma.0..=self.noise_sigma.1);
        let mag = rng.gen_range(self.shading_mag.0..=self.shading_mag.1);
        let shading = if rng.gen_bool(0.5) { mag } else { -mag };

        let mut eye = |col_frac: f64| {
            let jitter = self.center_jitter;
            let center = Point::new(
                0.38 * s + rng.gen_range(-jitter..=jitter),
                col_frac * s + rng.gen_range(-jitter..=jitter),
            );
            let iris_radius = rng.gen_range(11.0..=14.0) * s / 300.0;
            SyntheticEyeSpec {
                center,
                pupil_radius: rng.gen_range(4.5..=6.0) * s / 300.0,
                iris_radius,
                pupil_level: rng.gen_range(self.pupil.0..=self.pupil.1),
                iris_level: rng.gen_range(self.iris.0..=self.iris.1),
                sclera_level: rng.gen_range(self.sclera.0..=self.sclera.1),
                sclera_half_width: rng.gen_range(17.0..=21.0) * s / 300.0,
                skin_level: skin,
                eyebrow_offset: rng.gen_range(22.0..=27.0) * s / 300.0,
                eyebrow_half_width: rng.gen_range(18.0..=24.0) * s / 300.0,
                eyebrow_thickness: rng.gen_range(3.0..=5.0) * s / 300.0,
                eyebrow_level: rng.gen_range(self.eyebrow.0..=self.eyebrow.1),
                openness: rng.gen_range(self.openness.0..=self.openness.1),
                noise_sigma: noise,
                shading,
            }
        };
        (eye(0.31), eye(0.69))
    }
}

/// Renders one synthetic face: skin background, two eye assemblies
/// (sclera ellipse, iris and pupil discs, eyebrow bar), an optional
/// horizontal shading ramp and seeded noise. The annotation carries the
/// exact pupil centers.
pub fn synth_face(
    face_size: usize,
    left: &SyntheticEyeSpec,
    right: &SyntheticEyeSpec,
    seed: u64,
) -> Result<(GrayImage, Annotation)> {
    left.validate()?;
    right.validate()?;
    for spec in [left, right] {
        let margin = spec.eyebrow_offset + spec.eyebrow_thickness;
        if spec.center.row - margin < 0.0
            || spec.center.row + spec.iris_radius >= face_size as f64
            || spec.center.col - spec.sclera_half_width < 0.0
            || spec.center.col + spec.sclera_half_width >= face_size as f64
        {
            return Err(Error::Geometry(
                "eye assembly extends outside the face".to_string(),
            ));
        }
    }

    let mut img = GrayImage::constant(face_size, face_size, left.skin_level);
    let mut canvas: Vec<u8> = img.pixels().to_vec();
    for spec in [left, right] {
        render_eye(&mut canvas, face_size, spec);
    }

    // Multiplicative side shadow: full brightness on one half, a linear
    // transition across the middle, `1 - |shading|` on the other half.
    let shading = left.shading;
    if shading != 0.0 {
        let mag = shading.abs();
        for r in 0..face_size {
            for c in 0..face_size {
                let x = c as f64 / (face_size - 1) as f64;
                let frac = if shading > 0.0 { x } else { 1.0 - x };
                let depth = ((frac - 0.35) / 0.3).clamp(0.0, 1.0);
                let factor = 1.0 - mag * depth;
                let idx = r * face_size + c;
                canvas[idx] = (canvas[idx] as f64 * factor).round().clamp(0.0, 255.0) as u8;
            }
        }
    }

    img = GrayImage::new(face_size, face_size, canvas)?;
    if left.noise_sigma > 0.0 {
        img = add_gaussian_noise(&img, left.noise_sigma, derive_seed(seed, 0x5eed))?;
    }

    let annotation = Annotation::new(
        format!("synth-{seed:08x}"),
        Rect::new(0, face_size - 1, 0, face_size - 1)?,
        left.center,
        right.center,
    )?;
    Ok((img, annotation))
}

fn render_eye(canvas: &mut [u8], face_size: usize, spec: &SyntheticEyeSpec) {
    let (cr, cc) = (spec.center.row, spec.center.col);
    let sclera_half_height = spec.openness * (spec.iris_radius + 3.0);

    // Eyebrow bar.
    let brow_top = cr - spec.eyebrow_offset - spec.eyebrow_thickness / 2.0;
    let brow_bottom = cr - spec.eyebrow_offset + spec.eyebrow_thickness / 2.0;
    fill(canvas, face_size, |r, c| {
        r >= brow_top && r <= brow_bottom && (c - cc).abs() <= spec.eyebrow_half_width
    }, spec.eyebrow_level);

    if sclera_half_height < 1.0 {
        // Closed eye: a thin lid line instead of the eyeball.
        fill(canvas, face_size, |r, c| {
            (r - cr).abs() <= 1.0 && (c - cc).abs() <= spec.sclera_half_width
        }, spec.iris_level);
        return;
    }

    let in_sclera = |r: f64, c: f64| {
        let dy = (r - cr) / sclera_half_height;
        let dx = (c - cc) / spec.sclera_half_width;
        dy * dy + dx * dx <= 1.0
    };
    fill(canvas, face_size, in_sclera, spec.sclera_level);
    fill(canvas, face_size, |r, c| {
        in_sclera(r, c) && (r - cr).hypot(c - cc) <= spec.iris_radius
    }, spec.iris_level);
    fill(canvas, face_size, |r, c| {
        in_sclera(r, c) && (r - cr).hypot(c - cc) <= spec.pupil_radius
    }, spec.pupil_level);
}

fn fill(canvas: &mut [u8], face_size: usize, pred: impl Fn(f64, f64) -> bool, level: u8) {
    for r in 0..face_size {
        for c in 0..face_size {
            if pred(r as f64, c as f64) {
                canvas[r * face_size + c] = level;
            }
        }
    }
}

/// Renders `n` faces with per-face derived seeds and sequential ids.
pub fn synth_faces(
    n: usize,
    ranges: &VariationRanges,
    face_size: usize,
    seed: u64,
) -> Result<Vec<(GrayImage, Annotation)>> {
    (0..n)
        .map(|i| {
            let face_seed = derive_seed(seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(face_seed);
            let (left, right) = ranges.sample_pair(face_size, &mut rng);
            let (img, mut ann) = synth_face(face_size, &left, &right, face_seed)?;
            ann.id = format!("synth-{i:04}");
            Ok((img, ann))
        })
        .collect()
}

/// Renders a corpus and extracts every face's patch samples.
pub fn build_corpus(
    n_faces: usize,
    ranges: &VariationRanges,
    head: Head,
    seed: u64,
    config: &Config,
) -> Result<Vec<PatchSample>> {
    let faces = synth_faces(n_faces, ranges, config.face_size, seed)?;
    let mut samples = Vec::new();
    for (i, (img, ann)) in faces.iter().enumerate() {
        samples.extend(extract_patches(
            img,
            ann,
            head,
            derive_seed(seed, 0x1000 + i as u64),
            config,
        )?);
    }
    Ok(samples)
}

/// Packs extracted samples into a training set.
pub fn to_training_set(samples: &[PatchSample], head: Head) -> Result<TrainingSet> {
    TrainingSet::new(
        samples.iter().map(|s| s.feature.values().to_vec()).collect(),
        samples.iter().map(|s| s.target).collect(),
        head,
    )
}
