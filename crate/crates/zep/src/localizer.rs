//! Per-face eye-center localization pipeline.
//!
//! A face rectangle is resampled to the working size, eye regions of
//! interest are cut out at fixed face fractions, and the illumination
//! branch is chosen from eye-region brightness ratios. Candidate patch
//! centers that survive a darkness pre-filter are encoded and scored by
//! the discriminator; accepted responses form a response map whose
//! connected regions yield the final eye centers.
//!
//! The frontal and lateral branches differ in darkness threshold,
//! discriminator head, acceptance threshold, region-selection rule and
//! center-extraction rule; both parameter columns live in [`Config`].

use std::fmt;

use crate::config::{CenterRule, Config, RegionRule};
use crate::encoder::assemble_zep;
use crate::error::{Error, Result};
use crate::image::{
    map_point_from_resized, resize_bilinear, GrayImage, Point, Rect,
};
use crate::mlp::{Head, Mlp};
use crate::projections::{
    build_oriented_integrals, fast_projection, sobel_energy_region, Axis, ScanGrid,
};

/// Face-fraction bounds of the eye regions of interest: rows span
/// 26%-50% of the face square, columns 25%-37% (left) and 63%-75% (right).
const ROI_ROW_FRACS: (f64, f64) = (0.26, 0.50);
const LEFT_ROI_COL_FRACS: (f64, f64) = (0.25, 0.37);
const RIGHT_ROI_COL_FRACS: (f64, f64) = (0.63, 0.75);

/// Illumination branch of the pipeline.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Illumination {
    Frontal,
    Lateral,
}

impl fmt::Display for Illumination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Illumination::Frontal => "frontal",
            Illumination::Lateral => "lateral",
        })
    }
}

/// Which eye of the face, in image terms (left = smaller columns).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Eye {
    Left,
    Right,
}

impl fmt::Display for Eye {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eye::Left => "left",
            Eye::Right => "right",
        })
    }
}

/// Branch-specific parameters resolved from the configuration.
#[derive(Clone, Copy, Debug)]
pub struct ModeParams {
    pub darkness_threshold: f64,
    pub accept_threshold: f64,
    pub region_rule: RegionRule,
    pub center_rule: CenterRule,
    pub head: Head,
    /// Offset added to accepted responses so region weights are positive.
    pub response_shift: f64,
}

impl ModeParams {
    pub fn for_mode(config: &Config, mode: Illumination) -> Self {
        match mode {
            Illumination::Frontal => ModeParams {
                darkness_threshold: config.darkness_threshold_frontal,
                accept_threshold: config.accept_threshold_frontal,
                region_rule: config.region_rule_frontal,
                center_rule: config.center_rule_frontal,
                head: config.training_scheme_frontal,
                response_shift: -config.accept_threshold_frontal,
            },
            Illumination::Lateral => ModeParams {
                darkness_threshold: config.darkness_threshold_lateral,
                accept_threshold: config.accept_threshold_lateral,
                region_rule: config.region_rule_lateral,
                center_rule: config.center_rule_lateral,
                head: config.training_scheme_lateral,
                response_shift: -config.accept_threshold_lateral,
            },
        }
    }
}

/// A face prepared for localization: the resampled working square, both
/// eye ROIs and the detected illumination branch.
#[derive(Clone, Debug)]
pub struct FaceContext {
    pub face_rect: Rect,
    pub face: GrayImage,
    pub left_roi: Rect,
    pub right_roi: Rect,
    pub illumination: Illumination,
}

/// Builds the working context for one face rectangle.
pub fn make_face_context(img: &GrayImage, face_rect: Rect, config: &Config) -> Result<FaceContext> {
    face_rect.check_inside(img.width(), img.height())?;
    if face_rect.width() < 32 || face_rect.height() < 32 {
        return Err(Error::Geometry(format!(
            "face rectangle {face_rect} is smaller than 32x32"
        )));
    }
    let face = resize_bilinear(&img.crop(face_rect)?, config.face_size, config.face_size)?;
    let left_roi = fractional_rect(config.face_size, ROI_ROW_FRACS, LEFT_ROI_COL_FRACS)?;
    let right_roi = fractional_rect(config.face_size, ROI_ROW_FRACS, RIGHT_ROI_COL_FRACS)?;
    let illumination = detect_illumination(
        &face,
        left_roi,
        right_roi,
        config.illumination_ratio_min,
        config.illumination_ratio_max,
    )?;
    Ok(FaceContext {
        face_rect,
        face,
        left_roi,
        right_roi,
        illumination,
    })
}

fn fractional_rect(size: usize, rows: (f64, f64), cols: (f64, f64)) -> Result<Rect> {
    let lo = |f: f64| (f * size as f64).round() as usize;
    let hi = |f: f64| ((f * size as f64).round() as usize).saturating_sub(1);
    Rect::new(lo(rows.0), hi(rows.1), lo(cols.0), hi(cols.1))
}

/// Classifies the illumination from eye-region brightness ratios.
///
/// Each ROI is split at its vertical midpoint (top half takes the extra
/// row for odd heights); the per-eye top/bottom mean ratios and the
/// left/right ratio must all stay inside the closed `[ratio_min,
/// ratio_max]` band for the frontal branch. A zero denominator counts as
/// an extreme ratio, hence lateral.
pub fn detect_illumination(
    face: &GrayImage,
    left_roi: Rect,
    right_roi: Rect,
    ratio_min: f64,
    ratio_max: f64,
) -> Result<Illumination> {
    left_roi.check_inside(face.width(), face.height())?;
    right_roi.check_inside(face.width(), face.height())?;

    let (l_top, l_bot) = half_means(face, left_roi);
    let (r_top, r_bot) = half_means(face, right_roi);

    let in_band = |num: f64, den: f64| den > 0.0 && {
        let ratio = num / den;
        ratio >= ratio_min && ratio <= ratio_max
    };

    let frontal = in_band(l_top, l_bot)
        && in_band(r_top, r_bot)
        && in_band(l_top + l_bot, r_top + r_bot);
    Ok(if frontal {
        Illumination::Frontal
    } else {
        Illumination::Lateral
    })
}

fn half_means(face: &GrayImage, roi: Rect) -> (f64, f64) {
    let top_rows = roi.height().div_ceil(2);
    let split = roi.row_min + top_rows; // first bottom row
    let mean = |r0: usize, r1: usize| -> f64 {
        let mut sum = 0u64;
        let mut count = 0u64;
        for r in r0..=r1 {
            for &p in &face.row(r)[roi.col_min..=roi.col_max] {
                sum += p as u64;
                count += 1;
            }
        }
        sum as f64 / count as f64
    };
    let top = mean(roi.row_min, split - 1);
    let bottom = if split <= roi.row_max {
        mean(split, roi.row_max)
    } else {
        0.0
    };
    (top, bottom)
}

/// Pupil-darkness pre-filter: a candidate center survives iff its gray
/// level is at most `(1 - threshold) * max(roi)`. Row-major booleans over
/// the ROI.
pub fn darkness_mask(face: &GrayImage, roi: Rect, threshold: f64) -> Result<Vec<bool>> {
    roi.check_inside(face.width(), face.height())?;
    let cutoff = (1.0 - threshold) * roi_max(face, roi) as f64;
    let mut mask = Vec::with_capacity(roi.width() * roi.height());
    for r in roi.row_min..=roi.row_max {
        for &p in &face.row(r)[roi.col_min..=roi.col_max] {
            mask.push(p as f64 <= cutoff);
        }
    }
    Ok(mask)
}

fn roi_max(face: &GrayImage, roi: Rect) -> u8 {
    let mut max = 0u8;
    for r in roi.row_min..=roi.row_max {
        for &p in &face.row(r)[roi.col_min..=roi.col_max] {
            max = max.max(p);
        }
    }
    max
}

/// Thresholded discriminator responses over the scanned candidate grid.
/// `None` cells were pre-filtered or scored below the acceptance
/// threshold.
#[derive(Clone, Debug)]
pub struct ZepImage {
    mode: Illumination,
    /// Face coordinates of the candidate center of grid cell (0, 0).
    origin: (usize, usize),
    stride: usize,
    rows: usize,
    cols: usize,
    cells: Vec<Option<f64>>,
}

impl ZepImage {
    pub fn mode(&self) -> Illumination {
        self.mode
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.cols + col]
    }

    /// Candidate center of a grid cell, in working-face coordinates.
    pub fn cell_center(&self, row: usize, col: usize) -> (usize, usize) {
        (
            self.origin.0 + row * self.stride,
            self.origin.1 + col * self.stride,
        )
    }

    pub fn accepted(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    #[cfg(test)]
    pub(crate) fn for_tests(
        mode: Illumination,
        origin: (usize, usize),
        stride: usize,
        rows: usize,
        cols: usize,
        cells: Vec<Option<f64>>,
    ) -> Self {
        assert_eq!(cells.len(), rows * cols);
        Self {
            mode,
            origin,
            stride,
            rows,
            cols,
            cells,
        }
    }
}

/// Scans one eye ROI with the sliding patch and the given discriminator.
///
/// Candidate centers sweep the ROI at the scan stride; each center's
/// patch is anchored so it stays inside the working face. Prefix-sum
/// tables over the scan region are built once, so accepted candidates
/// cost one feature assembly and one forward pass each.
pub fn scan(ctx: &FaceContext, roi: Rect, model: &Mlp, config: &Config) -> Result<ZepImage> {
    let params = ModeParams::for_mode(config, ctx.illumination);
    if model.head() != params.head {
        return Err(Error::HeadMismatch {
            expected: params.head.to_string(),
            found: model.head().to_string(),
        });
    }
    if model.n_in() != config.feature_len() {
        return Err(Error::DimensionMismatch(format!(
            "model expects {} inputs, configuration encodes {}",
            model.n_in(),
            config.feature_len()
        )));
    }

    let face = &ctx.face;
    let patch = config.patch_size;
    let half = patch / 2;
    let region = roi.dilated_clamped(half, face.width(), face.height());
    let grid = ScanGrid::new(face, region, patch, patch, config.scan_stride)?;

    let gray_tables = build_oriented_integrals(&face.crop(region)?);
    let energy = sobel_energy_region(face, region)?;
    let edge_tables = build_oriented_integrals(&energy);

    let mask = darkness_mask(face, roi, params.darkness_threshold)?;
    let enc = config.encoder_params();

    let mut cells = Vec::with_capacity(grid.rows() * grid.cols());
    for gr in 0..grid.rows() {
        for gc in 0..grid.cols() {
            let window = grid.window(gr, gc);
            let center = (window.row_min + half, window.col_min + half);
            // Candidate centers always land inside the ROI: the region is
            // the ROI dilated by the patch half-width.
            let mask_idx = (center.0 - roi.row_min) * roi.width() + (center.1 - roi.col_min);
            if !mask[mask_idx] {
                cells.push(None);
                continue;
            }
            let local = Rect {
                row_min: window.row_min - region.row_min,
                row_max: window.row_max - region.row_min,
                col_min: window.col_min - region.col_min,
                col_max: window.col_max - region.col_min,
            };
            let gray_h = fast_projection(&gray_tables, local, Axis::Horizontal)?;
            let gray_v = fast_projection(&gray_tables, local, Axis::Vertical)?;
            let edge_h = fast_projection(&edge_tables, local, Axis::Horizontal)?;
            let edge_v = fast_projection(&edge_tables, local, Axis::Vertical)?;
            let feature = assemble_zep(&gray_h, &gray_v, &edge_h, &edge_v, &enc)?;
            let response = model.forward(feature.values())?;
            cells.push((response > params.accept_threshold).then_some(response));
        }
    }

    Ok(ZepImage {
        mode: ctx.illumination,
        origin: (region.row_min + half, region.col_min + half),
        stride: config.scan_stride,
        rows: grid.rows(),
        cols: grid.cols(),
        cells,
    })
}

/// An 8-connected component of accepted response cells.
#[derive(Clone, Debug)]
pub struct Region {
    /// Grid coordinates of member cells.
    pub cells: Vec<(usize, usize)>,
    /// Grid-coordinate bounding rectangle.
    pub bbox: Rect,
    /// Sum of shifted (positive) responses.
    pub mass: f64,
    /// Mean member row in grid coordinates.
    pub centroid_row: f64,
    /// Largest raw response in the region.
    pub max_response: f64,
}

impl Region {
    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

/// Labels the accepted cells of a response map into 8-connected regions.
pub fn segment_regions(z: &ZepImage, params: &ModeParams) -> Vec<Region> {
    let mut seen = vec![false; z.rows * z.cols];
    let mut regions = Vec::new();
    let mut queue = Vec::new();

    for start in 0..z.cells.len() {
        if seen[start] || z.cells[start].is_none() {
            continue;
        }
        seen[start] = true;
        queue.clear();
        queue.push(start);
        let mut cells = Vec::new();
        let mut mass = 0.0;
        let mut row_sum = 0.0;
        let mut max_response = f64::MIN;
        let (mut rmin, mut rmax, mut cmin, mut cmax) = (usize::MAX, 0, usize::MAX, 0);

        while let Some(idx) = queue.pop() {
            let (r, c) = (idx / z.cols, idx % z.cols);
            let response = z.cells[idx].expect("queued cells are accepted");
            cells.push((r, c));
            mass += response + params.response_shift;
            row_sum += r as f64;
            max_response = max_response.max(response);
            rmin = rmin.min(r);
            rmax = rmax.max(r);
            cmin = cmin.min(c);
            cmax = cmax.max(c);

            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= z.rows as i64 || nc >= z.cols as i64 {
                        continue;
                    }
                    let nidx = nr as usize * z.cols + nc as usize;
                    if !seen[nidx] && z.cells[nidx].is_some() {
                        seen[nidx] = true;
                        queue.push(nidx);
                    }
                }
            }
        }

        let centroid_row = row_sum / cells.len() as f64;
        regions.push(Region {
            bbox: Rect::new(rmin, rmax, cmin, cmax).expect("bbox of nonempty region"),
            cells,
            mass,
            centroid_row,
            max_response,
        });
    }
    regions
}

/// Picks the eye region.
///
/// `LargestLower` considers every region within 60% of the maximum size
/// and takes the lowest-lying one, which discards eyebrow responses while
/// ignoring small noise blobs. `Largest` takes the biggest region. Ties
/// fall to larger mass, then to the lower centroid.
pub fn select_region(regions: &[Region], rule: RegionRule, eye: Eye) -> Result<&Region> {
    if regions.is_empty() {
        return Err(Error::NoCandidates(eye));
    }
    let best = match rule {
        RegionRule::LargestLower => {
            let max_size = regions.iter().map(Region::size).max().unwrap();
            let band = regions
                .iter()
                .filter(|r| r.size() as f64 >= 0.6 * max_size as f64);
            band.reduce(|best, r| {
                let key_best = (best.centroid_row, best.mass, best.size());
                let key_r = (r.centroid_row, r.mass, r.size());
                if key_r > key_best {
                    r
                } else {
                    best
                }
            })
            .unwrap()
        }
        RegionRule::Largest => regions
            .iter()
            .reduce(|best, r| {
                let key_best = (best.size(), best.mass, best.centroid_row);
                let key_r = (r.size(), r.mass, r.centroid_row);
                if key_r > key_best {
                    r
                } else {
                    best
                }
            })
            .unwrap(),
    };
    Ok(best)
}

/// Extracts the sub-pixel eye center of a selected region, in
/// working-face coordinates.
pub fn eye_center(region: &Region, z: &ZepImage, params: &ModeParams) -> Result<Point> {
    let (grid_row, grid_col) = match params.center_rule {
        CenterRule::WeightedCentroid => {
            let mut w_sum = 0.0;
            let mut r_sum = 0.0;
            let mut c_sum = 0.0;
            for &(r, c) in &region.cells {
                let response = z.get(r, c).expect("region cells are accepted");
                let w = response + params.response_shift;
                w_sum += w;
                r_sum += w * r as f64;
                c_sum += w * c as f64;
            }
            if w_sum <= 0.0 {
                return Err(Error::InvalidInput(
                    "region has zero total response weight".to_string(),
                ));
            }
            (r_sum / w_sum, c_sum / w_sum)
        }
        CenterRule::BoundingRectCenter => (
            (region.bbox.row_min + region.bbox.row_max) as f64 / 2.0,
            (region.bbox.col_min + region.bbox.col_max) as f64 / 2.0,
        ),
    };
    Ok(Point {
        row: z.origin.0 as f64 + grid_row * z.stride as f64,
        col: z.origin.1 as f64 + grid_col * z.stride as f64,
    })
}

/// Localized eye centers of one face, in source-image coordinates.
#[derive(Clone, Debug)]
pub struct EyePair {
    pub left: Point,
    pub right: Point,
    pub left_confidence: f64,
    pub right_confidence: f64,
    pub illumination: Illumination,
}

/// Runs the whole pipeline for one face rectangle.
///
/// The two eye ROIs are processed independently; an eye whose ROI yields
/// no accepted region surfaces as [`Error::NoCandidates`] instead of a
/// default location.
pub fn localize(
    img: &GrayImage,
    face_rect: Rect,
    frontal_model: &Mlp,
    lateral_model: &Mlp,
    config: &Config,
) -> Result<EyePair> {
    let ctx = make_face_context(img, face_rect, config)?;
    let model = match ctx.illumination {
        Illumination::Frontal => frontal_model,
        Illumination::Lateral => lateral_model,
    };
    let params = ModeParams::for_mode(config, ctx.illumination);

    let mut centers = [Point::new(0.0, 0.0); 2];
    let mut confidences = [0.0f64; 2];
    for (slot, (eye, roi)) in [(Eye::Left, ctx.left_roi), (Eye::Right, ctx.right_roi)]
        .into_iter()
        .enumerate()
    {
        let zep_image = scan(&ctx, roi, model, config)?;
        let regions = segment_regions(&zep_image, &params);
        let region = select_region(&regions, params.region_rule, eye)?;
        let center = eye_center(region, &zep_image, &params)?;
        centers[slot] =
            map_point_from_resized(center, &face_rect, config.face_size, config.face_size);
        confidences[slot] = region.max_response;
    }

    Ok(EyePair {
        left: centers[0],
        right: centers[1],
        left_confidence: confidences[0],
        right_confidence: confidences[1],
        illumination: ctx.illumination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_config() -> Config {
        Config::default()
    }

    #[test]
    fn illumination_mode_determines_all_branch_parameters() {
        let config = default_config();
        let frontal = ModeParams::for_mode(&config, Illumination::Frontal);
        assert_eq!(frontal.darkness_threshold, 0.15);
        assert_eq!(frontal.accept_threshold, 0.0);
        assert_eq!(frontal.region_rule, RegionRule::LargestLower);
        assert_eq!(frontal.center_rule, CenterRule::WeightedCentroid);
        assert_eq!(frontal.head, Head::Regression);
        assert_eq!(frontal.response_shift, 0.0);

        let lateral = ModeParams::for_mode(&config, Illumination::Lateral);
        assert_eq!(lateral.darkness_threshold, 0.3);
        assert_eq!(lateral.accept_threshold, -0.5);
        assert_eq!(lateral.region_rule, RegionRule::Largest);
        assert_eq!(lateral.center_rule, CenterRule::BoundingRectCenter);
        assert_eq!(lateral.head, Head::Binary);
        assert_eq!(lateral.response_shift, 0.5);
    }

    #[test]
    fn face_context_roi_geometry() {
        let img = GrayImage::constant(300, 300, 120);
        let ctx = make_face_context(&img, img.full_rect(), &default_config()).unwrap();
        assert_eq!(ctx.left_roi, Rect::new(78, 149, 75, 110).unwrap());
        assert_eq!(ctx.right_roi, Rect::new(78, 149, 189, 224).unwrap());
        assert_eq!(ctx.face, img);
        assert_eq!(ctx.illumination, Illumination::Frontal);
    }

    #[test]
    fn face_context_roi_fractions_hold_for_other_sizes() {
        let img = GrayImage::constant(200, 200, 90);
        let mut config = default_config();
        config.face_size = 240;
        let ctx = make_face_context(&img, img.full_rect(), &config).unwrap();
        for (actual, frac) in [
            (ctx.left_roi.row_min, 0.26),
            (ctx.left_roi.row_max + 1, 0.50),
            (ctx.left_roi.col_min, 0.25),
            (ctx.left_roi.col_max + 1, 0.37),
            (ctx.right_roi.col_min, 0.63),
            (ctx.right_roi.col_max + 1, 0.75),
        ] {
            assert!((actual as f64 - frac * 240.0).abs() <= 1.0);
        }
    }

    #[test]
    fn face_context_rejects_tiny_faces() {
        let img = GrayImage::constant(100, 100, 0);
        let rect = Rect::new(0, 9, 0, 9).unwrap();
        assert!(make_face_context(&img, rect, &default_config()).is_err());
    }

    #[test]
    fn illumination_uniform_face_is_frontal() {
        let img = GrayImage::constant(300, 300, 77);
        let l = Rect::new(78, 149, 75, 110).unwrap();
        let r = Rect::new(78, 149, 189, 224).unwrap();
        assert_eq!(
            detect_illumination(&img, l, r, 0.5, 1.75).unwrap(),
            Illumination::Frontal
        );
    }

    #[test]
    fn illumination_bright_top_half_is_lateral() {
        // Left ROI top half 200, bottom half 80: ratio 2.5.
        let l = Rect::new(78, 149, 75, 110).unwrap();
        let r = Rect::new(78, 149, 189, 224).unwrap();
        let img = GrayImage::from_fn(300, 300, |row, col| {
            if l.contains(row, col) {
                if row < 78 + 36 {
                    200
                } else {
                    80
                }
            } else {
                120
            }
        });
        assert_eq!(
            detect_illumination(&img, l, r, 0.5, 1.75).unwrap(),
            Illumination::Lateral
        );
    }

    #[test]
    fn illumination_boundary_ratio_is_frontal() {
        // Exactly 1.75 on both per-eye ratios; the band is closed.
        let l = Rect::new(78, 149, 75, 110).unwrap();
        let r = Rect::new(78, 149, 189, 224).unwrap();
        let img = GrayImage::from_fn(300, 300, |row, _| if row < 78 + 36 { 175 } else { 100 });
        assert_eq!(
            detect_illumination(&img, l, r, 0.5, 1.75).unwrap(),
            Illumination::Frontal
        );
    }

    #[test]
    fn illumination_zero_half_is_lateral() {
        let l = Rect::new(78, 149, 75, 110).unwrap();
        let r = Rect::new(78, 149, 189, 224).unwrap();
        let img = GrayImage::from_fn(300, 300, |row, _| if row < 78 + 36 { 150 } else { 0 });
        assert_eq!(
            detect_illumination(&img, l, r, 0.5, 1.75).unwrap(),
            Illumination::Lateral
        );
    }

    #[test]
    fn darkness_mask_uniform_roi_keeps_nothing() {
        let img = GrayImage::constant(100, 100, 90);
        let roi = Rect::new(10, 29, 10, 29).unwrap();
        let mask = darkness_mask(&img, roi, 0.15).unwrap();
        assert!(mask.iter().all(|&k| !k));
    }

    #[test]
    fn darkness_mask_threshold_arithmetic() {
        // Max 200 at threshold 0.15 keeps values <= 170.
        let roi = Rect::new(0, 0, 0, 3).unwrap();
        let img = GrayImage::new(4, 1, vec![200, 171, 170, 30]).unwrap();
        let mask = darkness_mask(&img, roi, 0.15).unwrap();
        assert_eq!(mask, vec![false, false, true, true]);
    }

    #[test]
    fn darkness_mask_all_zero_roi_keeps_everything() {
        let img = GrayImage::constant(50, 50, 0);
        let roi = Rect::new(5, 14, 5, 14).unwrap();
        assert!(darkness_mask(&img, roi, 0.3).unwrap().iter().all(|&k| k));
    }

    #[test]
    fn scan_of_uniform_roi_yields_all_sentinels() {
        let img = GrayImage::constant(300, 300, 140);
        let config = default_config();
        let ctx = make_face_context(&img, img.full_rect(), &config).unwrap();
        let model = Mlp::with_default_sizing(config.feature_len(), Head::Regression, 1).unwrap();
        let z = scan(&ctx, ctx.left_roi, &model, &config).unwrap();
        assert_eq!(z.accepted(), 0);
        assert_eq!(z.rows(), 36);
        assert_eq!(z.cols(), 18);
        assert_eq!(z.cell_center(0, 0), (78, 75));
        assert_eq!(z.cell_center(35, 17), (148, 109));
    }

    #[test]
    fn scan_rejects_wrong_head() {
        let img = GrayImage::constant(300, 300, 140);
        let config = default_config();
        let ctx = make_face_context(&img, img.full_rect(), &config).unwrap();
        let model = Mlp::with_default_sizing(config.feature_len(), Head::Binary, 1).unwrap();
        assert!(matches!(
            scan(&ctx, ctx.left_roi, &model, &config),
            Err(Error::HeadMismatch { .. })
        ));
    }

    fn frontal_params() -> ModeParams {
        ModeParams::for_mode(&default_config(), Illumination::Frontal)
    }

    fn zimage(rows: usize, cols: usize, cells: Vec<Option<f64>>) -> ZepImage {
        ZepImage::for_tests(Illumination::Frontal, (78, 75), 2, rows, cols, cells)
    }

    #[test]
    fn segment_empty_map_has_no_regions() {
        let z = zimage(3, 3, vec![None; 9]);
        assert!(segment_regions(&z, &frontal_params()).is_empty());
    }

    #[test]
    fn segment_single_cell() {
        let mut cells = vec![None; 9];
        cells[4] = Some(0.8);
        let z = zimage(3, 3, cells);
        let regions = segment_regions(&z, &frontal_params());
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].size(), 1);
        assert_eq!(regions[0].cells[0], (1, 1));
    }

    #[test]
    fn segment_joins_diagonal_cells() {
        let mut cells = vec![None; 9];
        cells[0] = Some(0.5);
        cells[4] = Some(0.5);
        let z = zimage(3, 3, cells);
        let regions = segment_regions(&z, &frontal_params());
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].size(), 2);
    }

    fn region_at(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>, response: f64) -> (Vec<(usize, usize)>, f64) {
        let cells: Vec<(usize, usize)> =
            rows.flat_map(|r| cols.clone().map(move |c| (r, c))).collect();
        (cells, response)
    }

    fn build_map(rows: usize, cols: usize, blobs: &[(Vec<(usize, usize)>, f64)]) -> ZepImage {
        let mut cells = vec![None; rows * cols];
        for (blob, response) in blobs {
            for &(r, c) in blob {
                cells[r * cols + c] = Some(*response);
            }
        }
        zimage(rows, cols, cells)
    }

    #[test]
    fn select_prefers_lower_of_comparable_regions() {
        // Eyebrow-like blob above an equal-size eye blob.
        let brow = region_at(1..=2, 2..=5, 0.5);
        let eye = region_at(8..=9, 2..=5, 0.5);
        let z = build_map(12, 8, &[brow, eye]);
        let regions = segment_regions(&z, &frontal_params());
        assert_eq!(regions.len(), 2);
        let selected = select_region(&regions, RegionRule::LargestLower, Eye::Left).unwrap();
        assert!(selected.centroid_row > 7.0);
    }

    #[test]
    fn select_largest_ignores_position() {
        let small_low = region_at(10..=11, 1..=2, 0.9);
        let big_high = region_at(1..=3, 1..=5, 0.2);
        let z = build_map(12, 8, &[small_low, big_high]);
        let params = ModeParams::for_mode(&default_config(), Illumination::Frontal);
        let regions = segment_regions(&z, &params);
        let selected = select_region(&regions, RegionRule::Largest, Eye::Right).unwrap();
        assert_eq!(selected.size(), 15);
    }

    #[test]
    fn select_single_region_returns_it() {
        let z = build_map(4, 4, &[region_at(1..=1, 1..=1, 0.3)]);
        let regions = segment_regions(&z, &frontal_params());
        assert_eq!(
            select_region(&regions, RegionRule::LargestLower, Eye::Left)
                .unwrap()
                .size(),
            1
        );
    }

    #[test]
    fn select_empty_surfaces_no_candidates() {
        assert!(matches!(
            select_region(&[], RegionRule::Largest, Eye::Left),
            Err(Error::NoCandidates(Eye::Left))
        ));
    }

    #[test]
    fn center_of_single_cell_maps_exactly() {
        let z = build_map(6, 6, &[region_at(2..=2, 3..=3, 0.7)]);
        let params = frontal_params();
        let regions = segment_regions(&z, &params);
        let p = eye_center(&regions[0], &z, &params).unwrap();
        assert_eq!(p, Point::new(78.0 + 2.0 * 2.0, 75.0 + 3.0 * 2.0));
    }

    #[test]
    fn centroid_of_symmetric_blob_is_its_middle() {
        let z = build_map(8, 8, &[region_at(2..=4, 3..=5, 0.6)]);
        let params = frontal_params();
        let regions = segment_regions(&z, &params);
        let p = eye_center(&regions[0], &z, &params).unwrap();
        assert_eq!(p, Point::new(78.0 + 3.0 * 2.0, 75.0 + 4.0 * 2.0));
    }

    #[test]
    fn centroid_of_ring_lands_in_the_hole() {
        // Annulus: 3x3 block minus its center, as from a glasses glare.
        let mut cells = region_at(2..=4, 2..=4, 0.5).0;
        cells.retain(|&(r, c)| !(r == 3 && c == 3));
        let z = build_map(8, 8, &[(cells, 0.5)]);
        let params = frontal_params();
        let regions = segment_regions(&z, &params);
        assert_eq!(regions[0].size(), 8);
        let p = eye_center(&regions[0], &z, &params).unwrap();
        assert_eq!(p, Point::new(78.0 + 3.0 * 2.0, 75.0 + 3.0 * 2.0));
    }

    #[test]
    fn bounding_rect_center_rule() {
        let z = build_map(8, 8, &[region_at(2..=5, 1..=2, 0.0)]);
        let mut params = ModeParams::for_mode(&default_config(), Illumination::Lateral);
        params.center_rule = CenterRule::BoundingRectCenter;
        // Lateral acceptance admits responses above -0.5; shift keeps
        // weights positive either way.
        let regions = segment_regions(&z, &params);
        let p = eye_center(&regions[0], &z, &params).unwrap();
        assert_eq!(p, Point::new(78.0 + 3.5 * 2.0, 75.0 + 1.5 * 2.0));
    }
}
