//! Integral and edge projections over rectangular sub-windows.
//!
//! Two routes compute every projection:
//!
//! * a naive per-window reference that sums each element directly, and
//! * a fast path backed by per-row / per-column prefix-sum tables
//!   ([`OrientedIntegralImages`]), where each projection element falls out
//!   of a single subtraction.
//!
//! Both routes accumulate in integers and divide once per element, so they
//! agree bit-for-bit. [`scan_projections`] amortizes one table build over
//! every sliding-window position inside a region, which is what makes
//! dense scanning cheap: the table build costs one pass over the region
//! regardless of how many windows are evaluated.

use crate::error::{Error, Result};
use crate::image::{GrayImage, Rect};

/// Projection orientation: `Horizontal` profiles run along columns (one
/// value per column, averaging over rows), `Vertical` along rows.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// A 1D profile of per-column or per-row averages over a window.
///
/// Keeps the exact integer sums next to the divided values; downstream
/// normalization works on the integers so that identical window content
/// yields identical bits.
#[derive(Clone, PartialEq, Debug)]
pub struct Projection {
    axis: Axis,
    sums: Vec<u64>,
    divisor: u32,
    values: Vec<f64>,
}

impl Projection {
    /// Builds a projection from exact integer sums and their common
    /// divisor.
    pub fn from_sums(axis: Axis, sums: Vec<u64>, divisor: u32) -> Self {
        debug_assert!(divisor > 0);
        let values = sums
            .iter()
            .map(|&s| s as f64 / divisor as f64)
            .collect();
        Self {
            axis,
            sums,
            divisor,
            values,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The averaged profile values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Exact integer numerators of the averages.
    pub fn sums(&self) -> &[u64] {
        &self.sums
    }

    /// Number of samples averaged into each element.
    pub fn divisor(&self) -> u32 {
        self.divisor
    }
}

/// Any row-major grid of non-negative integer samples that projections can
/// be computed over.
pub trait Raster {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn sample(&self, row: usize, col: usize) -> u64;
}

impl Raster for GrayImage {
    fn width(&self) -> usize {
        GrayImage::width(self)
    }

    fn height(&self) -> usize {
        GrayImage::height(self)
    }

    #[inline]
    fn sample(&self, row: usize, col: usize) -> u64 {
        self.get(row, col) as u64
    }
}

/// Per-pixel squared gradient energy from the two 3x3 Sobel operators.
///
/// The outermost one-pixel border, where the stencil would leave the
/// raster, is zero. Values are exact integers (max 2 * 1020^2).
#[derive(Clone, PartialEq, Debug)]
pub struct SobelEnergy {
    width: usize,
    height: usize,
    values: Vec<u32>,
}

impl SobelEnergy {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        debug_assert!(row < self.height && col < self.width);
        self.values[row * self.width + col]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }
}

impl Raster for SobelEnergy {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn sample(&self, row: usize, col: usize) -> u64 {
        self.values[row * self.width + col] as u64
    }
}

/// Sobel gradient energy of the whole image.
pub fn sobel_energy(img: &GrayImage) -> Result<SobelEnergy> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::Geometry(format!(
            "Sobel needs at least a 3x3 image, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    sobel_energy_region(img, img.full_rect())
}

/// Sobel gradient energy restricted to `region`, in region-local
/// coordinates.
///
/// The stencil reads the full image, so the result equals the matching
/// crop of [`sobel_energy`] over the whole frame; only pixels on the image
/// border are zero. Computing per region keeps dense scans from paying for
/// areas that are never examined.
pub fn sobel_energy_region(img: &GrayImage, region: Rect) -> Result<SobelEnergy> {
    region.check_inside(img.width(), img.height())?;
    let (w, h) = (region.width(), region.height());
    let mut values = vec![0u32; w * h];

    // Empty ranges (raster thinner than the stencil) leave all zeros.
    let row_lo = region.row_min.max(1);
    let row_hi = region.row_max.min(img.height().saturating_sub(2));
    let col_lo = region.col_min.max(1);
    let col_hi = region.col_max.min(img.width().saturating_sub(2));
    if row_lo > row_hi || col_lo > col_hi {
        return Ok(SobelEnergy {
            width: w,
            height: h,
            values,
        });
    }

    for r in row_lo..=row_hi {
        let above = img.row(r - 1);
        let here = img.row(r);
        let below = img.row(r + 1);
        let out = &mut values[(r - region.row_min) * w..(r - region.row_min + 1) * w];
        for c in col_lo..=col_hi {
            let (cl, cr) = (c - 1, c + 1);
            let gx = (above[cr] as i32 - above[cl] as i32)
                + 2 * (here[cr] as i32 - here[cl] as i32)
                + (below[cr] as i32 - below[cl] as i32);
            let gy = (below[cl] as i32 - above[cl] as i32)
                + 2 * (below[c] as i32 - above[c] as i32)
                + (below[cr] as i32 - above[cr] as i32);
            out[c - region.col_min] = (gx * gx + gy * gy) as u32;
        }
    }
    Ok(SobelEnergy {
        width: w,
        height: h,
        values,
    })
}

/// Reference projection: averages `raster` over `rect` element by element.
///
/// Horizontal yields one value per column (mean over the rect's rows);
/// Vertical one value per row.
pub fn integral_projection_naive<R: Raster>(raster: &R, rect: Rect, axis: Axis) -> Result<Projection> {
    rect.check_inside(raster.width(), raster.height())?;
    match axis {
        Axis::Horizontal => {
            let mut sums = vec![0u64; rect.width()];
            for r in rect.row_min..=rect.row_max {
                for (c, sum) in (rect.col_min..=rect.col_max).zip(sums.iter_mut()) {
                    *sum += raster.sample(r, c);
                }
            }
            Ok(Projection::from_sums(axis, sums, rect.height() as u32))
        }
        Axis::Vertical => {
            let mut sums = vec![0u64; rect.height()];
            for (r, sum) in (rect.row_min..=rect.row_max).zip(sums.iter_mut()) {
                for c in rect.col_min..=rect.col_max {
                    *sum += raster.sample(r, c);
                }
            }
            Ok(Projection::from_sums(axis, sums, rect.width() as u32))
        }
    }
}

/// Reference edge projection: the integral projection formula applied to
/// the whole-image Sobel energy raster.
pub fn edge_projection_naive(img: &GrayImage, rect: Rect, axis: Axis) -> Result<Projection> {
    let energy = sobel_energy(img)?;
    integral_projection_naive(&energy, rect, axis)
}

/// Per-column and per-row prefix-sum tables of a raster.
///
/// `col_prefix(j)[i]` is the sum of the first `i` samples of column `j`
/// (leading zero entry), so any column segment collapses to one
/// subtraction; `row_prefix(i)` is the analogue along rows. Both tables
/// are filled in a single pass over the raster.
#[derive(Clone, Debug)]
pub struct OrientedIntegralImages {
    width: usize,
    height: usize,
    // (height + 1) x width, row-major: entry [i][j] sums rows < i of column j.
    col_cumsum: Vec<u64>,
    // height x (width + 1), row-major: entry [i][j] sums cols < j of row i.
    row_cumsum: Vec<u64>,
}

/// Builds the oriented prefix-sum tables for a raster.
pub fn build_oriented_integrals<R: Raster>(raster: &R) -> OrientedIntegralImages {
    let (w, h) = (raster.width(), raster.height());
    let mut col_cumsum = vec![0u64; (h + 1) * w];
    let mut row_cumsum = vec![0u64; h * (w + 1)];

    for i in 0..h {
        let (prev, next) = col_cumsum[i * w..(i + 2) * w].split_at_mut(w);
        let row_pref = &mut row_cumsum[i * (w + 1)..(i + 1) * (w + 1)];
        let mut running = 0u64;
        for j in 0..w {
            let v = raster.sample(i, j);
            next[j] = prev[j] + v;
            running += v;
            row_pref[j + 1] = running;
        }
    }
    OrientedIntegralImages {
        width: w,
        height: h,
        col_cumsum,
        row_cumsum,
    }
}

impl OrientedIntegralImages {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Prefix sums down column `j`: length `height + 1`, leading zero.
    pub fn col_prefix(&self, j: usize) -> impl Iterator<Item = u64> + '_ {
        (0..=self.height).map(move |i| self.col_cumsum[i * self.width + j])
    }

    /// Prefix sums across row `i`: length `width + 1`, leading zero.
    pub fn row_prefix(&self, i: usize) -> &[u64] {
        &self.row_cumsum[i * (self.width + 1)..(i + 1) * (self.width + 1)]
    }
}

/// Projection of `rect` straight from the prefix-sum tables: one
/// subtraction plus one division per element. Agrees bit-for-bit with
/// [`integral_projection_naive`] on the raster the tables were built from.
pub fn fast_projection(
    tables: &OrientedIntegralImages,
    rect: Rect,
    axis: Axis,
) -> Result<Projection> {
    rect.check_inside(tables.width, tables.height)?;
    match axis {
        Axis::Horizontal => {
            let w = tables.width;
            let top = &tables.col_cumsum[rect.row_min * w..rect.row_min * w + w];
            let bottom = &tables.col_cumsum[(rect.row_max + 1) * w..(rect.row_max + 2) * w];
            let sums = (rect.col_min..=rect.col_max)
                .map(|j| bottom[j] - top[j])
                .collect();
            Ok(Projection::from_sums(axis, sums, rect.height() as u32))
        }
        Axis::Vertical => {
            let sums = (rect.row_min..=rect.row_max)
                .map(|i| {
                    let pref = tables.row_prefix(i);
                    pref[rect.col_max + 1] - pref[rect.col_min]
                })
                .collect();
            Ok(Projection::from_sums(axis, sums, rect.width() as u32))
        }
    }
}

/// The four profiles of one window: gray-level and edge-energy averages in
/// both orientations.
#[derive(Clone, Debug)]
pub struct WindowProjections {
    pub window: Rect,
    pub gray_h: Projection,
    pub gray_v: Projection,
    pub edge_h: Projection,
    pub edge_v: Projection,
}

/// Slides a `window_h` x `window_w` window over `roi` with the given
/// stride, yielding all four projections per position in row-major order.
///
/// Gray and Sobel-energy prefix tables are built once for the whole ROI;
/// every window position afterwards costs one subtraction per projection
/// element. Results are identical to computing each window naively.
pub fn scan_projections(
    img: &GrayImage,
    roi: Rect,
    window_h: usize,
    window_w: usize,
    stride: usize,
) -> Result<ProjectionScan> {
    let positions = ScanGrid::new(img, roi, window_h, window_w, stride)?;
    let gray_tables = build_oriented_integrals(&img.crop(roi)?);
    let energy = sobel_energy_region(img, roi)?;
    let edge_tables = build_oriented_integrals(&energy);
    Ok(ProjectionScan {
        positions,
        gray_tables,
        edge_tables,
        next: 0,
    })
}

/// Naive counterpart of [`scan_projections`]: sums every window element
/// directly. Kept as the reference and benchmark baseline.
pub fn scan_projections_naive(
    img: &GrayImage,
    roi: Rect,
    window_h: usize,
    window_w: usize,
    stride: usize,
) -> Result<NaiveProjectionScan> {
    let positions = ScanGrid::new(img, roi, window_h, window_w, stride)?;
    let energy = sobel_energy_region(img, roi)?;
    Ok(NaiveProjectionScan {
        positions,
        img: img.clone(),
        energy,
        next: 0,
    })
}

/// Stride-aligned window placement inside a region.
#[derive(Clone, Copy, Debug)]
pub struct ScanGrid {
    roi: Rect,
    window_h: usize,
    window_w: usize,
    stride: usize,
    rows: usize,
    cols: usize,
}

impl ScanGrid {
    pub fn new(
        img: &GrayImage,
        roi: Rect,
        window_h: usize,
        window_w: usize,
        stride: usize,
    ) -> Result<Self> {
        roi.check_inside(img.width(), img.height())?;
        if window_h == 0 || window_w == 0 || stride == 0 {
            return Err(Error::InvalidInput(
                "window dimensions and stride must be positive".to_string(),
            ));
        }
        if window_h > roi.height() || window_w > roi.width() {
            return Err(Error::WindowTooLarge {
                width: window_w,
                height: window_h,
                region: roi.to_string(),
            });
        }
        let rows = (roi.height() - window_h) / stride + 1;
        let cols = (roi.width() - window_w) / stride + 1;
        Ok(Self {
            roi,
            window_h,
            window_w,
            stride,
            rows,
            cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Window rectangle of grid cell `(gr, gc)`, in image coordinates.
    pub fn window(&self, gr: usize, gc: usize) -> Rect {
        let row_min = self.roi.row_min + gr * self.stride;
        let col_min = self.roi.col_min + gc * self.stride;
        Rect {
            row_min,
            row_max: row_min + self.window_h - 1,
            col_min,
            col_max: col_min + self.window_w - 1,
        }
    }

    /// Same rectangle translated into ROI-local coordinates.
    fn window_local(&self, gr: usize, gc: usize) -> Rect {
        let row_min = gr * self.stride;
        let col_min = gc * self.stride;
        Rect {
            row_min,
            row_max: row_min + self.window_h - 1,
            col_min,
            col_max: col_min + self.window_w - 1,
        }
    }
}

/// Iterator over fast-path window projections. See [`scan_projections`].
pub struct ProjectionScan {
    positions: ScanGrid,
    gray_tables: OrientedIntegralImages,
    edge_tables: OrientedIntegralImages,
    next: usize,
}

impl ProjectionScan {
    pub fn grid(&self) -> &ScanGrid {
        &self.positions
    }
}

impl Iterator for ProjectionScan {
    type Item = WindowProjections;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.positions.len() {
            return None;
        }
        let gr = self.next / self.positions.cols;
        let gc = self.next % self.positions.cols;
        self.next += 1;

        let local = self.positions.window_local(gr, gc);
        // Rects are in-bounds by construction.
        Some(WindowProjections {
            window: self.positions.window(gr, gc),
            gray_h: fast_projection(&self.gray_tables, local, Axis::Horizontal).unwrap(),
            gray_v: fast_projection(&self.gray_tables, local, Axis::Vertical).unwrap(),
            edge_h: fast_projection(&self.edge_tables, local, Axis::Horizontal).unwrap(),
            edge_v: fast_projection(&self.edge_tables, local, Axis::Vertical).unwrap(),
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.positions.len() - self.next;
        (left, Some(left))
    }
}

/// Iterator over naively computed window projections.
pub struct NaiveProjectionScan {
    positions: ScanGrid,
    img: GrayImage,
    energy: SobelEnergy,
    next: usize,
}

impl Iterator for NaiveProjectionScan {
    type Item = WindowProjections;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.positions.len() {
            return None;
        }
        let gr = self.next / self.positions.cols;
        let gc = self.next % self.positions.cols;
        self.next += 1;

        let window = self.positions.window(gr, gc);
        let local = self.positions.window_local(gr, gc);
        Some(WindowProjections {
            window,
            gray_h: integral_projection_naive(&self.img, window, Axis::Horizontal).unwrap(),
            gray_v: integral_projection_naive(&self.img, window, Axis::Vertical).unwrap(),
            edge_h: integral_projection_naive(&self.energy, local, Axis::Horizontal).unwrap(),
            edge_v: integral_projection_naive(&self.energy, local, Axis::Vertical).unwrap(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.gen())
    }

    fn transposed(img: &GrayImage) -> GrayImage {
        GrayImage::from_fn(img.height(), img.width(), |r, c| img.get(c, r))
    }

    #[test]
    fn naive_projection_of_constant_is_constant() {
        let img = GrayImage::constant(9, 6, 7);
        let rect = Rect::new(1, 4, 2, 7).unwrap();
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let p = integral_projection_naive(&img, rect, axis).unwrap();
            assert!(p.values().iter().all(|&v| v == 7.0));
        }
    }

    #[test]
    fn naive_projection_small_example() {
        let img = GrayImage::new(2, 2, vec![0, 2, 4, 6]).unwrap();
        let rect = img.full_rect();
        let h = integral_projection_naive(&img, rect, Axis::Horizontal).unwrap();
        assert_eq!(h.values(), &[2.0, 4.0]);
        let v = integral_projection_naive(&img, rect, Axis::Vertical).unwrap();
        assert_eq!(v.values(), &[1.0, 5.0]);
    }

    #[test]
    fn naive_projection_rejects_out_of_bounds() {
        let img = GrayImage::constant(4, 4, 0);
        let rect = Rect::new(0, 4, 0, 3).unwrap();
        assert!(matches!(
            integral_projection_naive(&img, rect, Axis::Horizontal),
            Err(Error::RectOutOfBounds { .. })
        ));
    }

    #[test]
    fn sobel_constant_image_has_zero_interior() {
        let energy = sobel_energy(&GrayImage::constant(8, 8, 99)).unwrap();
        assert!(energy.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn sobel_step_edge_energy() {
        // Left half 0, right half 100: the gradient across the step is
        // 4 * 100 in one direction, nothing in the other.
        let img = GrayImage::from_fn(8, 8, |_, c| if c < 4 { 0 } else { 100 });
        let energy = sobel_energy(&img).unwrap();
        for r in 1..7 {
            assert_eq!(energy.get(r, 3), 160_000);
            assert_eq!(energy.get(r, 4), 160_000);
            assert_eq!(energy.get(r, 1), 0);
            assert_eq!(energy.get(r, 6), 0);
        }
    }

    #[test]
    fn sobel_rejects_tiny_images() {
        assert!(sobel_energy(&GrayImage::constant(2, 8, 0)).is_err());
    }

    #[test]
    fn sobel_region_of_thin_raster_is_all_zero() {
        let img = GrayImage::from_fn(5, 2, |r, c| (r * 50 + c) as u8);
        let energy = sobel_energy_region(&img, img.full_rect()).unwrap();
        assert!(energy.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn sobel_commutes_with_transpose() {
        let img = random_image(11, 7, 21);
        let a = sobel_energy(&img).unwrap();
        let b = sobel_energy(&transposed(&img)).unwrap();
        for r in 0..img.height() {
            for c in 0..img.width() {
                assert_eq!(a.get(r, c), b.get(c, r));
            }
        }
    }

    #[test]
    fn sobel_region_matches_whole_image_crop() {
        let img = random_image(40, 30, 33);
        let whole = sobel_energy(&img).unwrap();
        let region = Rect::new(3, 22, 5, 31).unwrap();
        let local = sobel_energy_region(&img, region).unwrap();
        for r in 0..region.height() {
            for c in 0..region.width() {
                assert_eq!(
                    local.get(r, c),
                    whole.get(r + region.row_min, c + region.col_min)
                );
            }
        }
    }

    #[test]
    fn edge_projection_equals_projection_of_energy() {
        let img = random_image(20, 16, 4);
        let rect = Rect::new(2, 13, 3, 17).unwrap();
        let energy = sobel_energy(&img).unwrap();
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let a = edge_projection_naive(&img, rect, axis).unwrap();
            let b = integral_projection_naive(&energy, rect, axis).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn edge_projection_additive_invariance() {
        // The gradient stencil cancels constant offsets, so edge profiles
        // of img and img + c agree exactly when nothing clips.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let img = GrayImage::from_fn(24, 24, |_, _| rng.gen_range(30..=200));
        let shifted = img.shifted(40);
        let rect = Rect::new(2, 20, 2, 20).unwrap();
        for axis in [Axis::Horizontal, Axis::Vertical] {
            assert_eq!(
                edge_projection_naive(&img, rect, axis).unwrap(),
                edge_projection_naive(&shifted, rect, axis).unwrap()
            );
        }
    }

    #[test]
    fn cumsum_tables_match_direct_summation() {
        let img = random_image(64, 64, 9);
        let tables = build_oriented_integrals(&img);
        // Column prefix of a hand-built column.
        let col: Vec<u64> = tables.col_prefix(13).collect();
        assert_eq!(col[0], 0);
        let mut acc = 0u64;
        for i in 0..64 {
            acc += img.get(i, 13) as u64;
            assert_eq!(col[i + 1], acc);
        }
        // Row prefix of a hand-built row.
        let row = tables.row_prefix(40);
        assert_eq!(row[0], 0);
        let mut acc = 0u64;
        for j in 0..64 {
            acc += img.get(40, j) as u64;
            assert_eq!(row[j + 1], acc);
        }
    }

    #[test]
    fn cumsum_small_column_example() {
        let img = GrayImage::new(1, 3, vec![3, 1, 2]).unwrap();
        let tables = build_oriented_integrals(&img);
        let col: Vec<u64> = tables.col_prefix(0).collect();
        assert_eq!(col, vec![0, 3, 4, 6]);
    }

    #[test]
    fn cumsum_zero_raster_gives_zero_tables() {
        let tables = build_oriented_integrals(&GrayImage::constant(5, 4, 0));
        assert!(tables.col_cumsum.iter().all(|&v| v == 0));
        assert!(tables.row_cumsum.iter().all(|&v| v == 0));
    }

    fn all_rects(w: usize, h: usize) -> impl Iterator<Item = Rect> {
        (0..h).flat_map(move |r0| {
            (r0..h).flat_map(move |r1| {
                (0..w).flat_map(move |c0| {
                    (c0..w).map(move |c1| Rect::new(r0, r1, c0, c1).unwrap())
                })
            })
        })
    }

    #[test]
    fn fast_projection_matches_naive_exhaustively() {
        let img = random_image(16, 16, 1);
        let tables = build_oriented_integrals(&img);
        for rect in all_rects(16, 16) {
            for axis in [Axis::Horizontal, Axis::Vertical] {
                let fast = fast_projection(&tables, rect, axis).unwrap();
                let naive = integral_projection_naive(&img, rect, axis).unwrap();
                assert_eq!(fast, naive, "mismatch at {rect} {axis:?}");
            }
        }
    }

    #[test]
    fn fast_projection_full_raster_window() {
        let img = random_image(12, 10, 2);
        let tables = build_oriented_integrals(&img);
        let rect = img.full_rect();
        assert_eq!(
            fast_projection(&tables, rect, Axis::Vertical).unwrap(),
            integral_projection_naive(&img, rect, Axis::Vertical).unwrap()
        );
    }

    #[test]
    fn fast_projection_disjoint_rects_share_tables() {
        let img = random_image(30, 30, 3);
        let tables = build_oriented_integrals(&img);
        for rect in [
            Rect::new(0, 9, 0, 9).unwrap(),
            Rect::new(15, 29, 18, 29).unwrap(),
        ] {
            for axis in [Axis::Horizontal, Axis::Vertical] {
                assert_eq!(
                    fast_projection(&tables, rect, axis).unwrap(),
                    integral_projection_naive(&img, rect, axis).unwrap()
                );
            }
        }
    }

    #[test]
    fn scan_single_position_when_roi_equals_window() {
        let img = random_image(20, 20, 5);
        let roi = Rect::new(4, 13, 6, 15).unwrap();
        let scan: Vec<_> = scan_projections(&img, roi, 10, 10, 3).unwrap().collect();
        assert_eq!(scan.len(), 1);
        assert_eq!(scan[0].window, roi);
    }

    #[test]
    fn scan_position_count_and_order() {
        let img = random_image(10, 10, 6);
        let scan = scan_projections(&img, img.full_rect(), 4, 4, 2).unwrap();
        let windows: Vec<Rect> = scan.map(|w| w.window).collect();
        assert_eq!(windows.len(), 16);
        // Row-major: first four share row_min 0 with col_min 0,2,4,6.
        assert_eq!(windows[0], Rect::new(0, 3, 0, 3).unwrap());
        assert_eq!(windows[1], Rect::new(0, 3, 2, 5).unwrap());
        assert_eq!(windows[4], Rect::new(2, 5, 0, 3).unwrap());
        assert_eq!(windows[15], Rect::new(6, 9, 6, 9).unwrap());
    }

    #[test]
    fn scan_rejects_oversized_window() {
        let img = random_image(80, 80, 7);
        let roi = Rect::new(0, 39, 0, 39).unwrap();
        assert!(matches!(
            scan_projections(&img, roi, 71, 71, 2),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn scan_matches_naive_per_window() {
        let img = random_image(48, 40, 8);
        let roi = Rect::new(3, 38, 2, 45).unwrap();
        let fast: Vec<_> = scan_projections(&img, roi, 12, 17, 3).unwrap().collect();
        let naive: Vec<_> = scan_projections_naive(&img, roi, 12, 17, 3)
            .unwrap()
            .collect();
        assert_eq!(fast.len(), naive.len());
        for (f, n) in fast.iter().zip(&naive) {
            assert_eq!(f.window, n.window);
            assert_eq!(f.gray_h, n.gray_h);
            assert_eq!(f.gray_v, n.gray_v);
            assert_eq!(f.edge_h, n.edge_h);
            assert_eq!(f.edge_v, n.edge_v);
        }
    }

    #[test]
    fn projection_row_duplication_keeps_horizontal_profile() {
        let img = random_image(23, 14, 10);
        let stretched = GrayImage::from_fn(23, 28, |r, c| img.get(r / 2, c));
        let rect = img.full_rect();
        let rect2 = stretched.full_rect();
        let a = integral_projection_naive(&img, rect, Axis::Horizontal).unwrap();
        let b = integral_projection_naive(&stretched, rect2, Axis::Horizontal).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn projection_col_duplication_keeps_vertical_profile() {
        let img = random_image(9, 15, 11);
        let stretched = GrayImage::from_fn(18, 15, |r, c| img.get(r, c / 2));
        let a = integral_projection_naive(&img, img.full_rect(), Axis::Vertical).unwrap();
        let b = integral_projection_naive(&stretched, stretched.full_rect(), Axis::Vertical)
            .unwrap();
        assert_eq!(a.values(), b.values());
    }

    proptest! {
        #[test]
        fn fast_equals_naive_on_random_rects(
            seed in 0u64..500,
            w in 3usize..32,
            h in 3usize..32,
        ) {
            let img = random_image(w, h, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let r0 = rng.gen_range(0..h);
            let r1 = rng.gen_range(r0..h);
            let c0 = rng.gen_range(0..w);
            let c1 = rng.gen_range(c0..w);
            let rect = Rect::new(r0, r1, c0, c1).unwrap();

            let gray_tables = build_oriented_integrals(&img);
            let energy = sobel_energy(&img).unwrap();
            let edge_tables = build_oriented_integrals(&energy);
            for axis in [Axis::Horizontal, Axis::Vertical] {
                prop_assert_eq!(
                    fast_projection(&gray_tables, rect, axis).unwrap(),
                    integral_projection_naive(&img, rect, axis).unwrap()
                );
                prop_assert_eq!(
                    fast_projection(&edge_tables, rect, axis).unwrap(),
                    integral_projection_naive(&energy, rect, axis).unwrap()
                );
            }
        }
    }
}
