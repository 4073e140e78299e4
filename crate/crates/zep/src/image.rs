//! Grayscale rasters, rectangle geometry, binary PGM I/O, bilinear
//! resampling and seeded Gaussian degradation.
//!
//! Everything here is immutable after construction and safe to share
//! across threads; all operations are pure functions.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// 8-bit grayscale raster, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

impl GrayImage {
    /// Builds an image from row-major pixel data.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Geometry(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Geometry(format!(
                "pixel buffer length {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single gray level.
    pub fn constant(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        debug_assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Full-image rectangle.
    pub fn full_rect(&self) -> Rect {
        Rect {
            row_min: 0,
            row_max: self.height - 1,
            col_min: 0,
            col_max: self.width - 1,
        }
    }

    /// Copies `rect` out into its own image.
    pub fn crop(&self, rect: Rect) -> Result<GrayImage> {
        rect.check_inside(self.width, self.height)?;
        let mut pixels = Vec::with_capacity(rect.width() * rect.height());
        for r in rect.row_min..=rect.row_max {
            pixels.extend_from_slice(&self.row(r)[rect.col_min..=rect.col_max]);
        }
        Ok(GrayImage {
            width: rect.width(),
            height: rect.height(),
            pixels,
        })
    }

    /// Adds a constant offset to every pixel, saturating at the ends of
    /// the 8-bit range.
    pub fn shifted(&self, offset: i32) -> GrayImage {
        let pixels = self
            .pixels
            .iter()
            .map(|&p| (p as i32 + offset).clamp(0, 255) as u8)
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Inclusive row/column bounds of a rectangular sub-window.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Rect {
    pub row_min: usize,
    pub row_max: usize,
    pub col_min: usize,
    pub col_max: usize,
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}..={}, {}..={}]",
            self.row_min, self.row_max, self.col_min, self.col_max
        )
    }
}

impl Rect {
    pub fn new(row_min: usize, row_max: usize, col_min: usize, col_max: usize) -> Result<Self> {
        if row_min > row_max || col_min > col_max {
            return Err(Error::Geometry(format!(
                "rectangle bounds out of order: rows {row_min}..={row_max}, cols {col_min}..={col_max}"
            )));
        }
        Ok(Self {
            row_min,
            row_max,
            col_min,
            col_max,
        })
    }

    /// Number of columns covered.
    pub fn width(&self) -> usize {
        self.col_max - self.col_min + 1
    }

    /// Number of rows covered.
    pub fn height(&self) -> usize {
        self.row_max - self.row_min + 1
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.row_min && row <= self.row_max && col >= self.col_min && col <= self.col_max
    }

    /// Errors unless the rectangle fits a `width` x `height` raster.
    pub fn check_inside(&self, width: usize, height: usize) -> Result<()> {
        if self.row_max >= height || self.col_max >= width {
            return Err(Error::RectOutOfBounds {
                rect: self.to_string(),
                width,
                height,
            });
        }
        Ok(())
    }

    /// Grows the rectangle by `margin` on every side, clamped to a
    /// `width` x `height` raster.
    pub fn dilated_clamped(&self, margin: usize, width: usize, height: usize) -> Rect {
        Rect {
            row_min: self.row_min.saturating_sub(margin),
            row_max: (self.row_max + margin).min(height - 1),
            col_min: self.col_min.saturating_sub(margin),
            col_max: (self.col_max + margin).min(width - 1),
        }
    }
}

/// Sub-pixel image location.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Point {
    pub row: f64,
    pub col: f64,
}

impl Point {
    pub fn new(row: f64, col: f64) -> Self {
        Self { row, col }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.row - other.row).hypot(self.col - other.col)
    }
}

// ---------------------------------------------------------------------------
// Binary PGM (P5)
//
// ASCII header "P5", whitespace-separated width / height / maxval with
// optional `#` comments, one whitespace byte, then the raw payload.
// Only 8-bit graymaps (maxval <= 255) are accepted.
// ---------------------------------------------------------------------------

/// Decodes a binary PGM byte stream.
pub fn decode_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;

    if data.len() < 2 || &data[0..2] != b"P5" {
        return Err(Error::MalformedHeader(
            "missing P5 magic number".to_string(),
        ));
    }
    pos += 2;

    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        *field = parse_header_int(data, &mut pos)?;
    }
    let [width, height, maxval] = fields;

    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero image dimension {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }

    // Exactly one whitespace byte separates the header from the payload.
    match data.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(Error::MalformedHeader(
                "missing whitespace before payload".to_string(),
            ))
        }
    }

    let expected = width as usize * height as usize;
    let payload = &data[pos..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }

    GrayImage::new(width as usize, height as usize, payload[..expected].to_vec())
}

fn parse_header_int(data: &[u8], pos: &mut usize) -> Result<u32> {
    // Skip whitespace and `#` comment lines.
    loop {
        match data.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = data.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(data.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedHeader(
            "expected integer header field".to_string(),
        ));
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedHeader("unparseable header field".to_string()))
}

/// Encodes an image as a binary PGM byte stream.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Reads a binary PGM file.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_pgm(&fs::read(path)?)
}

/// Writes a binary PGM file; `load_pgm` reproduces the image bit-exactly.
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_pgm(img))?)
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Bilinear resize with corner-aligned sample mapping: output index `d`
/// samples the source at `d * (src_len - 1) / (dst_len - 1)`, so resizing
/// to the same dimensions is the identity and a 1x1 source broadcasts.
pub fn resize_bilinear(img: &GrayImage, new_w: usize, new_h: usize) -> Result<GrayImage> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::Geometry(format!(
            "resize target must be positive, got {new_w}x{new_h}"
        )));
    }
    let row_scale = axis_scale(img.height, new_h);
    let col_scale = axis_scale(img.width, new_w);

    let mut pixels = Vec::with_capacity(new_w * new_h);
    for r in 0..new_h {
        let src_r = r as f64 * row_scale;
        let r0 = src_r.floor() as usize;
        let r1 = (r0 + 1).min(img.height - 1);
        let fr = src_r - r0 as f64;
        for c in 0..new_w {
            let src_c = c as f64 * col_scale;
            let c0 = src_c.floor() as usize;
            let c1 = (c0 + 1).min(img.width - 1);
            let fc = src_c - c0 as f64;

            let v00 = img.get(r0, c0) as f64;
            let v01 = img.get(r0, c1) as f64;
            let v10 = img.get(r1, c0) as f64;
            let v11 = img.get(r1, c1) as f64;
            let top = v00 * (1.0 - fc) + v01 * fc;
            let bottom = v10 * (1.0 - fc) + v11 * fc;
            let value = top * (1.0 - fr) + bottom * fr;
            pixels.push(value.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(new_w, new_h, pixels)
}

fn axis_scale(src_len: usize, dst_len: usize) -> f64 {
    if dst_len > 1 && src_len > 1 {
        (src_len - 1) as f64 / (dst_len - 1) as f64
    } else {
        0.0
    }
}

/// Maps a source-image point into the frame of `resize_bilinear(crop(src_rect))`
/// output of size `work_w` x `work_h`. Uses the same corner-aligned convention
/// as the resampler so coordinates and pixels stay in register.
pub fn map_point_into_resized(p: Point, src_rect: &Rect, work_w: usize, work_h: usize) -> Point {
    let rs = inverse_axis_scale(src_rect.height(), work_h);
    let cs = inverse_axis_scale(src_rect.width(), work_w);
    Point {
        row: (p.row - src_rect.row_min as f64) * rs,
        col: (p.col - src_rect.col_min as f64) * cs,
    }
}

/// Inverse of [`map_point_into_resized`].
pub fn map_point_from_resized(p: Point, src_rect: &Rect, work_w: usize, work_h: usize) -> Point {
    let rs = inverse_axis_scale(src_rect.height(), work_h);
    let cs = inverse_axis_scale(src_rect.width(), work_w);
    let row = if rs > 0.0 { p.row / rs } else { 0.0 };
    let col = if cs > 0.0 { p.col / cs } else { 0.0 };
    Point {
        row: row + src_rect.row_min as f64,
        col: col + src_rect.col_min as f64,
    }
}

fn inverse_axis_scale(src_len: usize, dst_len: usize) -> f64 {
    if dst_len > 1 && src_len > 1 {
        (dst_len - 1) as f64 / (src_len - 1) as f64
    } else {
        1.0
    }
}

// ---------------------------------------------------------------------------
// Degradation
// ---------------------------------------------------------------------------

/// Adds zero-mean Gaussian noise with standard deviation `sigma` gray
/// levels to every pixel, clamped to [0, 255]. Bit-reproducible per seed.
pub fn add_gaussian_noise(img: &GrayImage, sigma: f64, seed: u64) -> Result<GrayImage> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::InvalidInput(format!(
            "noise sigma must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidInput(format!("invalid noise parameters: {e}")))?;
    let pixels = img
        .pixels
        .iter()
        .map(|&p| {
            let n: f64 = normal.sample(&mut rng);
            (p as f64 + n).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Ok(GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    })
}
