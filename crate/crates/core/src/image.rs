//! 8-bit grayscale raster plus the quality and histogram metrics used
//! throughout the pipeline.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Image dimensions, `rows x cols` (height x width).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub rows: u32,
    pub cols: u32,
}

impl Dims {
    pub fn new(rows: u32, cols: u32) -> Self {
        Dims { rows, cols }
    }

    /// Total pixel count.
    pub fn pixels(&self) -> usize {
        self.rows as usize * self.cols as usize
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// An 8-bit grayscale image stored row-major.
///
/// The pixel vector length always equals `width * height`; intensities use
/// the full `u8` range, bit depth is exactly 8.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Builds an image from row-major pixel data.
    ///
    /// Panics if `pixels.len() != dims.pixels()` or either dimension is zero.
    pub fn new(dims: Dims, pixels: Vec<u8>) -> Self {
        assert!(dims.rows > 0 && dims.cols > 0, "image dimensions must be positive");
        assert_eq!(pixels.len(), dims.pixels(), "pixel buffer does not match dimensions");
        GrayImage { width: dims.cols, height: dims.rows, pixels }
    }

    /// Constant-intensity image, handy for tests and capacity probes.
    pub fn constant(dims: Dims, value: u8) -> Self {
        Self::new(dims, vec![value; dims.pixels()])
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(dims.pixels());
        for r in 0..dims.rows {
            for c in 0..dims.cols {
                pixels.push(f(r, c));
            }
        }
        Self::new(dims, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Dimensions as `rows x cols`.
    pub fn dims(&self) -> Dims {
        Dims::new(self.height, self.width)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    /// Intensity at `(row, col)`. Panics when out of bounds.
    #[inline]
    pub fn get(&self, row: u32, col: u32) -> u8 {
        assert!(row < self.height && col < self.width, "pixel index out of bounds");
        self.pixels[row as usize * self.width as usize + col as usize]
    }

    #[inline]
    pub fn set(&mut self, row: u32, col: u32, value: u8) {
        assert!(row < self.height && col < self.width, "pixel index out of bounds");
        self.pixels[row as usize * self.width as usize + col as usize] = value;
    }

    /// Linear index of `(row, col)` in the row-major pixel buffer.
    #[inline]
    pub fn index_of(&self, row: u32, col: u32) -> usize {
        row as usize * self.width as usize + col as usize
    }
}

/// Intensity histogram: one count per 8-bit value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; 256],
}

impl Histogram {
    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn count(&self, value: u8) -> u64 {
        self.counts[value as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Intensity with the highest count; ties resolve to the smallest value.
    pub fn peak(&self) -> u8 {
        let mut best = 0usize;
        for v in 1..256 {
            if self.counts[v] > self.counts[best] {
                best = v;
            }
        }
        best as u8
    }
}

/// Counts pixel intensities over the whole image.
pub fn histogram(img: &GrayImage) -> Histogram {
    let mut counts = [0u64; 256];
    for &p in img.pixels() {
        counts[p as usize] += 1;
    }
    Histogram { counts }
}

/// Peak signal-to-noise ratio between two images of equal size.
///
/// `Infinite` is a distinct marker for pixel-identical inputs, never a float
/// overflow; it formats as `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Infinite,
    Finite(f64),
}

impl Psnr {
    pub fn is_lossless(&self) -> bool {
        matches!(self, Psnr::Infinite)
    }

    /// Decibel value, `None` for the infinity marker.
    pub fn db(&self) -> Option<f64> {
        match self {
            Psnr::Infinite => None,
            Psnr::Finite(db) => Some(*db),
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Infinite => write!(f, "inf"),
            Psnr::Finite(db) => write!(f, "{:.2}", db),
        }
    }
}

/// Mismatched dimensions passed to [`psnr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionMismatch {
    pub left: Dims,
    pub right: Dims,
}

impl fmt::Display for DimensionMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dimension mismatch: {} vs {}", self.left, self.right)
    }
}

impl core::error::Error for DimensionMismatch {}

/// PSNR in dB against the 8-bit peak of 255, or [`Psnr::Infinite`] when the
/// images are pixel-identical.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<Psnr, DimensionMismatch> {
    if a.dims() != b.dims() {
        return Err(DimensionMismatch { left: a.dims(), right: b.dims() });
    }
    let mut sq_sum: u64 = 0;
    for (&x, &y) in a.pixels().iter().zip(b.pixels()) {
        let d = x as i64 - y as i64;
        sq_sum += (d * d) as u64;
    }
    if sq_sum == 0 {
        return Ok(Psnr::Infinite);
    }
    let mse = sq_sum as f64 / a.pixels().len() as f64;
    Ok(Psnr::Finite(10.0 * libm::log10(255.0 * 255.0 / mse)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_identical_is_infinite() {
        let img = GrayImage::constant(Dims::new(4, 4), 77);
        assert_eq!(psnr(&img, &img).unwrap(), Psnr::Infinite);
        let zero = GrayImage::constant(Dims::new(1, 1), 0);
        assert!(psnr(&zero, &zero).unwrap().is_lossless());
    }

    #[test]
    fn psnr_single_pixel_off_by_one() {
        let a = GrayImage::new(Dims::new(1, 1), vec![100]);
        let b = GrayImage::new(Dims::new(1, 1), vec![101]);
        // MSE = 1, so 10*log10(255^2) = 48.1308...
        let db = psnr(&a, &b).unwrap().db().unwrap();
        assert!((db - 48.1308).abs() < 1e-3, "got {db}");
    }

    #[test]
    fn psnr_is_symmetric() {
        let a = GrayImage::from_fn(Dims::new(7, 9), |r, c| (r * 31 + c * 7) as u8);
        let b = GrayImage::from_fn(Dims::new(7, 9), |r, c| (r * 13 + c * 29 + 5) as u8);
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn psnr_rejects_mismatched_dims() {
        let a = GrayImage::constant(Dims::new(2, 2), 0);
        let b = GrayImage::constant(Dims::new(3, 2), 0);
        assert!(psnr(&a, &b).is_err());
    }

    #[test]
    fn histogram_constant_image() {
        let img = GrayImage::constant(Dims::new(4, 4), 7);
        let h = histogram(&img);
        assert_eq!(h.count(7), 16);
        assert_eq!(h.total(), 16);
        assert_eq!(h.peak(), 7);
        assert_eq!(h.counts().iter().filter(|&&c| c != 0).count(), 1);
    }

    #[test]
    fn histogram_total_equals_pixel_count() {
        let img = GrayImage::from_fn(Dims::new(17, 33), |r, c| (r ^ (c * 3)) as u8);
        assert_eq!(histogram(&img).total(), 33 * 17);
    }

    #[test]
    fn psnr_display_formats() {
        use alloc::string::ToString;
        assert_eq!(Psnr::Infinite.to_string(), "inf");
        assert_eq!(Psnr::Finite(48.1308).to_string(), "48.13");
    }
}
