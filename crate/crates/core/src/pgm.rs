//! PGM codec for maxval-255 images: binary `P5` and ASCII `P2` on decode,
//! bit-exact `P5` on encode.

use alloc::vec::Vec;
use core::fmt;

use crate::image::{Dims, GrayImage};

/// Pixel count ceiling, keeps indices in `u32` range and allocations sane.
const MAX_PIXELS: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgmError {
    /// First token is neither `P5` nor `P2`.
    BadMagic,
    /// Header token missing or not a decimal number.
    BadHeader(&'static str),
    /// Zero dimension, or the pixel count overflows the supported range.
    BadDimensions,
    /// Only 8-bit images are supported.
    UnsupportedMaxval(u64),
    /// Fewer samples than `width * height`.
    Truncated { expected: usize, actual: usize },
    /// A `P2` sample is not in `0..=255`.
    SampleOutOfRange(u64),
}

impl fmt::Display for PgmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgmError::BadMagic => write!(f, "not a PGM file (expected P5 or P2 magic)"),
            PgmError::BadHeader(what) => write!(f, "malformed PGM header: {what}"),
            PgmError::BadDimensions => write!(f, "invalid PGM dimensions"),
            PgmError::UnsupportedMaxval(v) => {
                write!(f, "unsupported maxval {v} (only 255 is supported)")
            }
            PgmError::Truncated { expected, actual } => {
                write!(f, "truncated pixel data: expected {expected} samples, got {actual}")
            }
            PgmError::SampleOutOfRange(v) => write!(f, "sample value {v} exceeds 255"),
        }
    }
}

impl core::error::Error for PgmError {}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Scanner { bytes, pos: 0 }
    }

    /// Skips whitespace and `#` comments (comments run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self, what: &'static str) -> Result<&'a [u8], PgmError> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PgmError::BadHeader(what));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &'static str) -> Result<u64, PgmError> {
        let tok = self.token(what)?;
        let mut value: u64 = 0;
        for &b in tok {
            if !b.is_ascii_digit() {
                return Err(PgmError::BadHeader(what));
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
                .ok_or(PgmError::BadHeader(what))?;
        }
        Ok(value)
    }
}

/// Decodes a `P5` (binary) or `P2` (ASCII) PGM byte stream.
///
/// Comments are accepted anywhere header whitespace is allowed; the maxval
/// must be exactly 255. Decoding is lossless: every stored sample becomes
/// one pixel.
pub fn decode(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let mut s = Scanner::new(bytes);
    let magic = s.token("magic")?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(PgmError::BadMagic),
    };

    let width = s.number("width")?;
    let height = s.number("height")?;
    if width == 0 || height == 0 || width > u32::MAX as u64 || height > u32::MAX as u64 {
        return Err(PgmError::BadDimensions);
    }
    let count = width * height;
    if count > MAX_PIXELS {
        return Err(PgmError::BadDimensions);
    }
    let count = count as usize;

    let maxval = s.number("maxval")?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }

    let pixels = if binary {
        // Exactly one whitespace byte separates the maxval from the raster.
        if s.pos >= bytes.len() || !bytes[s.pos].is_ascii_whitespace() {
            return Err(PgmError::BadHeader("raster separator"));
        }
        let data = &bytes[s.pos + 1..];
        if data.len() < count {
            return Err(PgmError::Truncated { expected: count, actual: data.len() });
        }
        data[..count].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(count);
        for i in 0..count {
            s.skip_separators();
            if s.pos >= bytes.len() {
                return Err(PgmError::Truncated { expected: count, actual: i });
            }
            let v = s.number("sample")?;
            if v > 255 {
                return Err(PgmError::SampleOutOfRange(v));
            }
            pixels.push(v as u8);
        }
        pixels
    };

    Ok(GrayImage::new(Dims::new(height as u32, width as u32), pixels))
}

/// Encodes as binary `P5` with maxval 255: single whitespace separators,
/// no comments. `decode(encode(img))` reproduces `img` exactly.
pub fn encode(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels().len() + 32);
    out.extend_from_slice(b"P5\n");
    push_decimal(&mut out, img.width());
    out.push(b' ');
    push_decimal(&mut out, img.height());
    out.extend_from_slice(b"\n255\n");
    out.extend_from_slice(img.pixels());
    out
}

fn push_decimal(out: &mut Vec<u8>, mut v: u32) {
    let mut digits = [0u8; 10];
    let mut n = 0;
    loop {
        digits[n] = b'0' + (v % 10) as u8;
        v /= 10;
        n += 1;
        if v == 0 {
            break;
        }
    }
    while n > 0 {
        n -= 1;
        out.push(digits[n]);
    }
}
