//! Pixel predictors and prediction-error statistics.
//!
//! WPP (white plus prediction) and BCP (black cross prediction) are the
//! two predictors reconstruction actually runs on the chess-board classes.
//! MED and GAP are the classic raster-scan predictors from lossless
//! compression, included for comparative error analysis only.

use crate::image::GrayImage;
use crate::lattice::{black_target_count, white_target_count};

/// Prediction error `e = p - p̃`, always in `[-255, 255]`.
pub type PredictionError = i16;

/// The four supported predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Predictor {
    /// Mean of the four 4-connected neighbors; applies to white targets.
    Wpp,
    /// Mean of the four diagonal neighbors; applies to black targets.
    Bcp,
    /// LOCO-I median edge detector over (west, north, northwest).
    Med,
    /// CALIC gradient-adjusted predictor.
    Gap,
}

impl Predictor {
    pub const ALL: [Predictor; 4] = [Predictor::Wpp, Predictor::Bcp, Predictor::Med, Predictor::Gap];

    pub fn label(self) -> &'static str {
        match self {
            Predictor::Wpp => "WPP",
            Predictor::Bcp => "BCP",
            Predictor::Med => "MED",
            Predictor::Gap => "GAP",
        }
    }

    /// Predicts pixel `(r, c)`. The caller must keep the predictor's
    /// context in bounds; any interior pixel (two-pixel margin) is safe
    /// for all four predictors.
    pub fn predict(self, img: &GrayImage, r: u32, c: u32) -> u8 {
        match self {
            Predictor::Wpp => wpp(img, r, c),
            Predictor::Bcp => bcp(img, r, c),
            Predictor::Med => med(img, r, c),
            Predictor::Gap => gap(img, r, c),
        }
    }
}

fn mean4(a: u8, b: u8, c: u8, d: u8) -> u8 {
    // round-half-up mean, exact in integer arithmetic
    ((a as u32 + b as u32 + c as u32 + d as u32 + 2) / 4) as u8
}

/// Round-half-up mean of the up/down/left/right neighbors.
pub fn wpp(img: &GrayImage, r: u32, c: u32) -> u8 {
    mean4(
        img.get(r - 1, c),
        img.get(r + 1, c),
        img.get(r, c - 1),
        img.get(r, c + 1),
    )
}

/// Round-half-up mean of the four diagonal neighbors.
pub fn bcp(img: &GrayImage, r: u32, c: u32) -> u8 {
    mean4(
        img.get(r - 1, c - 1),
        img.get(r - 1, c + 1),
        img.get(r + 1, c - 1),
        img.get(r + 1, c + 1),
    )
}

/// LOCO-I median edge detector.
pub fn med(img: &GrayImage, r: u32, c: u32) -> u8 {
    let w = img.get(r, c - 1);
    let n = img.get(r - 1, c);
    let nw = img.get(r - 1, c - 1);
    let (lo, hi) = (w.min(n), w.max(n));
    if nw >= hi {
        lo
    } else if nw <= lo {
        hi
    } else {
        (w as i32 + n as i32 - nw as i32) as u8
    }
}

/// CALIC gradient-adjusted prediction, integer arithmetic, clamped to
/// `[0, 255]`.
pub fn gap(img: &GrayImage, r: u32, c: u32) -> u8 {
    let w = img.get(r, c - 1) as i32;
    let n = img.get(r - 1, c) as i32;
    let nw = img.get(r - 1, c - 1) as i32;
    let ne = img.get(r - 1, c + 1) as i32;
    let ww = img.get(r, c - 2) as i32;
    let nn = img.get(r - 2, c) as i32;
    let nne = img.get(r - 2, c + 1) as i32;

    let dh = (w - ww).abs() + (n - nw).abs() + (n - ne).abs();
    let dv = (w - nw).abs() + (n - nn).abs() + (ne - nne).abs();

    let pred = if dv - dh > 80 {
        w
    } else if dh - dv > 80 {
        n
    } else {
        let base = ((w + n) >> 1) + ((ne - nw) >> 2);
        if dv - dh > 32 {
            (base + w) >> 1
        } else if dv - dh > 8 {
            (3 * base + w) >> 2
        } else if dh - dv > 32 {
            (base + n) >> 1
        } else if dh - dv > 8 {
            (3 * base + n) >> 2
        } else {
            base
        }
    };
    pred.clamp(0, 255) as u8
}

/// Histogram of prediction errors over `[-255, 255]`.
#[derive(Clone)]
pub struct ErrorHistogram {
    counts: [u64; 511],
}

impl ErrorHistogram {
    pub fn new() -> Self {
        ErrorHistogram { counts: [0; 511] }
    }

    fn add(&mut self, e: PredictionError) {
        self.counts[(e as i32 + 255) as usize] += 1;
    }

    pub fn count(&self, e: PredictionError) -> u64 {
        assert!((-255..=255).contains(&e));
        self.counts[(e as i32 + 255) as usize]
    }

    /// Pairs `(e, count)` for every error value, including zero counts.
    pub fn iter(&self) -> impl Iterator<Item = (PredictionError, u64)> + '_ {
        self.counts.iter().enumerate().map(|(i, &n)| ((i as i32 - 255) as i16, n))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Count of errors of magnitude `failure_threshold` or above — the
    /// ones large enough to flip a reconstruction decision.
    pub fn failures(&self) -> u64 {
        self.iter().filter(|&(e, _)| e.unsigned_abs() >= FAILURE_THRESHOLD).map(|(_, n)| n).sum()
    }
}

impl Default for ErrorHistogram {
    fn default() -> Self {
        Self::new()
    }
}

/// Errors of magnitude ≥ 64 can overcome the gap histogram modification
/// opens up, so they count as prediction failures.
pub const FAILURE_THRESHOLD: u16 = 64;

fn eligible(predictor: Predictor, r: u32, c: u32) -> bool {
    match predictor {
        Predictor::Wpp => (r + c) % 2 == 1,
        Predictor::Bcp => r % 2 == 1 && c % 2 == 1,
        // raster predictors have no parity; every interior pixel counts
        Predictor::Med | Predictor::Gap => true,
    }
}

/// Prediction-error histogram over the predictor's eligible interior
/// pixels: matching-parity targets for WPP/BCP, all interior pixels for
/// MED/GAP. Empty when the image has no interior.
pub fn error_histogram(img: &GrayImage, predictor: Predictor) -> ErrorHistogram {
    let dims = img.dims();
    let mut hist = ErrorHistogram::new();
    if dims.rows < 5 || dims.cols < 5 {
        return hist;
    }
    for r in 2..=dims.rows - 3 {
        for c in 2..=dims.cols - 3 {
            if eligible(predictor, r, c) {
                let e = img.get(r, c) as i16 - predictor.predict(img, r, c) as i16;
                hist.add(e);
            }
        }
    }
    hist
}

/// Fraction of eligible pixels whose prediction error reaches the failure
/// threshold; `0` for images with no eligible pixels.
pub fn failure_probability(img: &GrayImage, predictor: Predictor) -> f64 {
    let hist = error_histogram(img, predictor);
    let total = hist.total();
    if total == 0 {
        return 0.0;
    }
    hist.failures() as f64 / total as f64
}

#[allow(dead_code)]
fn eligible_count(img: &GrayImage, predictor: Predictor) -> u64 {
    match predictor {
        Predictor::Wpp => white_target_count(img.dims()),
        Predictor::Bcp => black_target_count(img.dims()),
        Predictor::Med | Predictor::Gap => {
            let d = img.dims();
            if d.rows < 5 || d.cols < 5 {
                0
            } else {
                (d.rows as u64 - 4) * (d.cols as u64 - 4)
            }
        }
    }
}
