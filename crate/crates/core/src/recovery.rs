//! Recipient-side reconstruction: decrypt, then resolve each group's MSB
//! ambiguity by prediction.
//!
//! After decryption, border and reference pixels are already exact; each
//! target group is either exactly right or has every MSB complemented.
//! The group's two candidates are compared by integrated absolute
//! prediction error and the smaller one wins. Black targets go first
//! (their diagonal context is reference-only, hence exact), then white
//! targets predict from the now-recovered black classes. The margin of
//! each decision grades how trustworthy it was.

use alloc::vec::Vec;
use core::fmt;

use crate::crypto::{xor_image, ImageKey};
use crate::image::{Dims, GrayImage};
use crate::lattice::{LatticePlan, TargetClass};
use crate::predict::Predictor;

/// Integrated absolute prediction errors of a group's two candidate
/// decodings: the decrypted pixels as they stand, and the same pixels
/// with every MSB complemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidatePair {
    pub as_is: u64,
    pub flipped: u64,
}

/// Outcome of comparing a candidate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    /// Complement the group's MSBs.
    pub flip: bool,
    /// Absolute error gap between the candidates; small margins mean the
    /// choice was nearly arbitrary.
    pub margin: u64,
}

/// Chooses the candidate with smaller integrated error; ties keep the
/// pixels as they are.
pub fn decide(pair: CandidatePair) -> Decision {
    Decision {
        flip: pair.flipped < pair.as_is,
        margin: pair.as_is.abs_diff(pair.flipped),
    }
}

/// Sums `|p - p̃|` over one group's pixels, predicting with the given
/// predictor on the current image state.
pub fn integrate_errors(img: &GrayImage, group: &[u32], predictor: Predictor) -> u64 {
    candidate_pair(img, group, predictor).as_is
}

/// Integrated errors for both candidates of a group in one pass.
pub fn candidate_pair(img: &GrayImage, group: &[u32], predictor: Predictor) -> CandidatePair {
    let cols = img.dims().cols;
    let mut pair = CandidatePair { as_is: 0, flipped: 0 };
    for &idx in group {
        let (r, c) = (idx / cols, idx % cols);
        let pred = predictor.predict(img, r, c) as i32;
        let p = img.get(r, c) as i32;
        pair.as_is += (p - pred).unsigned_abs() as u64;
        pair.flipped += ((p ^ 0x80) - pred).unsigned_abs() as u64;
    }
    pair
}

/// Reliability grade of one group's reconstruction decision, from the
/// decision margin relative to the group size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum RiskClass {
    /// Margin below 16 per-pixel units: the decision was close to a coin
    /// toss and may well be wrong.
    #[cfg_attr(feature = "serde", serde(rename = "HiR"))]
    High,
    #[cfg_attr(feature = "serde", serde(rename = "MeR"))]
    Medium,
    #[cfg_attr(feature = "serde", serde(rename = "LoR"))]
    Low,
    #[cfg_attr(feature = "serde", serde(rename = "VLoR"))]
    VeryLow,
}

impl RiskClass {
    pub const ALL: [RiskClass; 4] =
        [RiskClass::High, RiskClass::Medium, RiskClass::Low, RiskClass::VeryLow];

    /// Grades a decision margin for a group of `n` pixels: high below
    /// `16n`, medium below `32n`, low below `64n`, very low otherwise.
    pub fn classify(margin: u64, n: u32) -> RiskClass {
        let n = n as u64;
        if margin < 16 * n {
            RiskClass::High
        } else if margin < 32 * n {
            RiskClass::Medium
        } else if margin < 64 * n {
            RiskClass::Low
        } else {
            RiskClass::VeryLow
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RiskClass::High => "HiR",
            RiskClass::Medium => "MeR",
            RiskClass::Low => "LoR",
            RiskClass::VeryLow => "VLoR",
        }
    }
}

impl fmt::Display for RiskClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One group's reconstruction record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SubsetRisk {
    pub class: TargetClass,
    /// Position of the group within its class, in plan order.
    pub index: u64,
    pub margin: u64,
    pub risk: RiskClass,
    pub flipped: bool,
}

/// Per-class tallies of decision grades.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RiskCounts {
    pub high: u64,
    pub medium: u64,
    pub low: u64,
    pub very_low: u64,
}

impl RiskCounts {
    fn add(&mut self, class: RiskClass) {
        match class {
            RiskClass::High => self.high += 1,
            RiskClass::Medium => self.medium += 1,
            RiskClass::Low => self.low += 1,
            RiskClass::VeryLow => self.very_low += 1,
        }
    }

    pub fn get(&self, class: RiskClass) -> u64 {
        match class {
            RiskClass::High => self.high,
            RiskClass::Medium => self.medium,
            RiskClass::Low => self.low,
            RiskClass::VeryLow => self.very_low,
        }
    }

    pub fn total(&self) -> u64 {
        self.high + self.medium + self.low + self.very_low
    }
}

/// Full account of a reconstruction: one record per group plus per-class
/// grade tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RiskReport {
    subsets: Vec<SubsetRisk>,
    white: RiskCounts,
    black: RiskCounts,
}

impl RiskReport {
    fn push(&mut self, class: TargetClass, index: u64, decision: Decision, n: u32) {
        let risk = RiskClass::classify(decision.margin, n);
        self.counts_mut(class).add(risk);
        self.subsets.push(SubsetRisk { class, index, margin: decision.margin, risk, flipped: decision.flip });
    }

    fn counts_mut(&mut self, class: TargetClass) -> &mut RiskCounts {
        match class {
            TargetClass::White => &mut self.white,
            TargetClass::Black => &mut self.black,
        }
    }

    pub fn counts(&self, class: TargetClass) -> &RiskCounts {
        match class {
            TargetClass::White => &self.white,
            TargetClass::Black => &self.black,
        }
    }

    /// Per-group records, black phase first, each class in plan order.
    pub fn subsets(&self) -> &[SubsetRisk] {
        &self.subsets
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReconstructError {
    DimensionMismatch { plan: Dims, image: Dims },
}

impl fmt::Display for ReconstructError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReconstructError::DimensionMismatch { plan, image } => {
                write!(f, "plan built for {plan} but image is {image}")
            }
        }
    }
}

impl core::error::Error for ReconstructError {}

/// Recovers the original image from a marked encrypted image using only
/// the image key. Wrong parameters (group sizes, scramble seed) are
/// undetectable and produce garbage; they are trusted inputs.
pub fn reconstruct(
    marked: &GrayImage,
    key: &ImageKey,
    plan: &LatticePlan,
) -> Result<(GrayImage, RiskReport), ReconstructError> {
    if marked.dims() != plan.dims() {
        return Err(ReconstructError::DimensionMismatch {
            plan: plan.dims(),
            image: marked.dims(),
        });
    }
    let mut img = xor_image(marked, key);
    let mut report = RiskReport::default();
    // black first: its diagonal context is reference/border pixels, exact
    // straight after decryption; white prediction then sees recovered
    // black values
    for (class, predictor) in
        [(TargetClass::Black, Predictor::Bcp), (TargetClass::White, Predictor::Wpp)]
    {
        let n = plan.group_size(class);
        for (j, group) in plan.subsets(class).enumerate() {
            let decision = decide(candidate_pair(&img, group, predictor));
            if decision.flip {
                for &idx in group {
                    img.pixels_mut()[idx as usize] ^= 0x80;
                }
            }
            report.push(class, j as u64, decision, n);
        }
    }
    Ok((img, report))
}
