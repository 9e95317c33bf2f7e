//! Report records and their CSV / JSON renderings.

use std::fmt::Write as _;

use rdhei_core::image::Psnr;
use rdhei_core::predict::{error_histogram, failure_probability, Predictor};
use rdhei_core::recovery::{RiskClass, RiskCounts, RiskReport};
use rdhei_core::{GrayImage, TargetClass};
use serde::Serialize;

/// Everything a full pipeline run on one image produces.
#[derive(Debug, Clone, Serialize)]
pub struct ImageReport {
    pub image: String,
    pub rows: u32,
    pub cols: u32,
    pub n_white: u32,
    pub n_black: u32,
    pub capacity_bits: u64,
    pub payload_bits: u64,
    /// `"inf"` for exact recovery, otherwise decibels with two decimals.
    pub psnr: String,
    /// Numeric decibel value; `None` means lossless.
    pub psnr_db: Option<f64>,
    /// Pixels whose recovered MSB differs from the original.
    pub deformed_msbs: u64,
    pub white: RiskCounts,
    pub black: RiskCounts,
}

impl ImageReport {
    pub fn lossless(&self) -> bool {
        self.psnr_db.is_none()
    }
}

pub fn render_psnr(p: Psnr) -> String {
    p.to_string()
}

const IMAGE_REPORT_HEADER: &str = "image,rows,cols,n_white,n_black,capacity_bits,payload_bits,\
psnr,deformed_msbs,white_hir,white_mer,white_lor,white_vlor,black_hir,black_mer,black_lor,black_vlor";

/// One CSV document for a batch of reports; header always present.
pub fn reports_to_csv(reports: &[ImageReport]) -> String {
    let mut out = String::from(IMAGE_REPORT_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.image),
            r.rows,
            r.cols,
            r.n_white,
            r.n_black,
            r.capacity_bits,
            r.payload_bits,
            r.psnr,
            r.deformed_msbs,
            r.white.high,
            r.white.medium,
            r.white.low,
            r.white.very_low,
            r.black.high,
            r.black.medium,
            r.black.low,
            r.black.very_low,
        );
    }
    out
}

pub fn reports_to_json(reports: &[ImageReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Risk report as JSON: aggregate counts per phase plus per-group records.
pub fn risk_to_json(report: &RiskReport) -> String {
    serde_json::to_string_pretty(report).expect("risk report serializes")
}

/// Risk report as CSV: one row per group.
pub fn risk_to_csv(report: &RiskReport) -> String {
    let mut out = String::from("phase,index,margin,risk,flipped\n");
    for s in report.subsets() {
        let phase = match s.class {
            TargetClass::White => "white",
            TargetClass::Black => "black",
        };
        let _ = writeln!(out, "{phase},{},{},{},{}", s.index, s.margin, s.risk.label(), s.flipped);
    }
    out
}

/// Prediction-error histograms of all four predictors as CSV rows
/// `predictor,e,count`; zero-count bins are skipped.
pub fn histograms_to_csv(img: &GrayImage) -> String {
    let mut out = String::from("predictor,e,count\n");
    for p in Predictor::ALL {
        let hist = error_histogram(img, p);
        for (e, count) in hist.iter() {
            if count > 0 {
                let _ = writeln!(out, "{},{e},{count}", p.label());
            }
        }
    }
    out
}

/// Failure probabilities of all four predictors as CSV rows `predictor,f`.
pub fn failures_to_csv(img: &GrayImage) -> String {
    let mut out = String::from("predictor,f\n");
    for p in Predictor::ALL {
        let _ = writeln!(out, "{},{:.6}", p.label(), failure_probability(img, p));
    }
    out
}

/// Formats aggregate risk counts compactly, e.g. for terminal output.
pub fn counts_line(counts: &RiskCounts) -> String {
    RiskClass::ALL
        .iter()
        .map(|&c| format!("{}={}", c.label(), counts.get(c)))
        .collect::<Vec<_>>()
        .join(" ")
}
