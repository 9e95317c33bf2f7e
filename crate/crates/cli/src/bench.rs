//! Experiment harness: full-pipeline evaluation of single images and
//! failure-rate sweeps over parameter grids.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use rdhei_core::codec::{embed, extract};
use rdhei_core::crypto::{xor_image, ScrambleRng};
use rdhei_core::image::{psnr, Psnr};
use rdhei_core::recovery::reconstruct;
use rdhei_core::{DataKey, GrayImage, ImageKey, LatticePlan, TargetClass};
use serde::Serialize;

use crate::files;
use crate::report::ImageReport;

/// Pixels whose MSB differs between two same-sized images.
pub fn deformed_msb_count(a: &GrayImage, b: &GrayImage) -> u64 {
    assert_eq!(a.dims(), b.dims());
    a.pixels().iter().zip(b.pixels()).filter(|(x, y)| (*x ^ *y) & 0x80 != 0).count() as u64
}

/// Deterministic full-capacity payload so every group is exercised; drawn
/// from the public scramble generator, not from either key.
pub fn default_payload(plan: &LatticePlan, seed: &[u8]) -> Vec<u8> {
    let mut rng = ScrambleRng::from_parts(&[b"bench/payload", seed]);
    (0..plan.capacity()).map(|_| rng.next_below(2) as u8).collect()
}

/// Runs encrypt, embed, extract and reconstruct on one image and collects
/// the metrics. Extraction must return the payload bit-for-bit — anything
/// else is a hard error, never a report.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_image(
    id: &str,
    original: &GrayImage,
    image_key: &ImageKey,
    data_key: &DataKey,
    n_white: u32,
    n_black: u32,
    seed: &[u8],
    payload: Option<&[u8]>,
) -> Result<ImageReport> {
    let dims = original.dims();
    let plan = LatticePlan::build(dims, n_white, n_black, seed)
        .with_context(|| format!("building plan for {id}"))?;
    let payload = match payload {
        Some(p) => p.to_vec(),
        None => default_payload(&plan, seed),
    };

    let encrypted = xor_image(original, image_key);
    let marked = embed(&encrypted, &payload, data_key, &plan)
        .with_context(|| format!("embedding into {id}"))?;
    let extracted = extract(&marked, data_key, &plan, payload.len())
        .with_context(|| format!("extracting from {id}"))?;
    ensure!(extracted == payload, "extracted payload differs from input on {id}");

    let (recovered, risk) = reconstruct(&marked, image_key, &plan)?;
    let quality = psnr(original, &recovered)?;
    Ok(ImageReport {
        image: id.to_owned(),
        rows: dims.rows,
        cols: dims.cols,
        n_white,
        n_black,
        capacity_bits: plan.capacity(),
        payload_bits: payload.len() as u64,
        psnr: quality.to_string(),
        psnr_db: match quality {
            Psnr::Infinite => None,
            Psnr::Finite(db) => Some(db),
        },
        deformed_msbs: deformed_msb_count(original, &recovered),
        white: *risk.counts(TargetClass::White),
        black: *risk.counts(TargetClass::Black),
    })
}

/// One `(N_W, N_B)` grid coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridPoint {
    pub n_white: u32,
    pub n_black: u32,
}

/// Parses `"1,1;2,3;3,6"` into grid points.
pub fn parse_grid(s: &str) -> Result<Vec<GridPoint>> {
    let mut grid = Vec::new();
    for part in s.split(';').filter(|p| !p.trim().is_empty()) {
        let (w, b) = part
            .split_once(',')
            .with_context(|| format!("grid point {part:?} is not N_W,N_B"))?;
        grid.push(GridPoint {
            n_white: w.trim().parse().with_context(|| format!("bad N_W in {part:?}"))?,
            n_black: b.trim().parse().with_context(|| format!("bad N_B in {part:?}"))?,
        });
    }
    ensure!(!grid.is_empty(), "grid is empty");
    Ok(grid)
}

/// Corpus-wide aggregate for one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub n_white: u32,
    pub n_black: u32,
    pub images: u64,
    pub mean_capacity_bits: f64,
    /// Images not recovered bit-exactly.
    pub failures: u64,
    pub failure_rate: f64,
}

/// Full sweep output: aggregates per grid point plus every per-image
/// report, both in deterministic order.
#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub cells: Vec<SweepCell>,
    pub reports: Vec<ImageReport>,
}

/// Evaluates every corpus image at every grid point. Images run in
/// parallel; results are aggregated in image order, so the outcome is
/// independent of scheduling.
pub fn sweep(
    corpus: &[(String, GrayImage)],
    grid: &[GridPoint],
    image_key: &ImageKey,
    data_key: &DataKey,
    seed: &[u8],
) -> Result<SweepOutcome> {
    if corpus.is_empty() {
        bail!("corpus is empty");
    }
    let mut cells = Vec::with_capacity(grid.len());
    let mut reports = Vec::with_capacity(grid.len() * corpus.len());
    for &GridPoint { n_white, n_black } in grid {
        let cell_reports: Vec<ImageReport> = corpus
            .par_iter()
            .map(|(id, img)| {
                evaluate_image(id, img, image_key, data_key, n_white, n_black, seed, None)
            })
            .collect::<Result<_>>()?;
        let failures = cell_reports.iter().filter(|r| !r.lossless()).count() as u64;
        let capacity_sum: u64 = cell_reports.iter().map(|r| r.capacity_bits).sum();
        cells.push(SweepCell {
            n_white,
            n_black,
            images: cell_reports.len() as u64,
            mean_capacity_bits: capacity_sum as f64 / cell_reports.len() as f64,
            failures,
            failure_rate: failures as f64 / cell_reports.len() as f64,
        });
        reports.extend(cell_reports);
    }
    Ok(SweepOutcome { cells, reports })
}

pub fn sweep_to_csv(outcome: &SweepOutcome) -> String {
    let mut out = String::from("n_white,n_black,images,mean_capacity_bits,failures,failure_rate\n");
    for c in &outcome.cells {
        let _ = writeln!(
            out,
            "{},{},{},{:.1},{},{:.6}",
            c.n_white, c.n_black, c.images, c.mean_capacity_bits, c.failures, c.failure_rate
        );
    }
    out
}

/// Loads every `.pgm` in a directory, sorted by file name. Unreadable or
/// unparsable files are skipped and reported, not fatal.
pub fn load_corpus(dir: &Path) -> Result<(Vec<(String, GrayImage)>, Vec<String>)> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .with_context(|| format!("listing corpus {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.to_ascii_lowercase().ends_with(".pgm"))
        .collect();
    names.sort();

    let mut images = Vec::with_capacity(names.len());
    let mut skipped = Vec::new();
    for name in names {
        match files::read_image(&dir.join(&name)) {
            Ok(img) => images.push((name, img)),
            Err(e) => skipped.push(format!("{name}: {e:#}")),
        }
    }
    Ok((images, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdhei_core::Dims;

    fn keys() -> (ImageKey, DataKey) {
        (ImageKey::from_bytes([0x31; 16]), DataKey::from_bytes([0x32; 16]))
    }

    fn noise(dims: Dims, seed: &[u8]) -> GrayImage {
        let mut rng = ScrambleRng::new(seed);
        GrayImage::from_fn(dims, |_, _| rng.next_below(256) as u8)
    }

    #[test]
    fn constant_image_report() {
        let (ke, kd) = keys();
        let img = GrayImage::constant(Dims::new(64, 64), 123);
        let r = evaluate_image("flat", &img, &ke, &kd, 1, 1, b"s", None).unwrap();
        assert_eq!(r.capacity_bits, 2700, "interior 60x60: 1800 white + 900 black");
        assert_eq!(r.payload_bits, 2700);
        assert_eq!(r.psnr, "inf");
        assert!(r.lossless());
        assert_eq!(r.deformed_msbs, 0);
        assert_eq!(r.white.total(), 1800);
        assert_eq!(r.black.total(), 900);
    }

    #[test]
    fn noise_image_report_is_well_formed() {
        let (ke, kd) = keys();
        let img = noise(Dims::new(48, 48), b"bench-noise");
        let r = evaluate_image("noise", &img, &ke, &kd, 1, 1, b"s", None).unwrap();
        assert!(!r.lossless());
        assert!(r.psnr_db.unwrap() > 0.0);
        assert!(r.deformed_msbs > 0);
        assert_eq!(r.white.total() + r.black.total(), r.capacity_bits);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let (ke, kd) = keys();
        let img = noise(Dims::new(32, 32), b"det");
        let a = evaluate_image("x", &img, &ke, &kd, 2, 3, b"seed", None).unwrap();
        let b = evaluate_image("x", &img, &ke, &kd, 2, 3, b"seed", None).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn oversized_payload_is_an_error() {
        let (ke, kd) = keys();
        let img = GrayImage::constant(Dims::new(16, 16), 0);
        let bits = vec![1u8; 100_000];
        let err = evaluate_image("x", &img, &ke, &kd, 1, 1, b"s", Some(&bits)).unwrap_err();
        assert!(format!("{err:#}").contains("capacity"));
    }

    #[test]
    fn sweep_on_flat_corpus_never_fails() {
        let (ke, kd) = keys();
        let corpus: Vec<(String, GrayImage)> = (0..10)
            .map(|i| (format!("c{i}.pgm"), GrayImage::constant(Dims::new(24, 24), 20 * i as u8)))
            .collect();
        let grid = parse_grid("1,1;2,3").unwrap();
        let out = sweep(&corpus, &grid, &ke, &kd, b"s").unwrap();
        assert_eq!(out.cells.len(), 2);
        for cell in &out.cells {
            assert_eq!(cell.images, 10);
            assert_eq!(cell.failures, 0);
            assert_eq!(cell.failure_rate, 0.0);
        }
        assert_eq!(out.reports.len(), 20);
        // reports keep corpus order within each grid point
        assert_eq!(out.reports[0].image, "c0.pgm");
        assert_eq!(out.reports[9].image, "c9.pgm");
        assert_eq!(out.reports[10].image, "c0.pgm");
    }

    #[test]
    fn sweep_on_noise_corpus_mostly_fails() {
        let (ke, kd) = keys();
        let corpus: Vec<(String, GrayImage)> = (0..5u8)
            .map(|i| (format!("n{i}.pgm"), noise(Dims::new(48, 48), &[i])))
            .collect();
        let out = sweep(&corpus, &parse_grid("1,1").unwrap(), &ke, &kd, b"s").unwrap();
        assert!(out.cells[0].failure_rate >= 0.8, "rate {}", out.cells[0].failure_rate);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(
            parse_grid("1,1;2,3;3,6").unwrap(),
            vec![
                GridPoint { n_white: 1, n_black: 1 },
                GridPoint { n_white: 2, n_black: 3 },
                GridPoint { n_white: 3, n_black: 6 },
            ]
        );
        assert_eq!(parse_grid(" 2 , 4 ").unwrap(), vec![GridPoint { n_white: 2, n_black: 4 }]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1;2").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn sweep_csv_shape() {
        let outcome = SweepOutcome {
            cells: vec![SweepCell {
                n_white: 2,
                n_black: 6,
                images: 50,
                mean_capacity_bits: 12345.0,
                failures: 3,
                failure_rate: 0.06,
            }],
            reports: vec![],
        };
        let csv = sweep_to_csv(&outcome);
        assert!(csv.starts_with("n_white,n_black,"));
        assert!(csv.contains("2,6,50,12345.0,3,0.060000"));
    }

    #[test]
    fn corpus_loader_skips_junk() {
        let dir = std::env::temp_dir().join(format!("rdhei-corpus-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        files::write_image(&dir.join("b.pgm"), &GrayImage::constant(Dims::new(8, 8), 1)).unwrap();
        files::write_image(&dir.join("a.pgm"), &GrayImage::constant(Dims::new(8, 8), 2)).unwrap();
        std::fs::write(dir.join("broken.pgm"), b"not a pgm").unwrap();
        std::fs::write(dir.join("notes.txt"), b"ignored").unwrap();
        let (images, skipped) = load_corpus(&dir).unwrap();
        assert_eq!(
            images.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
            vec!["a.pgm", "b.pgm"]
        );
        assert_eq!(skipped.len(), 1);
        assert!(skipped[0].starts_with("broken.pgm"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
