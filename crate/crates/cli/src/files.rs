//! File plumbing: PGM and payload I/O with atomic writes.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rdhei_core::{pgm, GrayImage};

/// Reads a `P5` or `P2` PGM file.
pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let img = pgm::decode(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok(img)
}

/// Writes a binary `P5` PGM file atomically.
pub fn write_image(path: &Path, img: &GrayImage) -> Result<()> {
    write_bytes(path, &pgm::encode(img))
}

/// Writes via a temporary file in the target directory plus rename, so a
/// crash never leaves a half-written output.
pub fn write_bytes(path: &Path, data: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .with_context(|| format!("{} has no file name", path.display()))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{file_name}.tmp-{}", std::process::id()));
    let finish = (|| {
        fs::write(&tmp, data)?;
        fs::rename(&tmp, path)
    })();
    if finish.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    finish.with_context(|| format!("writing {}", path.display()))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}
