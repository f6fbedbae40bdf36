//! Binary greymap (P5) images.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use orderbound::ImageGrid;

/// Next whitespace-delimited header token; `#` starts a comment to end of line.
fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    ensure!(*pos > start, "truncated PGM header");
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let t = token(bytes, pos)?;
    std::str::from_utf8(t)
        .ok()
        .and_then(|s| s.parse().ok())
        .with_context(|| format!("bad PGM header field {:?}", String::from_utf8_lossy(t)))
}

/// Decodes 8- or 16-bit P5 data; sample values are kept as stored.
pub fn decode_pgm(bytes: &[u8]) -> Result<ImageGrid> {
    let mut pos = 0;
    ensure!(token(bytes, &mut pos)? == b"P5", "not a binary PGM (P5) file");
    let width = number(bytes, &mut pos)?;
    let height = number(bytes, &mut pos)?;
    let maxval = number(bytes, &mut pos)?;
    ensure!((1..=65535).contains(&maxval), "PGM maxval {maxval} out of range");
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let depth = if maxval < 256 { 1 } else { 2 };
    let need = width * height * depth;
    let raster = bytes.get(pos..pos + need).context("PGM raster is shorter than the header declares")?;
    let values = if depth == 1 {
        raster.iter().map(|&b| b as f64).collect()
    } else {
        raster.chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]]) as f64).collect()
    };
    Ok(ImageGrid::new(height, width, values)?)
}

/// Encodes an 8-bit P5 image; values are rounded and clamped to `[0, 255]`.
pub fn encode_pgm(img: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.cols(), img.rows()).into_bytes();
    out.extend(img.values().iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
    out
}

pub fn read_pgm(path: &Path) -> Result<ImageGrid> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_pgm(&bytes).with_context(|| format!("decoding {}", path.display()))
}

pub fn write_pgm(path: &Path, img: &ImageGrid) -> Result<()> {
    if img.is_signal() {
        bail!("refusing to write a 1D signal as an image: {}", path.display());
    }
    std::fs::write(path, encode_pgm(img)).with_context(|| format!("writing {}", path.display()))
}
