//! File formats.

mod mtx;
mod pgm;
mod table;

pub use mtx::{format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market};
pub use pgm::{decode_pgm, encode_pgm, read_pgm, write_pgm};
pub use table::{format_samples, format_signal, parse_signal, read_signal, write_samples, write_signal, write_trace};

use std::path::Path;

use anyhow::Result;
use orderbound::ImageGrid;

/// Signals go to CSV, images to PGM.
pub fn write_grid(dir: &Path, stem: &str, grid: &ImageGrid) -> Result<std::path::PathBuf> {
    if grid.is_signal() {
        let path = dir.join(format!("{stem}.csv"));
        write_signal(&path, grid)?;
        Ok(path)
    } else {
        let path = dir.join(format!("{stem}.pgm"));
        write_pgm(&path, grid)?;
        Ok(path)
    }
}

/// Loads a PGM, or a single-column CSV signal for a `.csv` extension.
pub fn read_grid(path: &Path) -> Result<ImageGrid> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => read_signal(path),
        _ => read_pgm(path),
    }
}
