//! Deterministic procedural test images with values in `[0, 255]`.

use alloc::vec;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PhantomKind {
    /// Piecewise-constant signal.
    Steps1d,
    /// Axis-aligned rectangles of distinct intensities on a dark background.
    Squares,
    /// Horizontal lines of width 1–3 px, one of them low-contrast.
    Thinlines,
}

/// Segment starts (fractions of the length) and levels of [`steps1d`]:
/// two plateaus on a zero background.
const STEPS: [(f64, f64); 5] = [(0.00, 0.0), (0.15, 160.0), (0.35, 0.0), (0.55, 240.0), (0.75, 0.0)];

pub fn steps1d(n: usize) -> Result<ImageGrid> {
    if n == 0 {
        return Err(Error::param("signal length must be positive"));
    }
    let mut values = vec![0.0; n];
    for (i, v) in values.iter_mut().enumerate() {
        let t = i as f64 / n as f64;
        *v = STEPS.iter().rev().find(|(start, _)| t >= *start).map_or(STEPS[0].1, |s| s.1);
    }
    ImageGrid::from_signal(values)
}

/// Rectangles as `(top, left, height, width, value)` in fractions of the shape.
const SQUARES: [(f64, f64, f64, f64, f64); 5] = [
    (0.10, 0.10, 0.30, 0.30, 255.0),
    (0.10, 0.55, 0.20, 0.35, 160.0),
    (0.50, 0.15, 0.35, 0.20, 100.0),
    (0.45, 0.50, 0.40, 0.40, 200.0),
    (0.88, 0.05, 0.08, 0.08, 60.0),
];

pub(crate) fn square_boxes(rows: usize, cols: usize) -> [(usize, usize, usize, usize, f64); 5] {
    let scale = |f: f64, n: usize| (f * n as f64) as usize;
    SQUARES.map(|(t, l, h, w, v)| {
        (scale(t, rows), scale(l, cols), scale(h, rows).max(1), scale(w, cols).max(1), v)
    })
}

pub fn squares(rows: usize, cols: usize) -> Result<ImageGrid> {
    if rows < 8 || cols < 8 {
        return Err(Error::param("squares phantom needs at least 8x8 pixels"));
    }
    let mut values = vec![20.0; rows * cols];
    for (top, left, h, w, v) in square_boxes(rows, cols) {
        for r in top..(top + h).min(rows) {
            for c in left..(left + w).min(cols) {
                values[r * cols + c] = v;
            }
        }
    }
    ImageGrid::new(rows, cols, values)
}

/// Lines as `(row fraction, width, value)` on a background of 40.
const LINES: [(f64, usize, f64); 5] = [
    (0.15, 1, 230.0),
    (0.32, 2, 200.0),
    (0.50, 3, 170.0),
    (0.68, 1, 70.0),
    (0.84, 2, 250.0),
];

pub fn thinlines(rows: usize, cols: usize) -> Result<ImageGrid> {
    if rows < 16 || cols < 4 {
        return Err(Error::param("thinlines phantom needs at least 16x4 pixels"));
    }
    let mut values = vec![40.0; rows * cols];
    let margin = cols / 8;
    for (frac, width, v) in LINES {
        let top = (frac * rows as f64) as usize;
        for r in top..(top + width).min(rows) {
            for c in margin..cols - margin {
                values[r * cols + c] = v;
            }
        }
    }
    ImageGrid::new(rows, cols, values)
}

/// `shape.1` is ignored for [`PhantomKind::Steps1d`].
pub fn generate_phantom(kind: PhantomKind, shape: (usize, usize)) -> Result<ImageGrid> {
    match kind {
        PhantomKind::Steps1d => steps1d(shape.0),
        PhantomKind::Squares => squares(shape.0, shape.1),
        PhantomKind::Thinlines => thinlines(shape.0, shape.1),
    }
}
