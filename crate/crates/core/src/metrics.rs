//! Image quality metrics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::grid::ImageGrid;
use crate::math::{exp, log10};

/// `10 log10(peak² / MSE)`; `+∞` when the images are identical.
pub fn psnr(u: &ImageGrid, reference: &ImageGrid, peak: f64) -> Result<f64> {
    u.check_same_shape(reference)?;
    let mse = u
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / u.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * log10(peak * peak / mse))
}

/// Parameters of the Gaussian-window SSIM.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SsimParams {
    /// Window length; shrunk to the largest odd size that fits.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub data_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            data_range: 255.0,
        }
    }
}

fn window_weights(len: usize, sigma: f64) -> Vec<f64> {
    let c = (len / 2) as f64;
    let w: Vec<f64> = (0..len).map(|k| exp(-((k as f64 - c) * (k as f64 - c)) / (2.0 * sigma * sigma))).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn fitted_len(requested: usize, dim: usize) -> usize {
    let len = requested.min(dim).max(1);
    if len % 2 == 0 {
        len - 1
    } else {
        len
    }
}

/// Separable weighted filter over the fully contained window positions.
fn filter_valid(x: &[f64], rows: usize, cols: usize, wr: &[f64], wc: &[f64]) -> Vec<f64> {
    let out_cols = cols - wc.len() + 1;
    let out_rows = rows - wr.len() + 1;
    let mut tmp = vec![0.0; rows * out_cols];
    for r in 0..rows {
        for c in 0..out_cols {
            tmp[r * out_cols + c] = wc.iter().enumerate().map(|(k, w)| w * x[r * cols + c + k]).sum();
        }
    }
    let mut out = vec![0.0; out_rows * out_cols];
    for r in 0..out_rows {
        for c in 0..out_cols {
            out[r * out_cols + c] = wr.iter().enumerate().map(|(k, w)| w * tmp[(r + k) * out_cols + c]).sum();
        }
    }
    out
}

/// Mean of the local SSIM map over all window positions inside the image.
/// Signals (`cols == 1`) use a one-dimensional window.
pub fn ssim(u: &ImageGrid, reference: &ImageGrid, params: &SsimParams) -> Result<f64> {
    u.check_same_shape(reference)?;
    let (rows, cols) = u.shape();
    let wr = window_weights(fitted_len(params.window, rows), params.sigma);
    let wc = if cols == 1 { vec![1.0] } else { window_weights(fitted_len(params.window, cols), params.sigma) };
    let (x, y) = (u.values(), reference.values());
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let yy: Vec<f64> = y.iter().map(|a| a * a).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let f = |v: &[f64]| filter_valid(v, rows, cols, &wr, &wc);
    let (mx, my, exx, eyy, exy) = (f(x), f(y), f(&xx), f(&yy), f(&xy));
    let c1 = (params.k1 * params.data_range) * (params.k1 * params.data_range);
    let c2 = (params.k2 * params.data_range) * (params.k2 * params.data_range);
    let mut total = 0.0;
    for i in 0..mx.len() {
        let (a, b) = (mx[i], my[i]);
        let sx = exx[i] - a * a;
        let sy = eyy[i] - b * b;
        let sxy = exy[i] - a * b;
        total += ((2.0 * a * b + c1) * (2.0 * sxy + c2)) / ((a * a + b * b + c1) * (sx + sy + c2));
    }
    Ok(total / mx.len() as f64)
}
