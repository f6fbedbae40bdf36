//! Forward-difference gradient with Neumann boundary and total variation.

use crate::grid::ImageGrid;
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TvVariant {
    #[default]
    Isotropic,
    Anisotropic,
}

/// Discrete gradient of a `rows × cols` grid.
///
/// Signals (`cols == 1`) have one component per sample; images have two,
/// stored as `[∂_x (all pixels), ∂_y (all pixels)]`. The difference
/// across the last row or column is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gradient {
    rows: usize,
    cols: usize,
}

impl Gradient {
    pub fn new(shape: (usize, usize)) -> Self {
        Self { rows: shape.0, cols: shape.1 }
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn components(&self) -> usize {
        if self.cols == 1 {
            1
        } else {
            2
        }
    }

    /// Length of the gradient vector.
    pub fn output_len(&self) -> usize {
        self.components() * self.pixels()
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let (rows, cols, n) = (self.rows, self.cols, self.pixels());
        if cols == 1 {
            for i in 0..n {
                out[i] = if i + 1 < n { u[i + 1] - u[i] } else { 0.0 };
            }
            return;
        }
        let (dx, dy) = out.split_at_mut(n);
        for r in 0..rows {
            for c in 0..cols {
                let k = r * cols + c;
                dx[k] = if c + 1 < cols { u[k + 1] - u[k] } else { 0.0 };
                dy[k] = if r + 1 < rows { u[k + cols] - u[k] } else { 0.0 };
            }
        }
    }

    /// `out += ∇ᵀ p`.
    pub fn adjoint_add(&self, p: &[f64], out: &mut [f64]) {
        let (rows, cols, n) = (self.rows, self.cols, self.pixels());
        if cols == 1 {
            for i in 0..n.saturating_sub(1) {
                out[i + 1] += p[i];
                out[i] -= p[i];
            }
            return;
        }
        let (px, py) = p.split_at(n);
        for r in 0..rows {
            for c in 0..cols {
                let k = r * cols + c;
                if c + 1 < cols {
                    out[k + 1] += px[k];
                    out[k] -= px[k];
                }
                if r + 1 < rows {
                    out[k + cols] += py[k];
                    out[k] -= py[k];
                }
            }
        }
    }

    /// Projects `p` onto the dual unit ball of the chosen TV norm.
    pub(crate) fn project_dual(&self, p: &mut [f64], variant: TvVariant) {
        let n = self.pixels();
        if self.components() == 1 || variant == TvVariant::Anisotropic {
            for x in p.iter_mut() {
                *x = x.clamp(-1.0, 1.0);
            }
            return;
        }
        let (px, py) = p.split_at_mut(n);
        for (a, b) in px.iter_mut().zip(py.iter_mut()) {
            let norm = sqrt(*a * *a + *b * *b);
            if norm > 1.0 {
                *a /= norm;
                *b /= norm;
            }
        }
    }

    pub(crate) fn tv_of(&self, u: &[f64], variant: TvVariant) -> f64 {
        let mut g = alloc::vec![0.0; self.output_len()];
        self.apply(u, &mut g);
        let n = self.pixels();
        if self.components() == 1 || variant == TvVariant::Anisotropic {
            return g.iter().map(|x| x.abs()).sum();
        }
        let (gx, gy) = g.split_at(n);
        gx.iter().zip(gy).map(|(a, b)| sqrt(a * a + b * b)).sum()
    }
}

/// Total variation of `u`. For signals both variants equal `Σ |u_{i+1} - u_i|`.
pub fn tv_value(u: &ImageGrid, variant: TvVariant) -> f64 {
    Gradient::new(u.shape()).tv_of(u.values(), variant)
}
