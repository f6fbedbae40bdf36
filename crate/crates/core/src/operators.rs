//! Blur operators and the interval / midpoint descriptions of operator and
//! data uncertainty.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::math;
use crate::sparse::SparseMatrix;

/// Boundary handling of the convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Boundary {
    /// Zero outside the domain; boundary rows lose mass.
    Dirichlet,
    /// Replicate padding; every row sums to one.
    Neumann,
}

/// Parameters of a truncated, normalised Gaussian blur.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlurSpec {
    /// Standard deviation in the units of `spacing`.
    pub sigma: f64,
    pub boundary: Boundary,
    /// Distance between neighbouring samples.
    #[cfg_attr(feature = "serde", serde(default = "unit_spacing"))]
    pub spacing: f64,
    /// Truncation radius in pixels. `None` means `ceil(4 sigma / spacing)`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub radius: Option<usize>,
}

#[cfg(feature = "serde")]
fn unit_spacing() -> f64 {
    1.0
}

impl BlurSpec {
    pub fn new(sigma: f64, boundary: Boundary) -> Self {
        Self {
            sigma,
            boundary,
            spacing: 1.0,
            radius: None,
        }
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = Some(radius);
        self
    }

    /// Standard deviation in pixels.
    pub fn pixel_sigma(&self) -> f64 {
        self.sigma / self.spacing
    }

    pub fn truncation_radius(&self) -> usize {
        self.radius
            .unwrap_or_else(|| (math::ceil(4.0 * self.pixel_sigma()) as usize).max(1))
    }
}

/// Normalised 1D Gaussian weights for offsets `-radius..=radius`.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma must be positive"));
    }
    let r = radius as isize;
    let mut w: Vec<f64> = (-r..=r)
        .map(|k| {
            let k = k as f64;
            math::exp(-k * k / (2.0 * sigma * sigma))
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

/// Discrete convolution matrix of a Gaussian kernel on a grid of `shape`.
///
/// A shape with one column is treated as a 1D signal; otherwise the
/// separable 2D kernel acts on the row-major flattened image.
pub fn gaussian_blur_matrix(shape: (usize, usize), spec: &BlurSpec) -> Result<SparseMatrix> {
    let (rows, cols) = shape;
    if rows == 0 || cols == 0 {
        return Err(Error::param("shape must be positive"));
    }
    if !(spec.spacing > 0.0) || !spec.spacing.is_finite() {
        return Err(Error::param("spacing must be positive"));
    }
    let radius = spec.truncation_radius();
    let kernel = gaussian_kernel(spec.pixel_sigma(), radius)?;
    let r = radius as isize;

    // Maps a possibly out-of-range coordinate to an in-range one, or None
    // when the sample falls outside a Dirichlet domain.
    let resolve = |x: isize, len: usize| -> Option<usize> {
        if x >= 0 && (x as usize) < len {
            Some(x as usize)
        } else {
            match spec.boundary {
                Boundary::Dirichlet => None,
                Boundary::Neumann => Some(x.clamp(0, len as isize - 1) as usize),
            }
        }
    };

    let n = rows * cols;
    let mut triplets = Vec::with_capacity(n * kernel.len() * if cols > 1 { kernel.len() } else { 1 });
    if cols == 1 {
        for i in 0..rows {
            for (k, &w) in kernel.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                if let Some(j) = resolve(i as isize + k as isize - r, rows) {
                    triplets.push((i, j, w));
                }
            }
        }
    } else {
        for ri in 0..rows {
            for ci in 0..cols {
                let i = ri * cols + ci;
                for (kr, &wr) in kernel.iter().enumerate() {
                    let Some(rj) = resolve(ri as isize + kr as isize - r, rows) else {
                        continue;
                    };
                    for (kc, &wc) in kernel.iter().enumerate() {
                        let w = wr * wc;
                        if w == 0.0 {
                            continue;
                        }
                        if let Some(cj) = resolve(ci as isize + kc as isize - r, cols) {
                            triplets.push((i, rj * cols + cj, w));
                        }
                    }
                }
            }
        }
    }
    SparseMatrix::from_triplets(n, n, triplets)
}

/// The set of matrix positions that perturbation and non-support-aware
/// bounds may populate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SupportWindow {
    /// Every position of the matrix.
    Full,
    /// Positions whose grid coordinates differ by at most `radius` along
    /// each axis, for a square operator acting on a `rows x cols` grid.
    Band {
        rows: usize,
        cols: usize,
        radius: usize,
    },
}

impl SupportWindow {
    /// The default window for a blur operator: truncation radius + 2.
    pub fn for_blur(shape: (usize, usize), spec: &BlurSpec) -> Self {
        SupportWindow::Band {
            rows: shape.0,
            cols: shape.1,
            radius: spec.truncation_radius() + 2,
        }
    }

    fn check(&self, a: &SparseMatrix) -> Result<()> {
        if let SupportWindow::Band { rows, cols, .. } = *self {
            let n = rows * cols;
            if a.shape() != (n, n) {
                return Err(Error::ShapeMismatch {
                    expected: (n, n),
                    found: a.shape(),
                });
            }
        }
        Ok(())
    }

    /// Ascending column indices inside the window for row `i` of a matrix
    /// with `ncols` columns.
    fn columns(&self, i: usize, ncols: usize, out: &mut Vec<usize>) {
        out.clear();
        match *self {
            SupportWindow::Full => out.extend(0..ncols),
            SupportWindow::Band { rows, cols, radius } => {
                let (ri, ci) = (i / cols, i % cols);
                let r0 = ri.saturating_sub(radius);
                let r1 = (ri + radius).min(rows - 1);
                let c0 = ci.saturating_sub(radius);
                let c1 = (ci + radius).min(cols - 1);
                for rj in r0..=r1 {
                    out.extend((c0..=c1).map(|cj| rj * cols + cj));
                }
            }
        }
    }
}

/// Randomly perturbs a nonnegative operator.
///
/// With `d = relative_level * max(A)`, every position inside `window` (and
/// every stored entry of `A`) becomes `max(a_ij + r_ij d, 0)` where the
/// `r_ij` are i.i.d. uniform on `[-1, 1]`, drawn row by row in ascending
/// column order from a ChaCha8 stream seeded with `seed`. Zero results are
/// not stored.
pub fn perturb_operator(
    a: &SparseMatrix,
    relative_level: f64,
    seed: u64,
    window: &SupportWindow,
) -> Result<SparseMatrix> {
    if !(relative_level >= 0.0) || !relative_level.is_finite() {
        return Err(Error::param("relative_level must be nonnegative"));
    }
    window.check(a)?;
    if relative_level == 0.0 {
        return Ok(a.clone());
    }
    let d = relative_level * a.max_value();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = Vec::new();
    let mut triplets = Vec::new();
    for i in 0..a.nrows() {
        window.columns(i, a.ncols(), &mut cols);
        let (stored, _) = a.row(i);
        if stored.iter().any(|c| cols.binary_search(c).is_err()) {
            cols.extend_from_slice(stored);
            cols.sort_unstable();
            cols.dedup();
        }
        for &j in &cols {
            let r: f64 = rng.random_range(-1.0..=1.0);
            let v = (a.get(i, j) + r * d).max(0.0);
            if v > 0.0 {
                triplets.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(a.nrows(), a.ncols(), triplets)
}

/// Drops entries below `threshold` and rescales every row to sum to one.
pub fn threshold_and_normalize(a: &SparseMatrix, threshold: f64) -> Result<SparseMatrix> {
    if !(threshold >= 0.0) {
        return Err(Error::param("threshold must be nonnegative"));
    }
    let kept = a.retain(|_, _, v| v >= threshold && v != 0.0);
    let sums = kept.row_sums();
    for (row, &s) in sums.iter().enumerate() {
        if !(s > 0.0) {
            return Err(Error::DegenerateRow { row });
        }
    }
    let mut values = Vec::with_capacity(kept.nnz());
    for (r, &s) in sums.iter().enumerate() {
        values.extend(kept.row(r).1.iter().map(|v| v / s));
    }
    Ok(kept.with_pattern_values(values))
}

/// Elementwise operator bounds `A^l <= A <= A^u` on a shared sparsity pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalOperator {
    lower: SparseMatrix,
    upper: SparseMatrix,
}

impl IntervalOperator {
    /// Unifies the patterns of `lower` and `upper` and checks the ordering.
    pub fn new(lower: SparseMatrix, upper: SparseMatrix) -> Result<Self> {
        let (lower, upper) = if lower.same_pattern(&upper) {
            (lower, upper)
        } else {
            (
                lower.zip_union(&upper, |l, _| l)?,
                upper.zip_union(&lower, |u, _| u)?,
            )
        };
        let ncols = lower.ncols();
        for ((r, c, l), u) in lower.triplets().zip(upper.values()) {
            if l > *u {
                return Err(Error::InconsistentBounds {
                    step: 0,
                    index: r * ncols + c,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The singleton interval `[A, A]`.
    pub fn exact(a: SparseMatrix) -> Self {
        Self {
            lower: a.clone(),
            upper: a,
        }
    }

    pub fn lower(&self) -> &SparseMatrix {
        &self.lower
    }

    pub fn upper(&self) -> &SparseMatrix {
        &self.upper
    }

    pub fn shape(&self) -> (usize, usize) {
        self.lower.shape()
    }

    pub fn into_parts(self) -> (SparseMatrix, SparseMatrix) {
        (self.lower, self.upper)
    }

    /// Whether `a` lies in the interval elementwise (absent entries are 0).
    pub fn contains(&self, a: &SparseMatrix, tol: f64) -> bool {
        if a.shape() != self.shape() {
            return false;
        }
        let Ok(lo) = self.lower.zip_union(a, |l, x| x - l) else {
            return false;
        };
        let Ok(hi) = self.upper.zip_union(a, |u, x| u - x) else {
            return false;
        };
        lo.values().iter().all(|v| *v >= -tol) && hi.values().iter().all(|v| *v >= -tol)
    }
}

/// Data bounds `f^l <= f <= f^u` with an optional point estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedData {
    lower: ImageGrid,
    upper: ImageGrid,
    point: Option<ImageGrid>,
}

impl BoundedData {
    pub fn new(lower: ImageGrid, upper: ImageGrid, point: Option<ImageGrid>) -> Result<Self> {
        lower.check_same_shape(&upper)?;
        if let Some(index) = lower
            .values()
            .iter()
            .zip(upper.values())
            .position(|(l, u)| l > u)
        {
            return Err(Error::InconsistentBounds { step: 0, index });
        }
        if let Some(p) = &point {
            lower.check_same_shape(p)?;
            let outside = p
                .values()
                .iter()
                .zip(lower.values().iter().zip(upper.values()))
                .position(|(x, (l, u))| x < l || x > u);
            if let Some(index) = outside {
                return Err(Error::param(alloc::format!(
                    "point estimate outside its bounds at index {index}"
                )));
            }
        }
        Ok(Self { lower, upper, point })
    }

    /// The degenerate interval `[f, f]`.
    pub fn exact(f: ImageGrid) -> Self {
        Self {
            lower: f.clone(),
            upper: f.clone(),
            point: Some(f),
        }
    }

    pub fn lower(&self) -> &ImageGrid {
        &self.lower
    }

    pub fn upper(&self) -> &ImageGrid {
        &self.upper
    }

    pub fn point(&self) -> Option<&ImageGrid> {
        self.point.as_ref()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.lower.shape()
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }
}

/// Operator interval from an estimate `Ã` and an absolute radius `d`:
/// `a^u = ã + d`, `a^l = max(ã - d, 0)` on the support of `Ã`.
///
/// Off the support, `a^u` is 0 when `support_aware`, otherwise `d` at every
/// position inside `window` (with `a^l = 0`).
pub fn interval_from_estimate(
    estimate: &SparseMatrix,
    d: f64,
    support_aware: bool,
    window: &SupportWindow,
) -> Result<IntervalOperator> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::param("d must be nonnegative"));
    }
    window.check(estimate)?;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut cols = Vec::new();
    for i in 0..estimate.nrows() {
        let (scols, svals) = estimate.row(i);
        for (&j, &a) in scols.iter().zip(svals) {
            if a != 0.0 {
                let hi = a + d;
                lower.push((i, j, (a - d).max(0.0).min(hi)));
                upper.push((i, j, hi));
            }
        }
        if !support_aware && d > 0.0 {
            window.columns(i, estimate.ncols(), &mut cols);
            for &j in &cols {
                if estimate.get(i, j) == 0.0 {
                    upper.push((i, j, d));
                }
            }
        }
    }
    let (m, n) = estimate.shape();
    IntervalOperator::new(
        SparseMatrix::from_triplets(m, n, lower)?,
        SparseMatrix::from_triplets(m, n, upper)?,
    )
}

/// `f^l = f - c`, `f^u = f + c`, point `f`.
pub fn data_bounds(f: &ImageGrid, c: f64) -> Result<BoundedData> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::param("c must be nonnegative"));
    }
    Ok(BoundedData {
        lower: f.map(|v| v - c)?,
        upper: f.map(|v| v + c)?,
        point: Some(f.clone()),
    })
}

/// Norm-ball description `(A_h, f_δ, h, δ)` of an interval pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointRepresentation {
    pub operator: SparseMatrix,
    pub data: ImageGrid,
    pub operator_radius: f64,
    pub data_radius: f64,
}

/// `A_h = (A^u + A^l)/2`, `f_δ = (f^u + f^l)/2`, `h = ‖A^u - A^l‖/2`,
/// `δ = ‖f^u - f^l‖/2`, with the infinity norm on data and the induced
/// max-absolute-row-sum norm on operators.
pub fn midpoint_representation(
    op: &IntervalOperator,
    data: &BoundedData,
) -> Result<MidpointRepresentation> {
    if op.shape().0 != data.len() {
        return Err(Error::ShapeMismatch {
            expected: (op.shape().0, 1),
            found: (data.len(), 1),
        });
    }
    let operator = op.lower.zip_union(&op.upper, |l, u| 0.5 * (l + u))?;
    let width = op.lower.zip_union(&op.upper, |l, u| u - l)?;
    let f_mid: Vec<f64> = data
        .lower
        .values()
        .iter()
        .zip(data.upper.values())
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    let data_radius = data
        .lower
        .values()
        .iter()
        .zip(data.upper.values())
        .fold(0.0_f64, |m, (l, u)| m.max(u - l))
        / 2.0;
    Ok(MidpointRepresentation {
        operator,
        data: data.lower.with_values(f_mid)?,
        operator_radius: width.max_abs_row_sum() / 2.0,
        data_radius,
    })
}

/// Bound families that can be made monotone along a sequence.
pub trait Monotonize: Sized {
    /// Intersects `self` with the (already refined) predecessor `prev`.
    /// `step` is the position of `self` in the sequence.
    fn refine_with(&self, prev: &Self, step: usize) -> Result<Self>;
}

impl Monotonize for BoundedData {
    fn refine_with(&self, prev: &Self, step: usize) -> Result<Self> {
        prev.lower.check_same_shape(&self.lower)?;
        let lower: Vec<f64> = self
            .lower
            .values()
            .iter()
            .zip(prev.lower.values())
            .map(|(a, b)| a.max(*b))
            .collect();
        let upper: Vec<f64> = self
            .upper
            .values()
            .iter()
            .zip(prev.upper.values())
            .map(|(a, b)| a.min(*b))
            .collect();
        if let Some(index) = lower.iter().zip(&upper).position(|(l, u)| l > u) {
            return Err(Error::InconsistentBounds { step, index });
        }
        let lower = self.lower.with_values(lower)?;
        let upper = self.upper.with_values(upper)?;
        let point = self.point.clone().filter(|p| {
            p.values()
                .iter()
                .zip(lower.values().iter().zip(upper.values()))
                .all(|(x, (l, u))| l <= x && x <= u)
        });
        Ok(Self { lower, upper, point })
    }
}

impl Monotonize for IntervalOperator {
    fn refine_with(&self, prev: &Self, step: usize) -> Result<Self> {
        let lower = self.lower.zip_union(&prev.lower, f64::max)?;
        let upper = self.upper.zip_union(&prev.upper, f64::min)?;
        IntervalOperator::new(lower, upper).map_err(|e| match e {
            Error::InconsistentBounds { index, .. } => Error::InconsistentBounds { step, index },
            other => other,
        })
    }
}

/// Replaces lower bounds by running suprema and upper bounds by running
/// infima, so that the sequence is monotone. Steps are 0-based.
pub fn monotonize_bounds<T: Monotonize + Clone>(seq: &[T]) -> Result<Vec<T>> {
    let Some(first) = seq.first() else {
        return Err(Error::param("empty bound sequence"));
    };
    let mut out = vec![first.clone()];
    for (step, item) in seq.iter().enumerate().skip(1) {
        let refined = item.refine_with(out.last().unwrap(), step)?;
        out.push(refined);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn tiny_sigma_gives_identity() {
        for boundary in [Boundary::Dirichlet, Boundary::Neumann] {
            let spec = BlurSpec::new(1e-8, boundary);
            assert_eq!(gaussian_blur_matrix((7, 1), &spec).unwrap(), SparseMatrix::identity(7));
            assert_eq!(gaussian_blur_matrix((3, 4), &spec).unwrap(), SparseMatrix::identity(12));
        }
    }

    #[test]
    fn center_row_weights_radius_one() {
        // exp(-k^2 / (2 * 0.25)) for k = -1, 0, 1, then normalised.
        let e = std::f64::consts::E.powf(-2.0);
        let expected = [e / (1.0 + 2.0 * e), 1.0 / (1.0 + 2.0 * e), e / (1.0 + 2.0 * e)];
        let spec = BlurSpec::new(0.5, Boundary::Dirichlet).with_radius(1);
        let a = gaussian_blur_matrix((3, 1), &spec).unwrap();
        let (cols, vals) = a.row(1);
        assert_eq!(cols, &[0, 1, 2]);
        for (v, e) in vals.iter().zip(expected) {
            assert!(close(*v, e, 1e-15));
        }
        assert!(close(vals[0], 0.1065, 5e-5) && close(vals[1], 0.7870, 5e-5));
    }

    #[test]
    fn neumann_rows_sum_to_one() {
        for (shape, sigma) in [((10, 1), 0.5), ((5, 1), 3.0), ((6, 7), 1.0), ((3, 3), 2.5)] {
            let a = gaussian_blur_matrix(shape, &BlurSpec::new(sigma, Boundary::Neumann)).unwrap();
            for s in a.row_sums() {
                assert!(close(s, 1.0, 1e-12), "{s}");
            }
        }
    }

    #[test]
    fn dirichlet_boundary_rows_lose_mass() {
        let a = gaussian_blur_matrix((20, 1), &BlurSpec::new(1.0, Boundary::Dirichlet)).unwrap();
        let sums = a.row_sums();
        assert!(close(sums[10], 1.0, 1e-12));
        assert!(sums[0] < 1.0 && sums[19] < 1.0);
        assert!(sums.iter().all(|s| *s <= 1.0 + 1e-12));
    }

    #[test]
    fn blur_rejects_bad_parameters() {
        assert!(gaussian_blur_matrix((4, 1), &BlurSpec::new(0.0, Boundary::Neumann)).is_err());
        assert!(gaussian_blur_matrix((4, 1), &BlurSpec::new(-1.0, Boundary::Neumann)).is_err());
        assert!(gaussian_blur_matrix((0, 1), &BlurSpec::new(1.0, Boundary::Neumann)).is_err());
        let flat = BlurSpec::new(1.0, Boundary::Neumann).with_spacing(0.0);
        assert!(gaussian_blur_matrix((4, 1), &flat).is_err());
    }

    #[test]
    fn spacing_rescales_sigma() {
        let fine = BlurSpec::new(0.5, Boundary::Dirichlet).with_spacing(0.1);
        assert_eq!(fine.truncation_radius(), 20);
        let a = gaussian_blur_matrix((50, 1), &fine).unwrap();
        let b = gaussian_blur_matrix((50, 1), &BlurSpec::new(5.0, Boundary::Dirichlet)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturbation_zero_level_is_identity_map() {
        let a = gaussian_blur_matrix((8, 1), &BlurSpec::new(0.5, Boundary::Dirichlet)).unwrap();
        let w = SupportWindow::Full;
        assert_eq!(perturb_operator(&a, 0.0, 3, &w).unwrap(), a);
    }

    #[test]
    fn perturbation_is_seeded_and_nonnegative() {
        let ones = SparseMatrix::from_dense(3, 3, &[1.0; 9]).unwrap();
        let w = SupportWindow::Full;
        let p1 = perturb_operator(&ones, 0.05, 42, &w).unwrap();
        let p2 = perturb_operator(&ones, 0.05, 42, &w).unwrap();
        let p3 = perturb_operator(&ones, 0.05, 43, &w).unwrap();
        assert_eq!(p1.to_dense(), p2.to_dense());
        assert_ne!(p1.to_dense(), p3.to_dense());
        assert!(p1.values().iter().all(|v| (0.95..=1.05).contains(v)));

        let a = gaussian_blur_matrix((30, 1), &BlurSpec::new(0.5, Boundary::Dirichlet)).unwrap();
        let win = SupportWindow::Band { rows: 30, cols: 1, radius: 4 };
        let p = perturb_operator(&a, 0.5, 1, &win).unwrap();
        assert!(p.values().iter().all(|v| *v > 0.0));
        assert!(p.triplets().all(|(i, j, _)| i.abs_diff(j) <= 4));
    }

    #[test]
    fn threshold_renormalises_surviving_entries() {
        let a = SparseMatrix::from_dense(1, 3, &[0.2, 0.004, 0.796]).unwrap();
        let t = threshold_and_normalize(&a, 0.005).unwrap();
        assert_eq!(t.row(0).0, &[0, 2]);
        assert!(close(t.get(0, 0), 0.2 / 0.996, 1e-15));
        assert!(close(t.get(0, 2), 0.796 / 0.996, 1e-15));
        assert!(close(t.get(0, 0), 0.2008, 1e-4));
    }

    #[test]
    fn threshold_zero_keeps_stochastic_matrix() {
        let a = gaussian_blur_matrix((9, 1), &BlurSpec::new(1.0, Boundary::Neumann)).unwrap();
        let t = threshold_and_normalize(&a, 0.0).unwrap();
        assert_eq!(t.nnz(), a.nnz());
        for (x, y) in t.values().iter().zip(a.values()) {
            assert!(close(*x, *y, 1e-15));
        }
    }

    #[test]
    fn threshold_reports_degenerate_row() {
        let a = SparseMatrix::from_dense(2, 2, &[0.5, 0.5, 0.001, 0.002]).unwrap();
        assert_eq!(threshold_and_normalize(&a, 0.01), Err(Error::DegenerateRow { row: 1 }));
    }

    #[test]
    fn interval_from_estimate_cases() {
        let est = SparseMatrix::from_dense(2, 2, &[0.03, 0.0, 0.5, 0.5]).unwrap();
        let op = interval_from_estimate(&est, 0.0, true, &SupportWindow::Full).unwrap();
        assert_eq!(op.lower().to_dense(), est.to_dense());
        assert_eq!(op.upper().to_dense(), est.to_dense());

        let op = interval_from_estimate(&est, 0.05, true, &SupportWindow::Full).unwrap();
        assert_eq!(op.lower().get(0, 0), 0.0);
        assert!(close(op.upper().get(0, 0), 0.08, 1e-15));
        assert_eq!(op.upper().get(0, 1), 0.0);
        assert!(close(op.lower().get(1, 0), 0.45, 1e-15));

        let op = interval_from_estimate(&est, 0.05, false, &SupportWindow::Full).unwrap();
        assert_eq!(op.upper().get(0, 1), 0.05);
        assert_eq!(op.lower().get(0, 1), 0.0);
    }

    #[test]
    fn data_bounds_example() {
        let f = ImageGrid::from_signal(vec![10.0, 20.0]).unwrap();
        let b = data_bounds(&f, 10.0).unwrap();
        assert_eq!(b.lower().values(), &[0.0, 10.0]);
        assert_eq!(b.upper().values(), &[20.0, 30.0]);
        assert_eq!(b.point(), Some(&f));
        let b0 = data_bounds(&f, 0.0).unwrap();
        assert!(b0.is_degenerate());
        assert!(data_bounds(&f, -1.0).is_err());
    }

    #[test]
    fn midpoint_of_unit_interval() {
        let op = IntervalOperator::new(
            SparseMatrix::from_dense(1, 1, &[0.0]).unwrap(),
            SparseMatrix::from_dense(1, 1, &[2.0]).unwrap(),
        )
        .unwrap();
        let data = BoundedData::exact(ImageGrid::from_signal(vec![3.0]).unwrap());
        let rep = midpoint_representation(&op, &data).unwrap();
        assert_eq!(rep.operator.get(0, 0), 1.0);
        assert_eq!(rep.operator_radius, 1.0);
        assert_eq!(rep.data_radius, 0.0);
        assert_eq!(rep.data.values(), &[3.0]);
    }

    #[test]
    fn midpoint_of_degenerate_interval() {
        let a = gaussian_blur_matrix((5, 1), &BlurSpec::new(1.0, Boundary::Neumann)).unwrap();
        let f = ImageGrid::from_signal(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let rep = midpoint_representation(&IntervalOperator::exact(a.clone()), &BoundedData::exact(f.clone())).unwrap();
        assert_eq!(rep.operator, a);
        assert_eq!(rep.data, f);
        assert_eq!((rep.operator_radius, rep.data_radius), (0.0, 0.0));
    }

    #[test]
    fn interval_operator_rejects_crossed_bounds() {
        let lo = SparseMatrix::from_dense(1, 2, &[1.0, 0.0]).unwrap();
        let hi = SparseMatrix::from_dense(1, 2, &[0.5, 1.0]).unwrap();
        assert!(matches!(IntervalOperator::new(lo, hi), Err(Error::InconsistentBounds { index: 0, .. })));
    }

    fn scalar_bounds(l: f64, u: f64) -> BoundedData {
        BoundedData::new(
            ImageGrid::from_signal(vec![l]).unwrap(),
            ImageGrid::from_signal(vec![u]).unwrap(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn monotonize_running_extrema() {
        let seq = [scalar_bounds(0.0, 3.0), scalar_bounds(-1.0, 2.0), scalar_bounds(0.5, 2.5)];
        let out = monotonize_bounds(&seq).unwrap();
        let lowers: Vec<f64> = out.iter().map(|b| b.lower().values()[0]).collect();
        let uppers: Vec<f64> = out.iter().map(|b| b.upper().values()[0]).collect();
        assert_eq!(lowers, vec![0.0, 0.0, 0.5]);
        assert_eq!(uppers, vec![3.0, 2.0, 2.0]);

        let already = [scalar_bounds(0.0, 3.0), scalar_bounds(1.0, 2.0)];
        assert_eq!(monotonize_bounds(&already).unwrap(), already.to_vec());
    }

    #[test]
    fn monotonize_detects_inconsistency() {
        // running infimum of uppers is [1, 1]; the second lower 2 exceeds it.
        let seq = [scalar_bounds(0.0, 1.0), scalar_bounds(2.0, 3.0)];
        assert_eq!(
            monotonize_bounds(&seq),
            Err(Error::InconsistentBounds { step: 1, index: 0 })
        );
        assert!(BoundedData::new(
            ImageGrid::from_signal(vec![2.0]).unwrap(),
            ImageGrid::from_signal(vec![1.0]).unwrap(),
            None
        )
        .is_err());
    }

    #[test]
    fn monotonize_operators() {
        let m = |v: f64, w: f64| SparseMatrix::from_dense(1, 2, &[v, w]).unwrap();
        let seq = [
            IntervalOperator::new(m(0.0, 0.1), m(1.0, 0.5)).unwrap(),
            IntervalOperator::new(m(0.2, 0.0), m(1.5, 0.4)).unwrap(),
        ];
        let out = monotonize_bounds(&seq).unwrap();
        assert_eq!(out[1].lower().to_dense(), vec![0.2, 0.1]);
        assert_eq!(out[1].upper().to_dense(), vec![1.0, 0.4]);
    }
}
