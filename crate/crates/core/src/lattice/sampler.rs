//! Classification of points of a two-dimensional `u`-space into `U` and `U**`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{member_u, member_ustarstar, FeasibilityProblem, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::operators::{BoundedData, IntervalOperator};
use crate::sparse::SparseMatrix;

/// Axis-aligned rectangle `[u1.0, u1.1] × [u2.0, u2.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Region {
    pub u1: (f64, f64),
    pub u2: (f64, f64),
}

impl Region {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self { u1: (lo, hi), u2: (lo, hi) }
    }

    /// Nonempty, finite and inside the nonnegative quadrant.
    pub fn check(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a >= 0.0 && a < b;
        if ok(self.u1) && ok(self.u2) {
            Ok(())
        } else {
            Err(Error::param("region must be a nonempty finite box in the nonnegative quadrant"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplePoint {
    pub u: [f64; 2],
    pub in_u: bool,
    pub in_ustarstar: bool,
}

/// Random single-row problem: `A^l ∈ [0,1]^2`, `A^u ∈ [1,2]^2`,
/// `f = ((A^l + A^u)/2) u_gen` with `u_gen ∈ [0,25]^2`, and the side
/// constraint `v = (1, 1)`, `g = ((A^l + A^u)/2) v`.
///
/// Returns the problem together with `u_gen`.
pub fn fig1_problem(seed: u64) -> Result<(FeasibilityProblem, [f64; 2])> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let al = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
    let au = [rng.random_range(1.0..2.0), rng.random_range(1.0..2.0)];
    let u_gen = [rng.random_range(0.0..25.0), rng.random_range(0.0..25.0)];
    let mid = [(al[0] + au[0]) / 2.0, (al[1] + au[1]) / 2.0];
    let f = mid[0] * u_gen[0] + mid[1] * u_gen[1];
    let g = mid[0] + mid[1];
    let op = IntervalOperator::new(SparseMatrix::from_dense(1, 2, &al)?, SparseMatrix::from_dense(1, 2, &au)?)?;
    let problem = FeasibilityProblem::new(op, BoundedData::exact(ImageGrid::from_signal(alloc::vec![f])?))?
        .with_side_constraint(ImageGrid::from_signal(alloc::vec![1.0, 1.0])?, ImageGrid::from_signal(alloc::vec![g])?)?;
    Ok((problem, u_gen))
}

/// Classifies one point; points outside `U` are never reported in `U**`.
pub fn classify_point(problem: &FeasibilityProblem, u: [f64; 2]) -> Result<SamplePoint> {
    if problem.dim() != 2 {
        return Err(Error::ShapeMismatch { expected: (2, 1), found: (problem.dim(), 1) });
    }
    let grid = ImageGrid::from_signal(u.to_vec())?;
    let in_u = member_u(&grid, problem, DEFAULT_TOL)?.member;
    let in_ustarstar = in_u && member_ustarstar(&grid, problem)?.member;
    Ok(SamplePoint { u, in_u, in_ustarstar })
}

/// Classifies `n_samples` uniform random points of `region`.
pub fn sample_feasible_set_2d(
    problem: &FeasibilityProblem,
    n_samples: usize,
    region: &Region,
    seed: u64,
) -> Result<Vec<SamplePoint>> {
    region.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| {
            let u = [
                rng.random_range(region.u1.0..region.u1.1),
                rng.random_range(region.u2.0..region.u2.1),
            ];
            classify_point(problem, u)
        })
        .collect()
}

/// Classifies the `resolution × resolution` cell centres of `region`,
/// row-major with `u2` varying slowest.
pub fn classify_grid(problem: &FeasibilityProblem, region: &Region, resolution: usize) -> Result<Vec<SamplePoint>> {
    region.check()?;
    if resolution == 0 {
        return Err(Error::param("resolution must be positive"));
    }
    let step = |(a, b): (f64, f64), k: usize| a + (b - a) * (k as f64 + 0.5) / resolution as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            out.push(classify_point(problem, [step(region.u1, j), step(region.u2, i)])?);
        }
    }
    Ok(out)
}
