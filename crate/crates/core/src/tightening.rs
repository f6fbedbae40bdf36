//! Tightening of interval operator bounds with a known side constraint
//! `Av = g`.
//!
//! For a fixed entry `(i, j)` the extreme values of `a_ij` over
//! `{a : a^l <= a <= a^u, Σ_k a_k v_k = g_i}` are attained by pushing every
//! other entry of the row to one of its bounds, which gives
//!
//! ```text
//! ã^l_ij = max{ a^l_ij, (g_i - Σ_{k≠j} a^u_ik v_k) / v_j }
//! ã^u_ij = min{ a^u_ij, (g_i - Σ_{k≠j} a^l_ik v_k) / v_j }
//! ```
//!
//! Entries with `v_j = 0` are not coupled to the constraint and keep their
//! bounds. Only stored entries are processed; an entry outside the pattern
//! is fixed at zero.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::lp::{solve_lp, LinearProgram, LpOutcome};
use crate::operators::IntervalOperator;

/// Relative slack allowed when checking `A^l v <= g <= A^u v`.
const ROW_TOL: f64 = 1e-9;

fn check_inputs(op: &IntervalOperator, v: &ImageGrid, g: &ImageGrid) -> Result<()> {
    let (m, n) = op.shape();
    if v.len() != n {
        return Err(Error::ShapeMismatch { expected: (n, 1), found: v.shape() });
    }
    if g.len() != m {
        return Err(Error::ShapeMismatch { expected: (m, 1), found: g.shape() });
    }
    if v.values().iter().any(|x| *x < 0.0) {
        return Err(Error::param("v must be nonnegative"));
    }
    Ok(())
}

/// Closed-form tightening of every stored entry.
pub fn tighten_bounds(op: &IntervalOperator, v: &ImageGrid, g: &ImageGrid) -> Result<IntervalOperator> {
    check_inputs(op, v, g)?;
    let (lower, upper) = (op.lower(), op.upper());
    let v = v.values();
    let mut new_lower = Vec::with_capacity(lower.nnz());
    let mut new_upper = Vec::with_capacity(lower.nnz());
    for i in 0..lower.nrows() {
        let (cols, al) = lower.row(i);
        let (_, au) = upper.row(i);
        let gi = g.values()[i];
        let sl: f64 = cols.iter().zip(al).map(|(&c, a)| a * v[c]).sum();
        let su: f64 = cols.iter().zip(au).map(|(&c, a)| a * v[c]).sum();
        let tol = ROW_TOL * (1.0 + gi.abs());
        if sl > gi + tol || su < gi - tol {
            return Err(Error::InfeasibleRow { row: i });
        }
        for (k, &c) in cols.iter().enumerate() {
            let (lo, hi) = (al[k], au[k]);
            if v[c] == 0.0 {
                new_lower.push(lo);
                new_upper.push(hi);
                continue;
            }
            let from_upper = (gi - (su - hi * v[c])) / v[c];
            let from_lower = (gi - (sl - lo * v[c])) / v[c];
            let l = lo.max(from_upper).min(hi);
            let u = hi.min(from_lower).max(l);
            new_lower.push(l);
            new_upper.push(u);
        }
    }
    let lower = lower.with_pattern_values(new_lower);
    let upper = upper.with_pattern_values(new_upper);
    IntervalOperator::new(lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    Min,
    Max,
}

/// Optimal value of `a_ij` in direction `dir` over the row polytope,
/// computed by the simplex method. `(i, j)` must be a stored entry.
pub fn lp_tighten_oracle(
    op: &IntervalOperator,
    v: &ImageGrid,
    g: &ImageGrid,
    i: usize,
    j: usize,
    dir: Direction,
) -> Result<f64> {
    check_inputs(op, v, g)?;
    let (m, n) = op.shape();
    if i >= m || j >= n {
        return Err(Error::param("entry index out of range"));
    }
    let (cols, al) = op.lower().row(i);
    let (_, au) = op.upper().row(i);
    let Some(target) = cols.iter().position(|&c| c == j) else {
        return Err(Error::param("entry is not stored in the operator pattern"));
    };
    let k = cols.len();
    let mut objective = vec![0.0; k];
    objective[target] = match dir {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    let row: Vec<f64> = cols.iter().map(|&c| v.values()[c]).collect();
    let lp = LinearProgram::new(objective, row, vec![g.values()[i]], al.to_vec(), au.to_vec())?;
    match solve_lp(&lp)? {
        LpOutcome::Optimal { x, .. } => Ok(x[target]),
        LpOutcome::Infeasible(_) => Err(Error::InfeasibleRow { row: i }),
        LpOutcome::Unbounded => Err(Error::Numerical("bounded LP reported unbounded".into())),
    }
}
