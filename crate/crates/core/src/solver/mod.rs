//! Primal-dual solver for
//!
//! ```text
//! min TV(u) + γ‖u‖₂   s.t.   u >= 0,  A^l u <= f^u,  A^u u >= f^l.
//! ```
//!
//! The constraints are split as `K = [∇; A^l; A^u]` and the problem is
//! solved by the relaxed Chambolle–Pock iteration. Data are rescaled by
//! `s = max(|f^l|, |f^u|)` internally so that all quantities are `O(1)`;
//! reported values are in the original units.

mod tv;

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::lattice::FeasibilityProblem;
use crate::math::{norm2, sqrt};
use crate::operators::{data_bounds, IntervalOperator};
use crate::sparse::SparseMatrix;

pub use tv::{tv_value, Gradient, TvVariant};

/// Constraint violation (scaled units) below which an iterate counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;

const POWER_ITERATIONS: usize = 50;
const CHECK_EVERY: usize = 10;
const REFRESH_EVERY: usize = 1000;
/// `τσL² = 1 / STEP_MARGIN²` with the estimated norm `L`.
const STEP_MARGIN: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Bound on the RMS primal and dual residuals (scaled units).
    pub tolerance: f64,
    /// Weight of the `‖u‖₂` term.
    pub gamma: f64,
    pub tv_variant: TvVariant,
    /// `τ / σ` up to the factor `L²`.
    pub step_ratio: f64,
    /// Relaxation parameter `ρ ∈ [1, 2]`.
    pub over_relaxation: f64,
    /// Record a trace entry every this many iterations (0 disables tracing).
    pub trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            tolerance: 1e-6,
            gamma: 1e-4,
            tv_variant: TvVariant::Isotropic,
            step_ratio: 0.1,
            over_relaxation: 1.0,
            trace_every: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations must be positive"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::param("tolerance must be positive"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma must be nonnegative"));
        }
        if !(self.step_ratio > 0.0 && self.step_ratio.is_finite()) {
            return Err(Error::param("step_ratio must be positive"));
        }
        if !(1.0..=2.0).contains(&self.over_relaxation) {
            return Err(Error::param("over_relaxation must lie in [1, 2]"));
        }
        Ok(())
    }
}

/// Constraint slacks of a point, in the units of the data.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintSlacks {
    /// `min_j u_j`.
    pub min_u: f64,
    /// `max_i (A^l u - f^u)_i`.
    pub upper: f64,
    /// `max_i (f^l - A^u u)_i`.
    pub lower: f64,
}

impl ConstraintSlacks {
    pub fn compute(u: &[f64], op: &IntervalOperator, f_lower: &[f64], f_upper: &[f64]) -> Result<Self> {
        let lo = op.lower().mul_vec(u)?;
        let hi = op.upper().mul_vec(u)?;
        let upper = lo.iter().zip(f_upper).map(|(a, f)| a - f).fold(f64::NEG_INFINITY, f64::max);
        let lower = f_lower.iter().zip(&hi).map(|(f, a)| f - a).fold(f64::NEG_INFINITY, f64::max);
        let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { min_u, upper, lower })
    }

    /// Largest violation of any constraint, zero when feasible.
    pub fn max_violation(&self) -> f64 {
        (-self.min_u).max(self.upper).max(self.lower).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub residual: f64,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Solution {
    pub u: ImageGrid,
    pub iterations_used: usize,
    pub primal_dual_residual: f64,
    /// Computed from the returned `u`.
    pub constraint_slacks: ConstraintSlacks,
    /// `TV(u) + γ‖u‖₂` of the returned `u`.
    pub objective_value: f64,
    /// Residual below tolerance and scaled violation below [`FEASIBILITY_TOL`].
    pub converged: bool,
    /// Data scale `s` used internally.
    pub scale: f64,
    pub trace: Vec<TraceRecord>,
}

/// The stacked operator `[∇; B_1; ..; B_k]` acting on a grid of a given shape.
#[derive(Debug, Clone)]
pub struct StackedOperator<'a> {
    gradient: Option<Gradient>,
    blocks: Vec<&'a SparseMatrix>,
    input_len: usize,
}

impl<'a> StackedOperator<'a> {
    pub fn new(shape: (usize, usize), with_gradient: bool, blocks: Vec<&'a SparseMatrix>) -> Result<Self> {
        let input_len = shape.0 * shape.1;
        if let Some(b) = blocks.iter().find(|b| b.ncols() != input_len) {
            return Err(Error::ShapeMismatch { expected: (b.nrows(), input_len), found: b.shape() });
        }
        Ok(Self {
            gradient: with_gradient.then(|| Gradient::new(shape)),
            blocks,
            input_len,
        })
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn output_len(&self) -> usize {
        self.gradient.map_or(0, |g| g.output_len()) + self.blocks.iter().map(|b| b.nrows()).sum::<usize>()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut offset = 0;
        if let Some(g) = &self.gradient {
            g.apply(x, &mut out[..g.output_len()]);
            offset = g.output_len();
        }
        for b in &self.blocks {
            b.mul_vec_into(x, &mut out[offset..offset + b.nrows()]);
            offset += b.nrows();
        }
    }

    /// `out = Kᵀ y`.
    pub fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut offset = 0;
        if let Some(g) = &self.gradient {
            g.adjoint_add(&y[..g.output_len()], out);
            offset = g.output_len();
        }
        for b in &self.blocks {
            b.mul_transpose_add(&y[offset..offset + b.nrows()], out);
            offset += b.nrows();
        }
    }
}

/// Power-iteration estimate of `‖K‖₂` from a fixed pseudo-random start.
pub fn estimate_operator_norm(op: &StackedOperator<'_>) -> f64 {
    let n = op.input_len();
    if n == 0 || op.output_len() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut kx = vec![0.0; op.output_len()];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let nx = norm2(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        op.apply(&x, &mut kx);
        estimate = norm2(&kx);
        if estimate == 0.0 {
            return 0.0;
        }
        op.apply_adjoint(&kx, &mut x);
    }
    estimate
}

/// Solves from the warm start `max(A_hᵀ f_δ, 0)` with `u` shaped like the
/// data when the operator is square, else as a signal.
pub fn solve_constrained_tv(problem: &FeasibilityProblem, config: &SolverConfig) -> Result<Solution> {
    let (m, n) = problem.op().shape();
    let data = problem.data();
    let shape = if m == n { data.shape() } else { (n, 1) };
    let mid_op = problem.op().lower().zip_union(problem.op().upper(), |a, b| 0.5 * (a + b))?;
    let mid_data: Vec<f64> = data.lower().values().iter().zip(data.upper().values()).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut init = vec![0.0; n];
    mid_op.mul_transpose_add(&mid_data, &mut init);
    init.iter_mut().for_each(|v| *v = v.max(0.0));
    solve_constrained_tv_from(problem, config, &ImageGrid::new(shape.0, shape.1, init)?)
}

/// Solves from a given starting point; the solution takes the shape of `init`.
pub fn solve_constrained_tv_from(problem: &FeasibilityProblem, config: &SolverConfig, init: &ImageGrid) -> Result<Solution> {
    config.validate()?;
    let op = problem.op();
    let (m, n) = op.shape();
    if init.len() != n {
        return Err(Error::ShapeMismatch { expected: (n, 1), found: init.shape() });
    }
    let (fl, fu) = (problem.data().lower().values(), problem.data().upper().values());
    check_trivially_infeasible(op, fl, fu)?;

    let scale = {
        let s = problem.data().lower().max_abs().max(problem.data().upper().max_abs());
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let fl_s: Vec<f64> = fl.iter().map(|v| v / scale).collect();
    let fu_s: Vec<f64> = fu.iter().map(|v| v / scale).collect();

    let k = StackedOperator::new(init.shape(), true, vec![op.lower(), op.upper()])?;
    let grad = Gradient::new(init.shape());
    let ng = grad.output_len();
    let nd = k.output_len();
    let norm = estimate_operator_norm(&k);
    let (tau, sigma) = if norm > 0.0 {
        (config.step_ratio / (STEP_MARGIN * norm), 1.0 / (STEP_MARGIN * config.step_ratio * norm))
    } else {
        (config.step_ratio, 1.0 / config.step_ratio)
    };
    let rho = config.over_relaxation;
    let gamma = config.gamma;

    let mut u: Vec<f64> = init.values().iter().map(|v| v.max(0.0) / scale).collect();
    let mut y = vec![0.0; nd];
    let mut ku = vec![0.0; nd];
    k.apply(&u, &mut ku);
    let mut kty = vec![0.0; n];

    let mut u_t = vec![0.0; n];
    let mut ext = vec![0.0; n];
    let mut k_ext = vec![0.0; nd];
    let mut k_ut = vec![0.0; nd];
    let mut y_t = vec![0.0; nd];
    let mut kty_t = vec![0.0; n];

    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iterations {
        iterations = it;
        if it % REFRESH_EVERY == 0 {
            k.apply(&u, &mut ku);
            k.apply_adjoint(&y, &mut kty);
        }
        // primal step: prox of τ(γ‖·‖₂ + ι_{>=0})
        for j in 0..n {
            u_t[j] = (u[j] - tau * kty[j]).max(0.0);
        }
        let nrm = norm2(&u_t);
        let shrink = if nrm > tau * gamma { 1.0 - tau * gamma / nrm } else { 0.0 };
        u_t.iter_mut().for_each(|v| *v *= shrink);

        for j in 0..n {
            ext[j] = 2.0 * u_t[j] - u[j];
        }
        k.apply(&ext, &mut k_ext);
        // dual step
        for i in 0..nd {
            y_t[i] = y[i] + sigma * k_ext[i];
        }
        grad.project_dual(&mut y_t[..ng], config.tv_variant);
        for i in 0..m {
            let q = &mut y_t[ng + i];
            *q = (*q - sigma * fu_s[i]).max(0.0);
            let q = &mut y_t[ng + m + i];
            *q = (*q - sigma * fl_s[i]).min(0.0);
        }
        k.apply_adjoint(&y_t, &mut kty_t);
        // K ũ from K(2ũ - u) and K u by linearity
        for i in 0..nd {
            k_ut[i] = 0.5 * (k_ext[i] + ku[i]);
        }

        let check = it % CHECK_EVERY == 0 || it == config.max_iterations;
        let trace_due = config.trace_every > 0 && it % config.trace_every == 0;
        if check || trace_due {
            let mut p2 = 0.0;
            for j in 0..n {
                let p = (u[j] - u_t[j]) / tau - (kty[j] - kty_t[j]);
                p2 += p * p;
            }
            let mut d2 = 0.0;
            for i in 0..nd {
                let d = (y[i] - y_t[i]) / sigma - (ku[i] - k_ut[i]);
                d2 += d * d;
            }
            residual = sqrt(p2 / n as f64).max(sqrt(d2 / nd as f64));
            let violation = scaled_violation(&k_ut[ng..], m, &fl_s, &fu_s);
            if trace_due {
                trace.push(TraceRecord {
                    iteration: it,
                    objective: scale * (grad.tv_of(&u_t, config.tv_variant) + gamma * norm2(&u_t)),
                    residual,
                    max_violation: violation * scale,
                });
            }
            if residual < config.tolerance && violation * scale.max(1.0) <= FEASIBILITY_TOL {
                converged = true;
            }
        }

        // relaxation
        for j in 0..n {
            u[j] += rho * (u_t[j] - u[j]);
            kty[j] += rho * (kty_t[j] - kty[j]);
        }
        for i in 0..nd {
            y[i] += rho * (y_t[i] - y[i]);
            ku[i] += rho * (k_ut[i] - ku[i]);
        }
        if converged {
            break;
        }
    }

    let values: Vec<f64> = u_t.iter().map(|v| v * scale).collect();
    let u_out = init.with_values(values)?;
    let slacks = ConstraintSlacks::compute(u_out.values(), op, fl, fu)?;
    let objective_value = tv_value(&u_out, config.tv_variant) + gamma * norm2(u_out.values());
    Ok(Solution {
        u: u_out,
        iterations_used: iterations,
        primal_dual_residual: residual,
        constraint_slacks: slacks,
        objective_value,
        converged,
        scale,
        trace,
    })
}

/// `min TV(u) + γ‖u‖₂` s.t. `u >= 0`, `‖Au - f‖∞ <= c`.
pub fn solve_residual_linf(a: &SparseMatrix, f: &ImageGrid, c: f64, config: &SolverConfig) -> Result<Solution> {
    let problem = FeasibilityProblem::new(IntervalOperator::exact(a.clone()), data_bounds(f, c)?)?;
    solve_constrained_tv(&problem, config)
}

fn scaled_violation(k_u: &[f64], m: usize, fl: &[f64], fu: &[f64]) -> f64 {
    let mut v: f64 = 0.0;
    for i in 0..m {
        v = v.max(k_u[i] - fu[i]).max(fl[i] - k_u[m + i]);
    }
    v
}

/// Rows whose sign pattern alone rules out every `u >= 0`.
fn check_trivially_infeasible(op: &IntervalOperator, fl: &[f64], fu: &[f64]) -> Result<()> {
    for i in 0..op.shape().0 {
        let (_, lo) = op.lower().row(i);
        if lo.iter().all(|v| *v >= 0.0) && fu[i] < 0.0 {
            return Err(Error::Infeasible(alloc::format!("row {i}: A^l u >= 0 > f^u")));
        }
        let (_, hi) = op.upper().row(i);
        if hi.iter().all(|v| *v <= 0.0) && fl[i] > 0.0 {
            return Err(Error::Infeasible(alloc::format!("row {i}: A^u u <= 0 < f^l")));
        }
    }
    Ok(())
}
