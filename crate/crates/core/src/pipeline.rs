//! Deblurring comparison: reconstruct a blurred, noisy image with the exact
//! operator, with a perturbed estimate of it, and with interval bounds
//! derived from that estimate.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::lattice::{member_u, FeasibilityProblem};
use crate::metrics::{psnr, ssim, SsimParams};
use crate::operators::{
    data_bounds, gaussian_blur_matrix, interval_from_estimate, perturb_operator, threshold_and_normalize, BlurSpec,
    BoundedData, IntervalOperator, SupportWindow,
};
use crate::solver::{solve_constrained_tv, Solution, SolverConfig, TvVariant, FEASIBILITY_TOL};
use crate::sparse::SparseMatrix;

/// Peak value used for PSNR.
pub const PEAK: f64 = 255.0;

/// Sample spacing of the signal setting, so that σ = 0.5 spans five samples.
pub const SIGNAL_SPACING: f64 = 0.1;

/// Offset between the data-noise and operator-noise streams.
const OPERATOR_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NoiseLevel {
    Absolute(f64),
    /// Multiple of `max |u|` of the ground truth.
    Relative(f64),
}

impl NoiseLevel {
    pub fn resolve(&self, truth: &ImageGrid) -> f64 {
        match *self {
            NoiseLevel::Absolute(c) => c,
            NoiseLevel::Relative(r) => r * truth.max_abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentParams {
    pub blur: BlurSpec,
    /// Half-width `c` of the uniform data noise; also the data bound.
    pub data_noise: NoiseLevel,
    /// Perturbation radius relative to `max A`; entries of the perturbed
    /// operator below this radius are dropped before row normalisation.
    pub operator_noise: f64,
    /// Bound radius relative to `max Ã` of the normalised estimate.
    pub bound_level: f64,
    /// Keep `a^u = 0` off the support of `Ã`.
    pub support_aware: bool,
    pub seed: u64,
}

impl ExperimentParams {
    /// Signal setting: σ = 0.5 on samples spaced [`SIGNAL_SPACING`] apart,
    /// Dirichlet boundary, `c = 0.005 max|u|`, operator noise and bound
    /// radius `0.05 max`.
    pub fn signal_default(seed: u64) -> Self {
        Self {
            blur: BlurSpec::new(0.5, crate::operators::Boundary::Dirichlet).with_spacing(SIGNAL_SPACING),
            data_noise: NoiseLevel::Relative(0.005),
            operator_noise: 0.05,
            bound_level: 0.05,
            support_aware: true,
            seed,
        }
    }

    /// Image setting: σ = 1 with Neumann boundary, `c = 10`, operator
    /// noise and bound radius `0.025 max`.
    pub fn image_default(seed: u64) -> Self {
        Self {
            blur: BlurSpec::new(1.0, crate::operators::Boundary::Neumann),
            data_noise: NoiseLevel::Absolute(10.0),
            operator_noise: 0.025,
            bound_level: 0.025,
            support_aware: true,
            seed,
        }
    }
}

/// Solver settings for the signal setting. Exact and noisy-operator runs
/// usually stop at the iteration cap; their objective is flat near the
/// optimum.
pub fn signal_solver() -> SolverConfig {
    SolverConfig { max_iterations: 1_000_000, ..SolverConfig::default() }
}

/// Solver settings for the image setting.
pub fn image_solver() -> SolverConfig {
    SolverConfig { max_iterations: 50_000, ..SolverConfig::default() }
}

/// Everything the reconstructions are computed from.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub truth: ImageGrid,
    pub exact_operator: SparseMatrix,
    /// Thresholded and row-normalised perturbation of the exact operator.
    pub noisy_operator: SparseMatrix,
    pub bounds: IntervalOperator,
    /// Blurred data with uniform noise.
    pub data: ImageGrid,
    pub data_bounds: BoundedData,
    pub noise_level: f64,
}

pub fn prepare(truth: &ImageGrid, params: &ExperimentParams) -> Result<PreparedExperiment> {
    let c = params.data_noise.resolve(truth);
    if !(c >= 0.0) || !(params.operator_noise >= 0.0) || !(params.bound_level >= 0.0) {
        return Err(Error::param("noise levels must be nonnegative"));
    }
    let shape = truth.shape();
    let a = gaussian_blur_matrix(shape, &params.blur)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let blurred = a.mul_vec(truth.values())?;
    let noisy: Vec<f64> = blurred
        .iter()
        .map(|v| if c > 0.0 { v + rng.random_range(-c..=c) } else { *v })
        .collect();
    let data = truth.with_values(noisy)?;

    let window = SupportWindow::for_blur(shape, &params.blur);
    let perturbed = perturb_operator(&a, params.operator_noise, params.seed ^ OPERATOR_STREAM, &window)?;
    let threshold = params.operator_noise * a.max_value();
    let noisy_operator = threshold_and_normalize(&perturbed, threshold)?;
    let d = params.bound_level * noisy_operator.max_value();
    let bounds = interval_from_estimate(&noisy_operator, d, params.support_aware, &window)?;
    Ok(PreparedExperiment {
        truth: truth.clone(),
        exact_operator: a,
        noisy_operator,
        bounds,
        data_bounds: data_bounds(&data, c)?,
        data,
        noise_level: c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variant {
    /// `‖Au - f‖∞ <= c` with the exact operator.
    Exact,
    /// `‖Ãu - f‖∞ <= c` with the normalised estimate.
    NoisyOperator,
    /// `A^l u <= f^u`, `A^u u >= f^l`.
    Interval(TvVariant),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Exact => "exact",
            Variant::NoisyOperator => "noisy_operator",
            Variant::Interval(TvVariant::Isotropic) => "interval_isotropic",
            Variant::Interval(TvVariant::Anisotropic) => "interval_anisotropic",
        }
    }

    /// The variants compared for a signal or an image.
    pub fn standard_set(is_signal: bool) -> Vec<Variant> {
        let mut v = alloc::vec![Variant::Exact, Variant::NoisyOperator, Variant::Interval(TvVariant::Isotropic)];
        if !is_signal {
            v.push(Variant::Interval(TvVariant::Anisotropic));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VariantOutcome {
    pub variant: Variant,
    pub solution: Solution,
    pub psnr: f64,
    pub ssim: f64,
    /// For interval variants: whether `u` lies in `U` of the bounds used,
    /// up to the solver's feasibility tolerance.
    pub in_feasible_set: Option<bool>,
}

impl PreparedExperiment {
    pub fn problem(&self, variant: Variant) -> Result<FeasibilityProblem> {
        let op = match variant {
            Variant::Exact => IntervalOperator::exact(self.exact_operator.clone()),
            Variant::NoisyOperator => IntervalOperator::exact(self.noisy_operator.clone()),
            Variant::Interval(_) => self.bounds.clone(),
        };
        FeasibilityProblem::new(op, self.data_bounds.clone())
    }

    /// Solves one variant; the TV variant of `Interval` overrides `config`.
    pub fn solve(&self, variant: Variant, config: &SolverConfig) -> Result<VariantOutcome> {
        let problem = self.problem(variant)?;
        let mut config = config.clone();
        if let Variant::Interval(tv) = variant {
            config.tv_variant = tv;
        }
        let solution = solve_constrained_tv(&problem, &config)?;
        let in_feasible_set = match variant {
            Variant::Interval(_) => {
                let tol = FEASIBILITY_TOL * solution.scale.max(1.0);
                Some(member_u(&solution.u, &problem, tol)?.member)
            }
            _ => None,
        };
        Ok(VariantOutcome {
            variant,
            psnr: psnr(&solution.u, &self.truth, PEAK)?,
            ssim: ssim(&solution.u, &self.truth, &SsimParams::default())?,
            solution,
            in_feasible_set,
        })
    }

    pub fn data_psnr(&self) -> Result<f64> {
        psnr(&self.data, &self.truth, PEAK)
    }

    pub fn data_ssim(&self) -> Result<f64> {
        ssim(&self.data, &self.truth, &SsimParams::default())
    }
}

/// Prepares the experiment and solves the given variants in order.
pub fn run(truth: &ImageGrid, params: &ExperimentParams, config: &SolverConfig, variants: &[Variant]) -> Result<(PreparedExperiment, Vec<VariantOutcome>)> {
    let prepared = prepare(truth, params)?;
    let outcomes = variants.iter().map(|v| prepared.solve(*v, config)).collect::<Result<Vec<_>>>()?;
    Ok((prepared, outcomes))
}
