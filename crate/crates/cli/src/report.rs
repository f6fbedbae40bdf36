//! JSON reports.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use orderbound::solver::ConstraintSlacks;
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantReport {
    pub variant: String,
    /// `None` when the variant failed; see `error`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primal_dual_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint_slacks: Option<ConstraintSlacks>,
    /// Membership of the reconstruction in the interval feasible set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_feasible_set: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VariantReport {
    pub fn failed(variant: &str, error: String) -> Self {
        Self {
            variant: variant.to_owned(),
            metrics: None,
            converged: None,
            iterations: None,
            primal_dual_residual: None,
            objective: None,
            constraint_slacks: None,
            in_feasible_set: None,
            reconstruction: None,
            trace: None,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeblurReport {
    pub config: ExperimentConfig,
    /// False when any variant failed.
    pub complete: bool,
    pub noise_level: f64,
    pub data: Metrics,
    pub variants: Vec<VariantReport>,
    pub truth: PathBuf,
    pub blurred: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub config: ExperimentConfig,
    pub generating_point: [f64; 2],
    pub operator_lower: Vec<f64>,
    pub operator_upper: Vec<f64>,
    pub data: f64,
    pub side_v: [f64; 2],
    pub side_g: f64,
    pub samples: usize,
    pub in_u: usize,
    pub in_ustarstar: usize,
    pub samples_csv: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TightenReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    pub rows: usize,
    pub cols: usize,
    pub stored_entries: usize,
    /// Entries whose interval shrank.
    pub tightened_entries: usize,
    /// `Σ (a^u - a^l)` before and after.
    pub width_before: f64,
    pub width_after: f64,
    pub lower: PathBuf,
    pub upper: PathBuf,
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
