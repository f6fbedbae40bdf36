//! Scenario runners behind the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use orderbound::lattice::{classify_grid, fig1_problem, sample_feasible_set_2d, Region};
use orderbound::metrics::{psnr, ssim, SsimParams};
use orderbound::operators::IntervalOperator;
use orderbound::pipeline::{prepare, PEAK};
use orderbound::tightening::tighten_bounds;
use orderbound::SparseMatrix;

use crate::config::{ExperimentConfig, Scenario};
use crate::io;
use crate::report::{write_json, DeblurReport, Metrics, SampleReport, TightenReport, VariantReport};

/// Outcome of a scenario: where the report went and the first failure, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: PathBuf,
    pub failure: Option<anyhow::Error>,
}

pub fn run(config: ExperimentConfig) -> Result<RunOutcome> {
    let config = config.resolve()?;
    let dir = config.output_dir.clone().context("config is not resolved")?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    match config.scenario {
        Scenario::Deblur1d | Scenario::Deblur2d => deblur(config, &dir),
        Scenario::Feasible2d => sample_set(config, &dir).map(|report| RunOutcome { report, failure: None }),
        Scenario::Tighten => {
            let t = config.tighten.clone().context("missing [tighten] section")?;
            let report = tighten_files(&t.lower, &t.upper, &t.v, &t.g, &dir, Some(config))?;
            Ok(RunOutcome { report, failure: None })
        }
    }
}

fn deblur(config: ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let truth = config.phantom.as_ref().context("missing phantom")?.load()?;
    if config.scenario == Scenario::Deblur1d {
        ensure!(truth.is_signal(), "deblur1d needs a single-column signal");
    }
    let params = config.params()?;
    let solver = config.solver.clone().context("missing solver config")?;
    let prepared = prepare(&truth, &params)?;
    let truth_path = io::write_grid(dir, "truth", &truth)?;
    let blurred_path = io::write_grid(dir, "blurred", &prepared.data)?;

    let mut failure = None;
    let mut variants = Vec::new();
    for &variant in config.variants.as_deref().unwrap_or_default() {
        let name = variant.name();
        match prepared.solve(variant, &solver) {
            Ok(out) => {
                let s = &out.solution;
                let reconstruction = io::write_grid(dir, &format!("recon_{name}"), &s.u)?;
                let trace = if s.trace.is_empty() {
                    None
                } else {
                    let path = dir.join(format!("trace_{name}.csv"));
                    io::write_trace(&path, &s.trace)?;
                    Some(path)
                };
                variants.push(VariantReport {
                    variant: name.to_owned(),
                    metrics: Some(Metrics { psnr: out.psnr, ssim: out.ssim }),
                    converged: Some(s.converged),
                    iterations: Some(s.iterations_used),
                    primal_dual_residual: Some(s.primal_dual_residual),
                    objective: Some(s.objective_value),
                    constraint_slacks: Some(s.constraint_slacks),
                    in_feasible_set: out.in_feasible_set,
                    reconstruction: Some(reconstruction),
                    trace,
                    error: None,
                });
            }
            Err(e) => {
                variants.push(VariantReport::failed(name, e.to_string()));
                failure.get_or_insert(anyhow::Error::new(e).context(format!("variant {name}")));
            }
        }
    }

    let report = DeblurReport {
        complete: failure.is_none(),
        noise_level: prepared.noise_level,
        data: Metrics { psnr: prepared.data_psnr()?, ssim: prepared.data_ssim()? },
        variants,
        truth: truth_path,
        blurred: blurred_path,
        config,
    };
    let path = dir.join("report.json");
    write_json(&path, &report)?;
    Ok(RunOutcome { report: path, failure })
}

/// Classifies random (and optionally gridded) points of the two-variable
/// single-row problem against `U` and `U**`.
pub fn sample_set(config: ExperimentConfig, dir: &Path) -> Result<PathBuf> {
    if config.scenario != Scenario::Feasible2d {
        bail!("sample-set needs scenario = \"feasible2d\"");
    }
    let s = config.sampler.clone().context("missing [sampler] section")?;
    let region = Region { u1: s.u1, u2: s.u2 };
    let (problem, u_gen) = fig1_problem(config.seed)?;
    let points = sample_feasible_set_2d(&problem, s.samples, &region, config.seed)?;
    let samples_csv = dir.join("samples.csv");
    io::write_samples(&samples_csv, &points)?;
    let grid_csv = if s.resolution > 0 {
        let path = dir.join("grid.csv");
        io::write_samples(&path, &classify_grid(&problem, &region, s.resolution)?)?;
        Some(path)
    } else {
        None
    };
    let side = problem.side_constraint().context("sampler problem has no side constraint")?;
    let report = SampleReport {
        generating_point: u_gen,
        operator_lower: problem.op().lower().to_dense(),
        operator_upper: problem.op().upper().to_dense(),
        data: problem.data().upper().values()[0],
        side_v: [side.v.values()[0], side.v.values()[1]],
        side_g: side.g.values()[0],
        samples: points.len(),
        in_u: points.iter().filter(|p| p.in_u).count(),
        in_ustarstar: points.iter().filter(|p| p.in_ustarstar).count(),
        samples_csv,
        grid_csv,
        config,
    };
    let path = dir.join("report.json");
    write_json(&path, &report)?;
    Ok(path)
}

fn total_width(op: &IntervalOperator) -> f64 {
    op.upper().values().iter().zip(op.lower().values()).map(|(u, l)| u - l).sum()
}

/// Tightens `[L, U]` under `Av = g` and writes `tightened_lower.mtx`,
/// `tightened_upper.mtx` and a report into `dir`.
pub fn tighten_files(lower: &Path, upper: &Path, v: &Path, g: &Path, dir: &Path, config: Option<ExperimentConfig>) -> Result<PathBuf> {
    let op = IntervalOperator::new(io::read_matrix_market(lower)?, io::read_matrix_market(upper)?)?;
    let (v, g) = (io::read_signal(v)?, io::read_signal(g)?);
    let tight = tighten_bounds(&op, &v, &g)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let lower_out = dir.join("tightened_lower.mtx");
    let upper_out = dir.join("tightened_upper.mtx");
    io::write_matrix_market(&lower_out, tight.lower())?;
    io::write_matrix_market(&upper_out, tight.upper())?;
    let width = |m: &SparseMatrix, n: &SparseMatrix| m.values().iter().zip(n.values()).map(|(a, b)| a - b).collect::<Vec<_>>();
    let before = width(op.upper(), op.lower());
    let after = width(tight.upper(), tight.lower());
    let report = TightenReport {
        config,
        rows: op.shape().0,
        cols: op.shape().1,
        stored_entries: op.lower().nnz(),
        tightened_entries: before.iter().zip(&after).filter(|(b, a)| a < b).count(),
        width_before: total_width(&op),
        width_after: total_width(&tight),
        lower: lower_out,
        upper: upper_out,
    };
    let path = dir.join("tighten_report.json");
    write_json(&path, &report)?;
    Ok(path)
}

/// PSNR and SSIM of `image` against `reference`.
pub fn metrics(image: &Path, reference: &Path, peak: f64) -> Result<Metrics> {
    let (u, r) = (io::read_grid(image)?, io::read_grid(reference)?);
    Ok(Metrics { psnr: psnr(&u, &r, peak)?, ssim: ssim(&u, &r, &SsimParams { data_range: peak, ..SsimParams::default() })? })
}

/// The default peak for [`metrics`].
pub const DEFAULT_PEAK: f64 = PEAK;
