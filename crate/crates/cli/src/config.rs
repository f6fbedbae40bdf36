//! TOML experiment configuration.
//!
//! Every section is optional; [`ExperimentConfig::resolve`] fills the gaps
//! with the defaults of the chosen scenario, and reports embed the resolved
//! form so that a run can be repeated from its report alone.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use orderbound::lattice::Region;
use orderbound::operators::BlurSpec;
use orderbound::phantom::{generate_phantom, PhantomKind};
use orderbound::pipeline::{image_solver, signal_solver, ExperimentParams, NoiseLevel, Variant};
use orderbound::solver::SolverConfig;
use orderbound::ImageGrid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Deblur1d,
    Deblur2d,
    Feasible2d,
    Tighten,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhantomSource {
    Steps1d,
    Squares,
    Thinlines,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    pub kind: PhantomSource,
    /// `(rows, cols)`; ignored for files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<(usize, usize)>,
    /// PGM image, or single-column CSV signal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl PhantomConfig {
    pub fn load(&self) -> Result<ImageGrid> {
        let procedural = |kind, default: (usize, usize)| Ok(generate_phantom(kind, self.shape.unwrap_or(default))?);
        match self.kind {
            PhantomSource::Steps1d => procedural(PhantomKind::Steps1d, (200, 1)),
            PhantomSource::Squares => procedural(PhantomKind::Squares, (128, 128)),
            PhantomSource::Thinlines => procedural(PhantomKind::Thinlines, (128, 128)),
            PhantomSource::File => {
                let path = self.path.as_deref().context("phantom kind 'file' needs a path")?;
                crate::io::read_grid(path)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Half-width `c` of the uniform data noise.
    pub data_level: NoiseLevel,
    /// Perturbation radius relative to the largest operator entry.
    pub operator_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    /// Bound radius relative to the largest entry of the estimate.
    pub d: f64,
    pub support_aware: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    /// Random points drawn uniformly from the region.
    pub samples: usize,
    /// Also classify the cell centres of a `resolution²` grid (0 disables).
    #[serde(default)]
    pub resolution: usize,
    pub u1: (f64, f64),
    pub u2: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TightenConfig {
    pub lower: PathBuf,
    pub upper: PathBuf,
    pub v: PathBuf,
    pub g: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phantom: Option<PhantomConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blur: Option<BlurSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<Variant>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tighten: Option<TightenConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config; relative paths inside it are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.phantom.as_mut().and_then(|p| p.path.as_mut()) {
            rebase(p);
        }
        if let Some(t) = cfg.tighten.as_mut() {
            for p in [&mut t.lower, &mut t.upper, &mut t.v, &mut t.g] {
                rebase(p);
            }
        }
        Ok(cfg)
    }

    /// Fills unset sections with the scenario defaults and validates the result.
    pub fn resolve(mut self) -> Result<Self> {
        let preset = match self.scenario {
            Scenario::Deblur1d => Some((ExperimentParams::signal_default(self.seed), PhantomSource::Steps1d, true)),
            Scenario::Deblur2d => Some((ExperimentParams::image_default(self.seed), PhantomSource::Squares, false)),
            Scenario::Feasible2d | Scenario::Tighten => None,
        };
        if let Some((params, phantom, is_signal)) = preset {
            self.phantom.get_or_insert(PhantomConfig { kind: phantom, shape: None, path: None });
            self.blur.get_or_insert(params.blur);
            self.noise.get_or_insert(NoiseConfig { data_level: params.data_noise, operator_level: params.operator_noise });
            self.bounds.get_or_insert(BoundsConfig { d: params.bound_level, support_aware: params.support_aware });
            self.solver.get_or_insert_with(|| if is_signal { signal_solver() } else { image_solver() });
            self.variants.get_or_insert_with(|| Variant::standard_set(is_signal));
        }
        if self.scenario == Scenario::Feasible2d {
            self.sampler.get_or_insert(SamplerConfig { samples: 10_000, resolution: 0, u1: (0.0, 30.0), u2: (0.0, 30.0) });
        }
        self.output_dir.get_or_insert_with(|| PathBuf::from("out"));
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if let Some(n) = &self.noise {
            let level = match n.data_level {
                NoiseLevel::Absolute(c) | NoiseLevel::Relative(c) => c,
            };
            ensure!(level >= 0.0 && n.operator_level >= 0.0, "noise levels must be nonnegative");
        }
        if let Some(b) = &self.bounds {
            ensure!(b.d >= 0.0, "bound radius d must be nonnegative");
        }
        if let Some(s) = &self.solver {
            s.validate()?;
        }
        if let Some(p) = &self.phantom {
            if p.kind == PhantomSource::File {
                let path = p.path.as_deref().context("phantom kind 'file' needs a path")?;
                ensure!(path.is_file(), "phantom file {} does not exist", path.display());
            }
        }
        if let Some(v) = &self.variants {
            ensure!(!v.is_empty(), "at least one variant is required");
        }
        if let Some(s) = &self.sampler {
            Region { u1: s.u1, u2: s.u2 }.check()?;
        }
        match self.scenario {
            Scenario::Tighten => {
                let t = self.tighten.as_ref().context("scenario 'tighten' needs a [tighten] section")?;
                for p in [&t.lower, &t.upper, &t.v, &t.g] {
                    ensure!(p.is_file(), "input file {} does not exist", p.display());
                }
            }
            Scenario::Feasible2d => {}
            Scenario::Deblur1d | Scenario::Deblur2d => {
                if self.tighten.is_some() || self.sampler.is_some() {
                    bail!("[tighten] and [sampler] sections only apply to their own scenarios");
                }
            }
        }
        Ok(())
    }

    /// Experiment parameters of a resolved deblurring config.
    pub fn params(&self) -> Result<ExperimentParams> {
        let (Some(blur), Some(noise), Some(bounds)) = (self.blur, &self.noise, &self.bounds) else {
            bail!("config is not resolved");
        };
        Ok(ExperimentParams {
            blur,
            data_noise: noise.data_level,
            operator_noise: noise.operator_level,
            bound_level: bounds.d,
            support_aware: bounds.support_aware,
            seed: self.seed,
        })
    }
}
