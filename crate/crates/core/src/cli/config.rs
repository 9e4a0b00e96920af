use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Experiment, Format};
use crate::error::{Error, Result};
use crate::functionals::Params;
use crate::grid::{Grading, RadialGrid};
use crate::minimizer::DescentOptions;

/// Parameter tuple as written in a config; unset entries fall back to per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub q: Option<f64>,
}

impl ParamsConfig {
    fn defaults(mode: Experiment) -> (usize, usize, f64, f64, f64) {
        // (N, k, p, α, β)
        match mode {
            Experiment::Constant | Experiment::EpsSweep => (3, 3, 2.0, 0.0, 0.0),
            Experiment::ProductSweep => (4, 3, 2.0, 0.0, 2.0),
            Experiment::Symmetrize | Experiment::Minimize | Experiment::Properties => {
                (4, 2, 2.0, 0.0, 1.0)
            }
            Experiment::SplitDemo => (2, 1, 2.0, 0.0, 0.0),
        }
    }

    pub fn p_or_default(&self, mode: Experiment) -> f64 {
        self.p.unwrap_or(Self::defaults(mode).2)
    }

    /// Hardy-mode tuple `(N, k, p, α)`.
    pub fn hardy(&self, mode: Experiment) -> Result<Params> {
        let (n, k, p, alpha, _) = Self::defaults(mode);
        Params::hardy(
            self.n.unwrap_or(n),
            self.k.unwrap_or(k),
            self.p.unwrap_or(p),
            self.alpha.unwrap_or(alpha),
        )
    }

    /// Condition-(H) tuple; an explicit `q` must agree with the derived one.
    pub fn hardy_sobolev(&self, mode: Experiment) -> Result<Params> {
        let (n, k, p, _, beta) = Self::defaults(mode);
        let (n, k, p, beta) = (
            self.n.unwrap_or(n),
            self.k.unwrap_or(k),
            self.p.unwrap_or(p),
            self.beta.unwrap_or(beta),
        );
        match self.q {
            Some(q) => Params::hardy_sobolev_with_q(n, k, p, beta, q),
            None => Params::hardy_sobolev(n, k, p, beta),
        }
    }
}

/// A radial grid whose dimension comes from the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub n: usize,
    #[serde(default = "uniform")]
    pub grading: Grading,
}

fn uniform() -> Grading {
    Grading::Uniform
}

impl GridConfig {
    pub fn new(r_max: f64, n: usize, grading: Grading) -> Self {
        GridConfig { r_max, n, grading }
    }

    /// Builds the grid with `n · 2^refine` cells.
    pub fn build(&self, d: usize, refine: u32) -> Result<RadialGrid> {
        RadialGrid::new(
            d,
            self.r_max,
            refined(self.n, refine)?,
            self.grading,
        )
    }
}

pub(crate) fn refined(n: usize, refine: u32) -> Result<usize> {
    1usize
        .checked_shl(refine)
        .and_then(|f| n.checked_mul(f))
        .ok_or_else(|| Error::config(format!("refine level {refine} overflows the cell count")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    #[default]
    Bump,
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    pub kind: InitKind,
    /// Perturbation amplitude for `perturbed`.
    pub amplitude: f64,
    /// Number of independent runs; run `i` uses seed `seed + i`.
    pub count: usize,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            kind: InitKind::Bump,
            amplitude: 0.3,
            count: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// `exp(−((s−s0)² + (t−t0)²)/width²)`.
    #[default]
    ShiftedBump,
    /// Three shifted bumps with seeded centers, widths and heights.
    RandomBumps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymmetrizeConfig {
    pub shape: Shape,
    pub s0: f64,
    pub t0: f64,
    pub width: f64,
}

impl Default for SymmetrizeConfig {
    fn default() -> Self {
        SymmetrizeConfig {
            shape: Shape::ShiftedBump,
            s0: 1.5,
            t0: 1.0,
            width: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub width: f64,
    pub n_omega: usize,
    pub n_z: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            width: 1.0,
            n_omega: 256,
            n_z: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropertiesConfig {
    /// Random trials per rearrangement property.
    pub trials: usize,
    /// Random smooth trials for the symmetrized-quotient comparison.
    pub quotient_trials: usize,
    /// Cells per direction of the equal-measure grid.
    pub n: usize,
    pub r_max: f64,
}

impl Default for PropertiesConfig {
    fn default() -> Self {
        PropertiesConfig {
            trials: 1000,
            quotient_trials: 100,
            n: 64,
            r_max: 4.0,
        }
    }
}

/// One experiment, as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Experiment,
    pub params: ParamsConfig,
    /// The `s = |y|` grid.
    pub grid: Option<GridConfig>,
    /// The `t = |z|` grid; falls back to `grid`.
    pub t_grid: Option<GridConfig>,
    pub eps: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub seed: u64,
    pub format: Format,
    pub out: PathBuf,
    /// Doubles every cell count this many times.
    pub refine: u32,
    pub descent: DescentOptions,
    pub init: InitConfig,
    pub symmetrize: SymmetrizeConfig,
    pub split: SplitConfig,
    pub properties: PropertiesConfig,
    /// Endpoint family taper lengths `(a, b)` in units of `1/ε`.
    pub taper: (f64, f64),
    /// Endpoint family cells `(n_s, n_t)`.
    pub endpoint_cells: (usize, usize),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Experiment::Constant,
            params: ParamsConfig::default(),
            grid: None,
            t_grid: None,
            eps: None,
            lambda: None,
            seed: 0,
            format: Format::Csv,
            out: PathBuf::from("."),
            refine: 0,
            descent: DescentOptions::default(),
            init: InitConfig::default(),
            symmetrize: SymmetrizeConfig::default(),
            split: SplitConfig::default(),
            properties: PropertiesConfig::default(),
            taper: (1.0, 1.0),
            endpoint_cells: (4096, 128),
        }
    }
}

impl ExperimentConfig {
    pub fn new(mode: Experiment) -> Self {
        ExperimentConfig {
            mode,
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
