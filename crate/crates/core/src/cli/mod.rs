//! Configuration-driven experiment runner behind the `hardy-sobolev` binary.
//!
//! A run is described by an [`ExperimentConfig`], usually read from TOML and then
//! patched by command-line flags. [`run`] validates the parameters for the chosen
//! experiment, computes, writes its artifacts and returns one [`Summary`] per experiment.

mod config;
mod run;
pub mod suite;

pub use config::{
    ExperimentConfig, GridConfig, InitConfig, InitKind, ParamsConfig, PropertiesConfig, Shape,
    SplitConfig, SymmetrizeConfig,
};
pub use run::{run, RunOutcome, Summary, SCHEMA_VERSION};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    #[default]
    Constant,
    EpsSweep,
    ProductSweep,
    Symmetrize,
    Minimize,
    SplitDemo,
    Properties,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Constant => "constant",
            Experiment::EpsSweep => "eps-sweep",
            Experiment::ProductSweep => "product-sweep",
            Experiment::Symmetrize => "symmetrize",
            Experiment::Minimize => "minimize",
            Experiment::SplitDemo => "split-demo",
            Experiment::Properties => "properties",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}
