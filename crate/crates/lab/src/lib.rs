//! Experiment driver for `relacc-core`: parallel Monte-Carlo campaigns,
//! convergence studies, CSV and mesh file formats, SVG comparison plots and
//! the `relacc` command line.

pub mod cli;
pub mod experiment;
pub mod formats;
pub mod svg;

pub use experiment::{
    convergence_study, run_campaign, CampaignConfig, CampaignResult, ConvergenceStudy,
    ErrorSource, ExperimentError, FemSolver, FrequencyRow, FrequencyTable, TrialPair,
    UniformModel,
};
