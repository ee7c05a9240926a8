//! Shipped molecule datasets, experiment orchestration and reporting.

mod dataset;
mod experiment;
mod report;

pub use dataset::{
    inactive_offset, MoleculeDataset, NucleusData, ReferenceAmplitude, TabulatedTerm,
    AMPLITUDE_TOLERANCE, COEFFICIENT_TOLERANCE, MOLECULES, PREFACTOR_TOLERANCE,
};
pub use experiment::{
    run_experiment, run_records, sample_std, shot_noise_study, summarize, Experiment,
    ExperimentConfig, ExperimentRecord, ExperimentSummary, NucleusSummary, Purification,
    Rejection, ShotNoiseRow, ShotNoiseStudy,
};
pub use report::{load_experiments, report, Report};
