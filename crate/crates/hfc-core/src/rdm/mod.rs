//! Spin one-electron reduced density matrices: exact evaluation, measurement
//! planning and estimation from sampled distributions.

mod estimator;
mod spin_rdm;

pub use estimator::{
    estimate_rdm, exact_outcomes, execute_plan, histogram_outcomes, plan_measurements,
    EstimateConfig, Half, MeasurementPlan, Pipeline, PlanEntry, SettingLabel,
};
pub use spin_rdm::{exact_rdm, occupation_numbers, sorted_eigenvalues, Occupations, SpinRdm};
pub(crate) use spin_rdm::{matrix_from_rows, matrix_to_rows, symmetrize};
