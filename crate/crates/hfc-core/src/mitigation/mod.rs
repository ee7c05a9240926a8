//! Error management: ansatz-based confusion-matrix mitigation, particle-number
//! post-selection, RDM purification and unphysical-RDM filtering.

mod confusion;
mod correct;

pub use confusion::{
    build_confusion_matrix, build_confusion_matrix_with, CalibrationMeta, CalibrationShots,
    ConfusionMatrix, EXACT_PRUNE, MAX_CONDITION,
};
pub use correct::{
    diagonal_sum, filter_occupations, filter_rdm, mitigate, mitigate_least_squares, post_select,
    post_select_quasi, purify_block, purify_rdm, Bound, Purified, QuasiProbability, Verdict,
    Violation, DEFAULT_EPSILON,
};
