//! Validators for every level of the hierarchy.
//!
//! All checks return a [`ValidationReport`] whose margin is the constraint
//! slack; negative margins are violations. Moment matrices default to the
//! unscaled form (diagonal 1), which has the same PSD status as the `2^-m`
//! scaled one.

mod classify;
mod gnst;
mod psd;
mod report;
mod uncertainty;

pub use classify::{
    check_commuting_moments, check_density_psd, check_local_moments, classify_state, local_measurement_sets,
    maximal_commuting_sets, Classification, HierarchyLevel,
};
pub use gnst::validate_gnst;
pub use psd::{
    check_psd, moment_matrix, moment_matrix_from_state, sylvester_conditions, two_measurement_eigenvalues,
    two_measurement_matrix, MomentMatrix, SVector, MAX_MOMENT_SIZE,
};
pub use report::ValidationReport;
pub use uncertainty::{
    check_p_uncertainty, UncertaintyMode, UncertaintySubject, DEFAULT_CLIFFORD_SAMPLES, MAX_CLIQUE_SUPPORT,
};
