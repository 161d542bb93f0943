//! State representations for every level of the hierarchy and the exact
//! conversions among them.
//!
//! * [`CoefficientState`]: `rho = (I + sum s_ab sigma_ab) / 2^n`, real `s_ab`.
//! * [`GnstState`]: outcome probabilities per fiducial setting, either
//!   compact (`lambda` and one sign per setting) or an explicit table.
//! * [`MomentTable`]: moments `m(C)` of measurement collections.

mod clifford;
mod coeff;
mod fiducial;
mod gnst;
mod json;
mod moments;

pub use clifford::{apply_clifford, random_circuit, CliffordCircuit, Gate};
pub use coeff::{expectation, tensor, CoefficientState};
pub use fiducial::{count_settings, FiducialSetting, OutcomeVector};
pub use gnst::{marginalize, pr_box, GnstState, GnstTable, SignalingViolation, MAX_TABLE_SYSTEMS};
pub use json::{LoadedState, SettingRow, StateDocument, Term};
pub use moments::{
    moments_from_distribution, moments_from_distributions, moments_from_probabilities, probabilities_from_moments,
    recover_probabilities, Collection, Distribution, MomentTable, MAX_COLLECTION,
};

pub(crate) use fiducial::parity_sign;
