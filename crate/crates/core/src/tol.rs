//! Numerical tolerances shared by every validator.

/// Identities that hold exactly in real arithmetic (round trips, closed forms).
pub const EXACT: f64 = 1e-12;

/// Minimum eigenvalue allowed for a matrix to count as positive semidefinite.
pub const PSD: f64 = 1e-9;

/// Slack allowed on normalization, positivity and marginal comparisons of
/// user-supplied probability tables.
pub const PROBABILITY: f64 = 1e-9;

/// Slack on the p-norm uncertainty sum.
pub const UNCERTAINTY: f64 = 1e-12;
