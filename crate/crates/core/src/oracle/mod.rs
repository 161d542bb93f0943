//! Brute-force ground truth: dense complex matrices, a Jacobi eigensolver,
//! the Hadamard factorization of moment matrices, seeded samplers and
//! exhaustive claim checks. Nothing here shares code with the fast paths it
//! verifies beyond the public data types.

mod dense;
mod eigen;
mod hadamard;
mod sample;
mod verify;

pub use dense::{
    dense_anticommute, dense_circuit, dense_expectation, dense_pauli, dense_state, single_pauli, DenseMatrix,
    MAX_DENSE_SYSTEMS,
};
pub use eigen::{hermitian_eigenvalues, symmetric_eigenvalues};
pub use hadamard::{hadamard_factorization_check, FactorizationCheck, HadamardFactorization, MAX_FACTOR_SIZE};
pub use sample::{
    random_coefficient_state, random_local_collection, random_local_table, random_moment_table, random_pbin_state,
    random_probabilities, random_quantum_state, random_stabilizer_state,
};
pub use verify::{exhaustive_verify, ClaimReport, VerifyParams, CLAIMS};
