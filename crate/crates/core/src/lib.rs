pub mod cli;
pub mod constraints;
pub mod error;
pub mod games;
pub mod infotasks;
pub mod oracle;
pub mod pauli;
pub mod pnorm;
pub mod rac;
pub mod states;
pub mod tol;
