//! Sequential unambiguous discrimination of quantum states.
//!
//! A two-stage POVM scheme measures blocks of `k` copies until it produces
//! an answer that is guaranteed correct. The crate builds the measurement,
//! samples it with a seeded Monte Carlo engine, and evaluates the closed-form
//! bounds on the expected number of copies.

pub mod bounds;
pub mod certificate;
pub mod cli;
pub mod ensembles;
pub mod linalg;
pub mod simulator;
pub mod strategy;
