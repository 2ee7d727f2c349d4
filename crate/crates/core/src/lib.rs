//! Simulation and exact analysis of probabilistic programmable quantum
//! processors that apply an unknown U(1) rotation to a data qubit.
//!
//! A fixed gate array receives a data qubit together with a program
//! register whose phases encode a rotation angle; measuring the program
//! register heralds which rotation was actually applied. This crate
//! reproduces the success statistics of the standard schemes exactly:
//!
//! - the single controlled-NOT processor (success 1/2);
//! - phase-ramp programs run iteratively with doubled angles or in one
//!   pass through a shift-register array (success `1 - 1/2^n`);
//! - `n` independent copies of the basic program, consumed iteratively,
//!   in one pass through a Hamming-weight-matched array, or preprocessed
//!   by a basis permutation and measurement cascade into a ramp program
//!   (all with success `1 - C(n, (n-1)/2)/2^n` for odd `n`).
//!
//! Branch magnitudes of all these schemes are dyadic, so probabilities
//! are carried as exact rationals; floating point enters only through
//! state fidelities and the large-`n` asymptote.
//!
//! Modules:
//!
//! - [`statevec`]: dense state vectors, tensor products, measurement;
//! - [`programs`]: the program-state constructors;
//! - [`processor`]: the gate-array framework and the concrete arrays;
//! - [`protocols`]: exact and seeded Monte-Carlo protocol runners;
//! - [`preprocess`]: the permutation and measurement-cascade pipeline;
//! - [`analysis`]: closed forms and independent brute-force oracles.

pub mod analysis;
pub mod error;
pub mod preprocess;
pub mod processor;
pub mod programs;
pub mod protocols;
pub mod statevec;

pub use analysis::ExactRational;
pub use error::{Error, Result};
pub use statevec::{BasisIndex, MeasurementBranch, StateVector};
