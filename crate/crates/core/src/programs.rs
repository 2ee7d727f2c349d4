//! Constructors for the program states consumed by the processors.
//!
//! Every program state encodes the unknown rotation angle `theta` in
//! computational-basis phases. The three families are the single-qubit
//! program `(|0> + e^{-i theta}|1>)/sqrt(2)`, the `N`-qubit phase ramp used
//! by the vmc/hzb schemes, and `N` independent copies of the single-qubit
//! program whose phases follow the Hamming weight of the basis index.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevec::{StateVector, MAX_QUBITS};

/// The single-qubit program state `(|0> + e^{-i theta}|1>)/sqrt(2)`.
pub fn basic_program(theta: f64) -> StateVector {
    let w = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::from_raw(1, vec![Complex64::new(w, 0.0), Complex64::cis(-theta) * w])
}

/// The `n`-qubit phase-ramp program `2^{-n/2} sum_j e^{-i j theta} |j>`.
///
/// Equal, factor by factor, to `basic_program(2^{n-1} theta) (x) ... (x)
/// basic_program(theta)`; built here by direct formula so no rounding from
/// repeated Kronecker products accumulates.
pub fn vmc_program(theta: f64, n: u32) -> Result<StateVector> {
    let n = validate_register(n)?;
    let dim = 1usize << n;
    let w = (dim as f64).sqrt().recip();
    let amps = (0..dim)
        .map(|j| Complex64::cis(-(j as f64) * theta) * w)
        .collect();
    Ok(StateVector::from_raw(n, amps))
}

/// `n` copies of the single-qubit program as one register:
/// `2^{-n/2} sum_j e^{-i |j| theta} |j>` with `|j|` the Hamming weight.
pub fn copies_program(theta: f64, n: u32) -> Result<StateVector> {
    let n = validate_register(n)?;
    let dim = 1usize << n;
    let w = (dim as f64).sqrt().recip();
    let amps = (0..dim)
        .map(|j: usize| Complex64::cis(-(j.count_ones() as f64) * theta) * w)
        .collect();
    Ok(StateVector::from_raw(n, amps))
}

fn validate_register(n: u32) -> Result<usize> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "program qubits",
            got: 0,
            min: 1,
            max: MAX_QUBITS as u64,
        });
    }
    if n as usize > MAX_QUBITS {
        return Err(Error::TooManyQubits(n as usize));
    }
    Ok(n as usize)
}
