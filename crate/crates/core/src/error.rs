//! Crate-wide error type.

use thiserror::Error;

use crate::statevec::MAX_QUBITS;

/// Errors surfaced by state construction, processors, protocols and the
/// preprocessing cascade.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register of {0} qubits exceeds the supported maximum of {MAX_QUBITS}")]
    TooManyQubits(usize),

    #[error("amplitude vector length {0} is not a power of two")]
    BadAmplitudeCount(usize),

    #[error("state has squared norm {0}, too far from 1")]
    NotNormalized(f64),

    #[error("qubit {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("duplicate qubit {0} in measurement positions")]
    DuplicateQubit(usize),

    #[error("state dimensions differ: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis index {index} out of range for a {num_qubits}-qubit register")]
    BasisIndexOutOfRange { index: usize, num_qubits: usize },

    #[error("data register must be a single qubit, got {0} qubits")]
    DataNotSingleQubit(usize),

    #[error("processor acts on a {expected}-dimensional program space, got dimension {got}")]
    ProgramDimensionMismatch { expected: usize, got: usize },

    #[error("operator maps have mismatched lengths: {0} vs {1}")]
    MapLengthMismatch(usize, usize),

    #[error("{what} = {got} outside the supported range {min}..={max}")]
    OutOfRange {
        what: &'static str,
        got: u64,
        min: u64,
        max: u64,
    },

    #[error("index map is not a permutation")]
    NotAPermutation,

    #[error("allocation invariant violated: {0}")]
    AllocationInvariant(String),

    #[error("heralded outcome distribution deviates from uniform (saw {0})")]
    NonUniformOutcome(f64),

    #[error("cascade residual diverged from the planned program state: {0}")]
    CascadeMismatch(String),
}

impl Error {
    /// True for errors that signal a broken internal invariant rather than
    /// bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::AllocationInvariant(_) | Error::CascadeMismatch(_) | Error::NonUniformOutcome(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
