//! Dense complex state vectors over multi-qubit registers, with tensor
//! products, diagonal phase rotations and projective measurement in the
//! computational basis.
//!
//! # Conventions
//!
//! Qubit `l` is the `l`-th bit (least significant first) of a basis index,
//! so a basis state written `|q_{n-1} ... q_1 q_0>` has index
//! `sum_l q_l * 2^l`. In a tensor product `a.tensor(&b)` the qubits of `a`
//! occupy the most significant bits: basis index `i_a * b.dim() + i_b`.
//!
//! The rotation [`StateVector::apply_u1`] is `diag(e^{i theta/2},
//! e^{-i theta/2})` on the chosen qubit. States produced by different
//! routes are compared with [`StateVector::fidelity_up_to_global_phase`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the dense representation will allocate (2^20 amplitudes).
pub const MAX_QUBITS: usize = 20;

/// Absolute tolerance for norm and fidelity checks.
pub const NORM_TOL: f64 = 1e-12;

/// Measurement branches below this probability are dropped.
pub const PROB_FLOOR: f64 = 1e-15;

/// Norm slack accepted when importing amplitude data from outside.
const CONSTRUCT_TOL: f64 = 1e-9;

/// Index into the computational basis; bit `l` is the state of qubit `l`.
pub type BasisIndex = usize;

/// A pure quantum state over `num_qubits` qubits as a dense array of
/// `2^num_qubits` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// One outcome of a projective measurement: the observed basis index on the
/// measured sub-register, its Born probability, and the renormalized state
/// of the unmeasured qubits.
#[derive(Clone, Debug)]
pub struct MeasurementBranch {
    pub outcome: BasisIndex,
    pub probability: f64,
    pub residual: StateVector,
}

impl StateVector {
    /// The computational basis state `|index>` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: BasisIndex) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(num_qubits));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::BasisIndexOutOfRange { index, num_qubits });
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Ok(StateVector { num_qubits, amps })
    }

    /// A single-qubit state `alpha|0> + beta|1>`.
    pub fn qubit(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::from_amplitudes(vec![alpha, beta])
    }

    /// Builds a state from raw amplitudes. The length must be a power of
    /// two and the squared norm must be 1 within `1e-9`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::BadAmplitudeCount(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(num_qubits));
        }
        let state = StateVector { num_qubits, amps };
        let norm2 = state.squared_norm();
        if (norm2 - 1.0).abs() > CONSTRUCT_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(state)
    }

    /// Internal constructor that skips validation; callers guarantee the
    /// length and normalization.
    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        StateVector { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Dimension of the underlying Hilbert space, `2^num_qubits`.
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: BasisIndex) -> Complex64 {
        self.amps[index]
    }

    pub fn squared_norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Kronecker product with `self` occupying the most significant bits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(num_qubits));
        }
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { num_qubits, amps })
    }

    /// Applies `diag(e^{i theta/2}, e^{-i theta/2})` to one qubit.
    pub fn apply_u1(&self, qubit: usize, theta: f64) -> Result<Self> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        let up = Complex64::cis(theta / 2.0);
        let down = Complex64::cis(-theta / 2.0);
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(j, a)| if (j >> qubit) & 1 == 0 { a * up } else { a * down })
            .collect();
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Projective measurement of the qubits listed in `positions`.
    ///
    /// Bit `i` of a branch outcome is the observed value of qubit
    /// `positions[i]`. Unmeasured qubits keep their relative order in the
    /// residual state. Branches are returned sorted by outcome; outcomes
    /// with probability below [`PROB_FLOOR`] are dropped and each residual
    /// is renormalized.
    pub fn measure_subregister(&self, positions: &[usize]) -> Result<Vec<MeasurementBranch>> {
        let mut mask = 0usize;
        for &q in positions {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
            if mask & (1 << q) != 0 {
                return Err(Error::DuplicateQubit(q));
            }
            mask |= 1 << q;
        }
        let measured = positions.len();
        let kept: Vec<usize> = (0..self.num_qubits)
            .filter(|q| mask & (1 << q) == 0)
            .collect();
        let rem_dim = 1usize << kept.len();
        let mut raw = vec![vec![Complex64::ZERO; rem_dim]; 1 << measured];
        for (j, &amp) in self.amps.iter().enumerate() {
            let mut outcome = 0usize;
            for (i, &q) in positions.iter().enumerate() {
                outcome |= ((j >> q) & 1) << i;
            }
            let mut residual = 0usize;
            for (i, &q) in kept.iter().enumerate() {
                residual |= ((j >> q) & 1) << i;
            }
            raw[outcome][residual] = amp;
        }
        let mut branches = Vec::new();
        for (outcome, mut amps) in raw.into_iter().enumerate() {
            let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if probability < PROB_FLOOR {
                continue;
            }
            let scale = probability.sqrt().recip();
            for a in &mut amps {
                *a *= scale;
            }
            branches.push(MeasurementBranch {
                outcome,
                probability,
                residual: StateVector {
                    num_qubits: kept.len(),
                    amps,
                },
            });
        }
        Ok(branches)
    }

    /// Measures the `count` most significant qubits; the outcome reads as
    /// the top `count` bits of the basis index.
    pub fn measure_top(&self, count: usize) -> Result<Vec<MeasurementBranch>> {
        if count > self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: count,
                num_qubits: self.num_qubits,
            });
        }
        let positions: Vec<usize> = (self.num_qubits - count..self.num_qubits).collect();
        self.measure_subregister(&positions)
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|`, insensitive to a global phase on either state.
    pub fn fidelity_up_to_global_phase(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Relabels basis states: amplitude of `|j>` moves to `|forward[j]>`.
    pub fn permute_basis(&self, forward: &[usize]) -> Result<Self> {
        if forward.len() != self.dim() {
            return Err(Error::NotAPermutation);
        }
        let mut amps = vec![Complex64::ZERO; self.dim()];
        let mut seen = vec![false; self.dim()];
        for (j, &dest) in forward.iter().enumerate() {
            if dest >= self.dim() || seen[dest] {
                return Err(Error::NotAPermutation);
            }
            seen[dest] = true;
            amps[dest] = self.amps[j];
        }
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps,
        })
    }
}
