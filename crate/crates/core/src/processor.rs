//! Fixed gate arrays that rotate a data qubit by an amount selected by a
//! program register.
//!
//! A processor is the unitary `G = sum_{j,k} A_{jk} (x) |j><k|` on
//! data (x) program, where every data-space operator `A_{jk}` in scope is
//! `0`, `|0><0|` or `|1><1|`. That makes two permutations a complete
//! description: `zero_map[j]` is the column holding `|0><0|` in row `j`,
//! and `one_map[j]` the column holding `|1><1|`. Unitarity is exactly the
//! requirement that both maps are bijections.
//!
//! Measuring the program register after `G` applies the program operator
//! `A_j = <zero_map[j]|program> |0><0| + <one_map[j]|program> |1><1|`
//! to the data qubit, heralded by the outcome `j`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevec::{BasisIndex, StateVector, MAX_QUBITS, NORM_TOL, PROB_FLOOR};

/// A diagonal-projector processor on one data qubit and `n` program
/// qubits, stored as the two column maps described in the module docs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessorSpec {
    zero_map: Vec<usize>,
    one_map: Vec<usize>,
}

/// The data-space operator `coeff0 |0><0| + coeff1 |1><1|` applied when
/// the program measurement returns `outcome`.
#[derive(Clone, Debug)]
pub struct ProgramOperator {
    pub coeff0: Complex64,
    pub coeff1: Complex64,
    pub outcome: BasisIndex,
}

/// One heralded outcome of a processor run.
#[derive(Clone, Debug)]
pub struct ProcessorBranch {
    pub operator: ProgramOperator,
    pub probability: f64,
    pub residual: StateVector,
}

impl ProcessorSpec {
    /// Builds a spec from explicit column maps. Lengths must agree and be
    /// a power of two; bijectivity is *not* required here so that
    /// [`verify_unitarity`] can report on malformed specs.
    pub fn from_maps(zero_map: Vec<usize>, one_map: Vec<usize>) -> Result<Self> {
        if zero_map.len() != one_map.len() {
            return Err(Error::MapLengthMismatch(zero_map.len(), one_map.len()));
        }
        let dim = zero_map.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::BadAmplitudeCount(dim));
        }
        if dim.trailing_zeros() as usize > MAX_QUBITS {
            return Err(Error::TooManyQubits(dim.trailing_zeros() as usize));
        }
        Ok(ProcessorSpec { zero_map, one_map })
    }

    pub fn num_program_qubits(&self) -> usize {
        self.zero_map.len().trailing_zeros() as usize
    }

    pub fn program_dim(&self) -> usize {
        self.zero_map.len()
    }

    pub fn zero_map(&self) -> &[usize] {
        &self.zero_map
    }

    pub fn one_map(&self) -> &[usize] {
        &self.one_map
    }

    /// Applies the full unitary `G` to a joint state with the data qubit
    /// in the most significant position, `data (x) program`.
    pub fn apply_to_joint(&self, joint: &StateVector) -> Result<StateVector> {
        let dim = self.program_dim();
        if joint.dim() != 2 * dim {
            return Err(Error::ProgramDimensionMismatch {
                expected: 2 * dim,
                got: joint.dim(),
            });
        }
        let zero_inv = invert(&self.zero_map).ok_or(Error::NotAPermutation)?;
        let one_inv = invert(&self.one_map).ok_or(Error::NotAPermutation)?;
        // G sends |d>(x)|k> to |d>(x)|map_d^{-1}(k)>.
        let mut amps = vec![Complex64::ZERO; joint.dim()];
        for k in 0..dim {
            amps[zero_inv[k]] = joint.amplitude(k);
            amps[dim + one_inv[k]] = joint.amplitude(dim + k);
        }
        Ok(StateVector::from_raw(joint.num_qubits(), amps))
    }
}

fn invert(map: &[usize]) -> Option<Vec<usize>> {
    let mut inverse = vec![usize::MAX; map.len()];
    for (j, &k) in map.iter().enumerate() {
        if k >= map.len() || inverse[k] != usize::MAX {
            return None;
        }
        inverse[k] = j;
    }
    Some(inverse)
}

/// The single-program-qubit processor: a controlled-NOT with the data
/// qubit as control and the program qubit as target. Outcome 0 rotates the
/// data by `+theta`, outcome 1 by `-theta`, each with probability 1/2.
pub fn cnot_processor() -> ProcessorSpec {
    ProcessorSpec {
        zero_map: vec![0, 1],
        one_map: vec![1, 0],
    }
}

/// The shift-register processor for phase-ramp programs:
/// `zero_map` is the identity and `one_map[j] = j + 1 mod 2^n`. With the
/// `n`-qubit ramp program every outcome below `2^n - 1` heralds the
/// rotation `+theta` and the last outcome heralds `-(2^n - 1) theta`.
pub fn hzb_u1_processor(n: u32) -> Result<ProcessorSpec> {
    let dim = validate_program_qubits(n)?;
    Ok(ProcessorSpec {
        zero_map: (0..dim).collect(),
        one_map: (0..dim).map(|j| (j + 1) % dim).collect(),
    })
}

/// The one-pass processor for `n` program copies: `zero_map` is the
/// identity and `one_map` is a permutation stepping the Hamming weight up
/// by one on as many rows as a maximum matching allows.
///
/// Rows are matched level by level in increasing weight, each level in
/// increasing numeric order against the smallest unused indices of the
/// next level; the leftover rows and columns are then paired off in
/// increasing order. For odd `n` the number of rows that cannot step up is
/// `C(n, (n-1)/2)`; even `n` performs exactly as `n - 1`.
pub fn single_shot_processor(n: u32) -> Result<ProcessorSpec> {
    let dim = validate_program_qubits(n)?;
    let mut by_weight: Vec<Vec<usize>> = vec![Vec::new(); n as usize + 1];
    for j in 0..dim {
        by_weight[j.count_ones() as usize].push(j);
    }
    let mut one_map = vec![usize::MAX; dim];
    let mut used = vec![false; dim];
    for w in 0..n as usize {
        for (&row, &target) in by_weight[w].iter().zip(by_weight[w + 1].iter()) {
            one_map[row] = target;
            used[target] = true;
        }
    }
    let leftover_rows: Vec<usize> = (0..dim).filter(|&j| one_map[j] == usize::MAX).collect();
    let mut leftover_cols = (0..dim).filter(|&k| !used[k]);
    for row in leftover_rows {
        one_map[row] = leftover_cols.next().expect("row/column counts match");
    }
    Ok(ProcessorSpec {
        zero_map: (0..dim).collect(),
        one_map,
    })
}

fn validate_program_qubits(n: u32) -> Result<usize> {
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
    Ok(1usize << n)
}

/// Number of rows whose `one_map` image does not step the Hamming weight
/// up by one; these are the heralded failure outcomes of the single-shot
/// construction.
pub fn hamming_deficit(spec: &ProcessorSpec) -> usize {
    spec.one_map
        .iter()
        .enumerate()
        .filter(|&(j, &k)| k.count_ones() != j.count_ones() + 1)
        .count()
}

/// Runs a processor on `data (x) program` and enumerates the heralded
/// outcomes. For outcome `j` the branch carries the program operator with
/// `coeff0 = <zero_map[j]|program>` and `coeff1 = <one_map[j]|program>`,
/// the Born probability `|alpha coeff0|^2 + |beta coeff1|^2`, and the
/// renormalized residual data state.
pub fn run_processor(
    spec: &ProcessorSpec,
    data: &StateVector,
    program: &StateVector,
) -> Result<Vec<ProcessorBranch>> {
    if data.num_qubits() != 1 {
        return Err(Error::DataNotSingleQubit(data.num_qubits()));
    }
    if program.dim() != spec.program_dim() {
        return Err(Error::ProgramDimensionMismatch {
            expected: spec.program_dim(),
            got: program.dim(),
        });
    }
    let alpha = data.amplitude(0);
    let beta = data.amplitude(1);
    let mut branches = Vec::with_capacity(spec.program_dim());
    for outcome in 0..spec.program_dim() {
        let coeff0 = program.amplitude(spec.zero_map[outcome]);
        let coeff1 = program.amplitude(spec.one_map[outcome]);
        let unnormalized = [coeff0 * alpha, coeff1 * beta];
        let probability = unnormalized[0].norm_sqr() + unnormalized[1].norm_sqr();
        if probability < PROB_FLOOR {
            continue;
        }
        let scale = probability.sqrt().recip();
        let residual = StateVector::from_raw(
            1,
            vec![unnormalized[0] * scale, unnormalized[1] * scale],
        );
        branches.push(ProcessorBranch {
            operator: ProgramOperator {
                coeff0,
                coeff1,
                outcome,
            },
            probability,
            residual,
        });
    }
    Ok(branches)
}

/// Checks that the spec describes a unitary `G`: both column maps must be
/// bijections, and for up to four program qubits the full matrix `G` is
/// assembled and `G^dag G = G G^dag = I` is verified numerically within
/// [`NORM_TOL`].
pub fn verify_unitarity(spec: &ProcessorSpec) -> bool {
    if invert(&spec.zero_map).is_none() || invert(&spec.one_map).is_none() {
        return false;
    }
    if spec.num_program_qubits() <= 4 {
        let dim = 2 * spec.program_dim();
        let mut g = vec![vec![Complex64::ZERO; dim]; dim];
        for j in 0..spec.program_dim() {
            // <0, j| G |0, zero_map[j]> = 1 and <1, j| G |1, one_map[j]> = 1
            g[j][spec.zero_map[j]] = Complex64::ONE;
            g[spec.program_dim() + j][spec.program_dim() + spec.one_map[j]] = Complex64::ONE;
        }
        if !is_identity_product(&g, true) || !is_identity_product(&g, false) {
            return false;
        }
    }
    true
}

/// Checks `G^dag G = I` (or `G G^dag = I` when `adjoint_left` is false).
fn is_identity_product(g: &[Vec<Complex64>], adjoint_left: bool) -> bool {
    let dim = g.len();
    for row in 0..dim {
        for col in 0..dim {
            let mut entry = Complex64::ZERO;
            if adjoint_left {
                for g_row in g {
                    entry += g_row[row].conj() * g_row[col];
                }
            } else {
                for (a, b) in g[row].iter().zip(&g[col]) {
                    entry += a * b.conj();
                }
            }
            let expected = if row == col {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            if (entry - expected).norm() > NORM_TOL {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    use crate::programs::{basic_program, copies_program, vmc_program};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_state() -> StateVector {
        StateVector::qubit(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)).unwrap()
    }

    fn random_qubit(rng: &mut ChaCha8Rng) -> StateVector {
        let mut draw = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        let alpha = c(draw(), draw());
        let beta = c(draw(), draw());
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        StateVector::from_raw(1, vec![alpha / norm, beta / norm])
    }

    #[test]
    fn cnot_on_sigma_z_eigenstate() {
        let data = StateVector::basis(1, 0).unwrap();
        let branches = run_processor(&cnot_processor(), &data, &basic_program(0.7)).unwrap();
        assert_eq!(branches.len(), 2);
        for branch in &branches {
            assert!((branch.probability - 0.5).abs() < NORM_TOL);
            let fidelity = branch.residual.fidelity_up_to_global_phase(&data).unwrap();
            assert!((fidelity - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn cnot_rotates_forward_and_backward() {
        let theta = 0.7;
        let data = plus_state();
        let branches = run_processor(&cnot_processor(), &data, &basic_program(theta)).unwrap();
        let forward = data.apply_u1(0, theta).unwrap();
        let backward = data.apply_u1(0, -theta).unwrap();
        assert!(
            (branches[0].residual.fidelity_up_to_global_phase(&forward).unwrap() - 1.0).abs()
                < NORM_TOL
        );
        assert!(
            (branches[1].residual.fidelity_up_to_global_phase(&backward).unwrap() - 1.0).abs()
                < NORM_TOL
        );
    }

    #[test]
    fn hzb_reduces_to_cnot_for_one_qubit() {
        assert_eq!(hzb_u1_processor(1).unwrap(), cnot_processor());
    }

    #[test]
    fn hzb_three_qubit_outcomes() {
        let theta = 0.7;
        let data = plus_state();
        let program = vmc_program(theta, 3).unwrap();
        let spec = hzb_u1_processor(3).unwrap();
        let branches = run_processor(&spec, &data, &program).unwrap();
        assert_eq!(branches.len(), 8);
        let forward = data.apply_u1(0, theta).unwrap();
        let wrong = data.apply_u1(0, -7.0 * theta).unwrap();
        let mut successes = 0;
        for branch in &branches {
            assert!((branch.probability - 0.125).abs() < NORM_TOL);
            let target = if branch.operator.outcome < 7 { &forward } else { &wrong };
            let fidelity = branch.residual.fidelity_up_to_global_phase(target).unwrap();
            assert!((fidelity - 1.0).abs() < NORM_TOL);
            if branch.operator.outcome < 7 {
                successes += 1;
            }
        }
        assert_eq!(successes, 7);
    }

    #[test]
    fn single_shot_base_case_is_swap() {
        let spec = single_shot_processor(1).unwrap();
        assert_eq!(spec.one_map(), &[1, 0]);
        assert_eq!(spec, cnot_processor());
        assert_eq!(hamming_deficit(&spec), 1);
    }

    #[test]
    fn single_shot_deficit_matches_central_binomial() {
        assert_eq!(hamming_deficit(&single_shot_processor(3).unwrap()), 3);
        assert_eq!(hamming_deficit(&single_shot_processor(7).unwrap()), 35);
        for n in (1..=11).step_by(2) {
            let spec = single_shot_processor(n).unwrap();
            let expected = crate::analysis::binomial(n as u64, (n as u64 - 1) / 2);
            assert_eq!(
                num_bigint::BigUint::from(hamming_deficit(&spec) as u64),
                expected
            );
        }
        // Even n: deficit C(n, n/2), same success probability as n - 1.
        for n in [2u32, 4, 6, 8, 10] {
            let spec = single_shot_processor(n).unwrap();
            let expected = crate::analysis::binomial(n as u64, n as u64 / 2);
            assert_eq!(
                num_bigint::BigUint::from(hamming_deficit(&spec) as u64),
                expected
            );
        }
    }

    #[test]
    fn single_shot_three_copies_has_five_good_outcomes() {
        let theta = 0.7;
        let data = plus_state();
        let spec = single_shot_processor(3).unwrap();
        let branches = run_processor(&spec, &data, &copies_program(theta, 3).unwrap()).unwrap();
        let forward = data.apply_u1(0, theta).unwrap();
        let mut good = 0;
        for branch in &branches {
            // Residual must match U(m theta) with m the weight step of the maps.
            let m = (spec.one_map()[branch.operator.outcome].count_ones() as i64)
                - (branch.operator.outcome.count_ones() as i64);
            let target = data.apply_u1(0, m as f64 * theta).unwrap();
            let fidelity = branch.residual.fidelity_up_to_global_phase(&target).unwrap();
            assert!((fidelity - 1.0).abs() < NORM_TOL);
            if (branch
                .residual
                .fidelity_up_to_global_phase(&forward)
                .unwrap()
                - 1.0)
                .abs()
                < NORM_TOL
            {
                good += 1;
            }
        }
        assert_eq!(good, 5);
    }

    #[test]
    fn unitarity_of_constructed_specs() {
        assert!(verify_unitarity(&cnot_processor()));
        for n in 1..=4 {
            assert!(verify_unitarity(&hzb_u1_processor(n).unwrap()));
            assert!(verify_unitarity(&single_shot_processor(n).unwrap()));
        }
        for n in 5..=11 {
            assert!(verify_unitarity(&single_shot_processor(n).unwrap()));
        }
    }

    #[test]
    fn non_bijective_map_fails_unitarity() {
        let broken = ProcessorSpec::from_maps(vec![0, 1], vec![0, 0]).unwrap();
        assert!(!verify_unitarity(&broken));
    }

    #[test]
    fn formula_route_matches_full_unitary_route() {
        let theta = 2.31;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4u32 {
            let data = random_qubit(&mut rng);
            let program = vmc_program(theta, n).unwrap();
            let spec = hzb_u1_processor(n).unwrap();
            let formula = run_processor(&spec, &data, &program).unwrap();

            let joint = data.tensor(&program).unwrap();
            let output = spec.apply_to_joint(&joint).unwrap();
            let positions: Vec<usize> = (0..n as usize).collect();
            let measured = output.measure_subregister(&positions).unwrap();

            assert_eq!(formula.len(), measured.len());
            for (a, b) in formula.iter().zip(&measured) {
                assert_eq!(a.operator.outcome, b.outcome);
                assert!((a.probability - b.probability).abs() < NORM_TOL);
                let fidelity = a.residual.fidelity_up_to_global_phase(&b.residual).unwrap();
                assert!((fidelity - 1.0).abs() < NORM_TOL);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let data = plus_state();
        let spec = hzb_u1_processor(2).unwrap();
        assert!(matches!(
            run_processor(&spec, &data, &basic_program(0.7)),
            Err(Error::ProgramDimensionMismatch { .. })
        ));
        let two_qubit = StateVector::basis(2, 0).unwrap();
        assert!(matches!(
            run_processor(&spec, &two_qubit, &vmc_program(0.7, 2).unwrap()),
            Err(Error::DataNotSingleQubit(2))
        ));
    }

    proptest! {
        #[test]
        fn outcome_statistics_are_data_independent(
            seed in 0u64..1_000,
            n in 1u32..=4,
            theta in -7.0f64..7.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = random_qubit(&mut rng);
            let uniform = (1u64 << n) as f64;
            for (spec, program) in [
                (hzb_u1_processor(n).unwrap(), vmc_program(theta, n).unwrap()),
                (single_shot_processor(n).unwrap(), copies_program(theta, n).unwrap()),
            ] {
                let branches = run_processor(&spec, &data, &program).unwrap();
                prop_assert_eq!(branches.len(), 1usize << n);
                for branch in &branches {
                    prop_assert!((branch.probability - 1.0 / uniform).abs() < NORM_TOL);
                    let magnitude = uniform.sqrt().recip();
                    prop_assert!((branch.operator.coeff0.norm() - magnitude).abs() < NORM_TOL);
                    prop_assert!((branch.operator.coeff1.norm() - magnitude).abs() < NORM_TOL);
                }
            }
        }

        #[test]
        fn residuals_classify_as_integer_rotations(
            seed in 0u64..1_000,
            n in 1u32..=4,
            theta in 0.3f64..2.8,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = random_qubit(&mut rng);
            let spec = hzb_u1_processor(n).unwrap();
            let program = vmc_program(theta, n).unwrap();
            for branch in run_processor(&spec, &data, &program).unwrap() {
                let j = branch.operator.outcome;
                let m = (spec.one_map()[j] as i64) - (spec.zero_map()[j] as i64);
                let target = data.apply_u1(0, m as f64 * theta).unwrap();
                let fidelity = branch.residual.fidelity_up_to_global_phase(&target).unwrap();
                prop_assert!((fidelity - 1.0).abs() < NORM_TOL);
            }
        }
    }
}
