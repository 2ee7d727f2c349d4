//! Conversion of `2^x - 1` copies of the single-qubit program into a
//! phase-ramp program state by a basis permutation and a measurement
//! cascade.
//!
//! The copies state carries `2^{2^x - 1}` terms whose phase exponents are
//! binomially distributed over `0..=2^x - 1`. The construction allocates
//! that multiset into runs of consecutive exponents, each of length `2^s`
//! and each straddling the two middle exponents `2^{x-1} - 1` and
//! `2^{x-1}`:
//!
//! 1. one full run `0..=2^x - 1`, the level-`x` target;
//! 2. paired runs of length `2^{x-1}` starting at `a` and
//!    `2^{x-1} - 1 - (a - 1)`, for `a = 1, 2, ...`, each pair repeated
//!    until its outer exponents are exhausted, then both windows shifted
//!    inward;
//! 3. the same scheme with run lengths `2^{x-2}`, ..., down to length-2
//!    runs over the two middle exponents.
//!
//! Groups are packed, in allocation order, into consecutive blocks of the
//! permuted basis. The leading `2^x - 1 - x` qubits address a block; the
//! following qubits address the sub-branch of a group inside its block.
//! Measuring those qubits therefore collapses the permuted state onto a
//! run, which is a phase-ramp program state of `s` qubits times the global
//! phase `e^{-i c theta}` with `c` the run start.
//!
//! Group counts per level satisfy `sum_s W_s = C(2^x - 1, 2^{x-1} - 1)`
//! and `sum_s 2^s W_s = 2^{2^x - 1}`, which is what makes the overall
//! pipeline success probability equal the multi-copy schemes.

use crate::analysis::ExactRational;
use crate::error::{Error, Result};
use crate::statevec::{StateVector, NORM_TOL};

/// Largest supported preprocessing size: `x = 4` is 15 copies and a
/// `2^15`-dimensional permutation.
pub const MAX_LEVELS: u32 = 4;

/// Multiset of phase exponents still awaiting allocation; `counts[e]` is
/// the number of unassigned terms with phase `e^{-i e theta}`.
#[derive(Clone, Debug)]
pub struct PhaseMultiset {
    counts: Vec<u64>,
}

impl PhaseMultiset {
    /// The binomial multiset of `2^x - 1` program copies.
    fn binomial(x: u32) -> Self {
        let copies = (1u64 << x) - 1;
        let counts = (0..=copies).map(|e| binomial_u64(copies, e)).collect();
        PhaseMultiset { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Removes one term of each exponent in `run`; errors if any count
    /// would go negative.
    fn take_run(&mut self, run: &PhaseRun) -> Result<()> {
        for e in run.start..run.start + run.len() {
            let count = self.counts.get_mut(e).ok_or_else(|| {
                Error::AllocationInvariant(format!("exponent {e} outside the multiset"))
            })?;
            if *count == 0 {
                return Err(Error::AllocationInvariant(format!(
                    "exponent {e} over-allocated"
                )));
            }
            *count -= 1;
        }
        Ok(())
    }
}

/// A run of `2^level` consecutive phase exponents starting at `start`;
/// collapsing onto it yields the level-`level` ramp program with global
/// phase exponent `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseRun {
    pub start: usize,
    pub level: u32,
}

#[allow(clippy::len_without_is_empty)]
impl PhaseRun {
    /// Number of consecutive exponents in the run, `2^level`; never zero.
    pub fn len(&self) -> usize {
        1 << self.level
    }

    pub fn global_phase_exponent(&self) -> usize {
        self.start
    }

    /// Whether the run contains both middle exponents `2^{x-1} - 1` and
    /// `2^{x-1}`.
    pub fn straddles_middle(&self, x: u32) -> bool {
        let upper_middle = 1usize << (x - 1);
        self.start < upper_middle && self.start + self.len() > upper_middle
    }
}

/// One allocated group: a phase run plus the measurement outcomes that
/// select it. `path[0]` is the outcome of the leading `2^x - 1 - x` qubit
/// measurement; the remaining entries are the single-qubit outcomes that
/// descend to the group's block.
#[derive(Clone, Debug)]
pub struct AllocationGroup {
    pub run: PhaseRun,
    pub path: Vec<usize>,
}

/// The complete allocation for `2^x - 1` copies.
#[derive(Clone, Debug)]
pub struct AllocationPlan {
    x: u32,
    groups: Vec<AllocationGroup>,
    group_counts: Vec<u64>,
}

impl AllocationPlan {
    pub fn x(&self) -> u32 {
        self.x
    }

    /// Number of program copies consumed, `2^x - 1`.
    pub fn num_copies(&self) -> usize {
        (1 << self.x) - 1
    }

    /// Qubits in the leading measurement register, `2^x - 1 - x`.
    pub fn outcome_register(&self) -> usize {
        self.num_copies() - self.x as usize
    }

    pub fn groups(&self) -> &[AllocationGroup] {
        &self.groups
    }

    /// `W_s`: the number of groups that produce the level-`s` program.
    pub fn group_count(&self, level: u32) -> u64 {
        self.group_counts[level as usize]
    }

    /// Exponent planned for each slot of the permuted basis.
    pub fn slot_exponents(&self) -> Vec<usize> {
        let mut exponents = Vec::with_capacity(1 << self.num_copies());
        for group in &self.groups {
            exponents.extend(group.run.start..group.run.start + group.run.len());
        }
        exponents
    }
}

/// Allocates the binomial phase multiset of `2^x - 1` copies into
/// straddling runs, in the greedy order described in the module docs.
pub fn build_allocation(x: u32) -> Result<AllocationPlan> {
    if x == 0 || x > MAX_LEVELS {
        return Err(Error::OutOfRange {
            what: "preprocessing levels",
            got: x as u64,
            min: 1,
            max: MAX_LEVELS as u64,
        });
    }
    let mut multiset = PhaseMultiset::binomial(x);
    let mut runs = Vec::new();

    // Level x: the one full run, forced because a single term has phase 0.
    let full = PhaseRun { start: 0, level: x };
    multiset.take_run(&full)?;
    runs.push(full);

    let upper_middle = 1usize << (x - 1);
    for level in (1..x).rev() {
        let len = 1usize << level;
        // Straddling starts for this run length.
        let mut low = upper_middle + 1 - len;
        let mut high = upper_middle - 1;
        while low <= high {
            if low == high {
                while multiset.counts[low] > 0 {
                    let run = PhaseRun { start: low, level };
                    multiset.take_run(&run)?;
                    runs.push(run);
                }
            } else {
                while multiset.counts[low] > 0 {
                    let lower = PhaseRun { start: low, level };
                    multiset.take_run(&lower)?;
                    runs.push(lower);
                    let higher = PhaseRun { start: high, level };
                    multiset.take_run(&higher)?;
                    runs.push(higher);
                }
                if multiset.counts[high + len - 1] != 0 {
                    return Err(Error::AllocationInvariant(format!(
                        "asymmetric leftover at exponent {}",
                        high + len - 1
                    )));
                }
            }
            low += 1;
            high -= 1;
        }
    }

    if !multiset.is_empty() {
        return Err(Error::AllocationInvariant(format!(
            "unallocated counts remain: {:?}",
            multiset.counts()
        )));
    }

    // Pack groups into blocks in allocation order. Runs come out in
    // non-increasing length, so every run lands on a 2^level-aligned slot.
    let mut group_counts = vec![0u64; x as usize + 1];
    let block_bits = x as usize;
    let mut position = 0usize;
    let groups = runs
        .into_iter()
        .map(|run| {
            let outcome = position >> block_bits;
            let sub = (position & ((1 << block_bits) - 1)) >> run.level;
            let sub_bits = x - run.level;
            let mut path = Vec::with_capacity(1 + sub_bits as usize);
            path.push(outcome);
            for bit in (0..sub_bits).rev() {
                path.push((sub >> bit) & 1);
            }
            position += run.len();
            group_counts[run.level as usize] += 1;
            AllocationGroup { run, path }
        })
        .collect();

    Ok(AllocationPlan {
        x,
        groups,
        group_counts,
    })
}

/// A relabeling of the `2^{2^x - 1}`-dimensional basis; `forward[j]` is
/// where the amplitude of `|j>` moves.
#[derive(Clone, Debug)]
pub struct BasisPermutation {
    forward: Vec<usize>,
}

impl BasisPermutation {
    pub fn size(&self) -> usize {
        self.forward.len()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inverse = vec![0; self.forward.len()];
        for (j, &dest) in self.forward.iter().enumerate() {
            inverse[dest] = j;
        }
        inverse
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        state.permute_basis(&self.forward)
    }
}

/// Synthesizes the basis permutation realizing a plan: each source index
/// moves to a slot whose planned exponent equals the source's Hamming
/// weight, taking sources and slots in increasing order within every
/// exponent class.
pub fn synthesize_permutation(plan: &AllocationPlan) -> Result<BasisPermutation> {
    let copies = plan.num_copies();
    let dim = 1usize << copies;
    let slot_exponents = plan.slot_exponents();
    if slot_exponents.len() != dim {
        return Err(Error::AllocationInvariant(format!(
            "plan covers {} slots, expected {dim}",
            slot_exponents.len()
        )));
    }
    let mut slots_by_exponent: Vec<Vec<usize>> = vec![Vec::new(); copies + 1];
    for (slot, &e) in slot_exponents.iter().enumerate() {
        slots_by_exponent[e].push(slot);
    }
    let mut cursor = vec![0usize; copies + 1];
    let mut forward = vec![0usize; dim];
    for (source, slot) in forward.iter_mut().enumerate() {
        let weight = source.count_ones() as usize;
        let class = &slots_by_exponent[weight];
        let at = cursor[weight];
        if at >= class.len() {
            return Err(Error::AllocationInvariant(format!(
                "exponent class {weight} exhausted before sources"
            )));
        }
        *slot = class[at];
        cursor[weight] = at + 1;
    }
    for (e, &used) in cursor.iter().enumerate() {
        if used != slots_by_exponent[e].len() {
            return Err(Error::AllocationInvariant(format!(
                "exponent class {e} has {} unused slots",
                slots_by_exponent[e].len() - used
            )));
        }
    }
    Ok(BasisPermutation { forward })
}

/// One outcome of the measurement cascade: the level and global phase of
/// the produced program state, the state itself, its exact probability,
/// and the outcome path that heralded it.
#[derive(Clone, Debug)]
pub struct CascadeBranch {
    pub level: u32,
    pub global_phase_exponent: usize,
    pub probability: ExactRational,
    pub program_state: StateVector,
    pub path: Vec<usize>,
}

/// Runs the measurement cascade on the permuted copies state and returns
/// the full branch distribution, one branch per plan group.
///
/// The leading `2^x - 1 - x` qubits are measured first; each group then
/// descends through its planned single-qubit outcomes. Every residual is
/// checked to be a phase ramp of the planned length, start and global
/// phase; a mismatch means the plan and permutation disagree with the
/// state and is reported as an error.
pub fn measurement_cascade(
    permuted: &StateVector,
    plan: &AllocationPlan,
) -> Result<Vec<CascadeBranch>> {
    let copies = plan.num_copies();
    if permuted.num_qubits() != copies {
        return Err(Error::DimensionMismatch {
            left: permuted.num_qubits(),
            right: copies,
        });
    }
    let top = permuted.measure_top(plan.outcome_register())?;
    let mut by_outcome = vec![None; 1 << plan.outcome_register()];
    for branch in top {
        let outcome = branch.outcome;
        by_outcome[outcome] = Some(branch);
    }

    let mut branches = Vec::with_capacity(plan.groups().len());
    for group in plan.groups() {
        let head = by_outcome[group.path[0]].as_ref().ok_or_else(|| {
            Error::CascadeMismatch(format!("no probability mass at outcome {}", group.path[0]))
        })?;
        let mut state = head.residual.clone();
        let mut probability = head.probability;
        for &bit in &group.path[1..] {
            let sub = state.measure_top(1)?;
            let chosen = sub
                .into_iter()
                .find(|b| b.outcome == bit)
                .ok_or_else(|| {
                    Error::CascadeMismatch(format!("sub-branch {bit} carries no probability"))
                })?;
            probability *= chosen.probability;
            state = chosen.residual;
        }
        let level = group.run.level;
        let exact = ExactRational::dyadic(1, (copies as u32) - level);
        if (probability - exact.to_f64()).abs() > NORM_TOL {
            return Err(Error::CascadeMismatch(format!(
                "branch probability {probability} differs from {exact}"
            )));
        }
        verify_ramp_residual(&state, group.run)?;
        branches.push(CascadeBranch {
            level,
            global_phase_exponent: group.run.global_phase_exponent(),
            probability: exact,
            program_state: state,
            path: group.path.clone(),
        });
    }
    Ok(branches)
}

/// Draws one cascade branch according to its probability.
pub fn sample_cascade(
    branches: &[CascadeBranch],
    uniform_draw: f64,
) -> Result<&CascadeBranch> {
    let mut accumulated = 0.0;
    for branch in branches {
        accumulated += branch.probability.to_f64();
        if uniform_draw < accumulated {
            return Ok(branch);
        }
    }
    branches
        .last()
        .ok_or_else(|| Error::CascadeMismatch("empty cascade".into()))
}

/// Checks that `state` is the ramp `e^{-i start theta} 2^{-level/2}
/// sum_t e^{-i t theta} |t>` for the theta embedded in the state itself:
/// uniform magnitudes, constant unit-modulus ratio between neighbours, and
/// a leading amplitude equal to that ratio raised to `start`.
fn verify_ramp_residual(state: &StateVector, run: PhaseRun) -> Result<()> {
    if state.num_qubits() != run.level as usize {
        return Err(Error::CascadeMismatch(format!(
            "residual has {} qubits, expected {}",
            state.num_qubits(),
            run.level
        )));
    }
    let dim = state.dim();
    let magnitude = (dim as f64).sqrt().recip();
    for j in 0..dim {
        if (state.amplitude(j).norm() - magnitude).abs() > NORM_TOL {
            return Err(Error::CascadeMismatch(format!(
                "residual magnitude uneven at index {j}"
            )));
        }
    }
    let step = state.amplitude(1) / state.amplitude(0);
    if (step.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::CascadeMismatch("phase step is not unimodular".into()));
    }
    for j in 0..dim - 1 {
        let ratio = state.amplitude(j + 1) / state.amplitude(j);
        if (ratio - step).norm() > NORM_TOL {
            return Err(Error::CascadeMismatch(format!(
                "phase ramp breaks at index {j}"
            )));
        }
    }
    let expected_head = step.powi(run.start as i32) * magnitude;
    if (state.amplitude(0) - expected_head).norm() > NORM_TOL {
        return Err(Error::CascadeMismatch(format!(
            "global phase differs from exponent {}",
            run.start
        )));
    }
    Ok(())
}

/// Probability `q_s = 2^s W_s / 2^{2^x - 1}` of ending the cascade in the
/// level-`s` program state, as exact rationals keyed by `s`.
pub fn q_distribution(plan: &AllocationPlan) -> std::collections::BTreeMap<u32, ExactRational> {
    let copies = plan.num_copies() as u32;
    (1..=plan.x())
        .filter(|&s| plan.group_count(s) > 0)
        .map(|s| {
            let q = ExactRational::dyadic(plan.group_count(s), copies - s);
            (s, q)
        })
        .collect()
}

fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u64 = 1;
    for i in 1..=k {
        result = result * (n - (k - i)) / i;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::binomial;
    use crate::programs::copies_program;
    use num_bigint::BigUint;
    use num_complex::Complex64;

    #[test]
    fn three_copy_plan_matches_hand_construction() {
        let plan = build_allocation(2).unwrap();
        assert_eq!(plan.num_copies(), 3);
        assert_eq!(plan.outcome_register(), 1);
        assert_eq!(plan.group_count(2), 1);
        assert_eq!(plan.group_count(1), 2);
        let runs: Vec<_> = plan.groups().iter().map(|g| g.run).collect();
        assert_eq!(
            runs,
            vec![
                PhaseRun { start: 0, level: 2 },
                PhaseRun { start: 1, level: 1 },
                PhaseRun { start: 1, level: 1 },
            ]
        );
        let paths: Vec<_> = plan.groups().iter().map(|g| g.path.clone()).collect();
        assert_eq!(paths, vec![vec![0], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn seven_copy_plan_counts() {
        let plan = build_allocation(3).unwrap();
        assert_eq!(plan.group_count(3), 1);
        assert_eq!(plan.group_count(2), 26);
        assert_eq!(plan.group_count(1), 8);
        // All level-1 groups sit on the middle pair {3, 4}.
        for group in plan.groups() {
            if group.run.level == 1 {
                assert_eq!(group.run.start, 3);
            }
        }
    }

    #[test]
    fn fifteen_copy_plan_counts() {
        let plan = build_allocation(4).unwrap();
        assert_eq!(plan.group_count(4), 1);
        assert_eq!(plan.group_count(3), 1818);
        assert_eq!(plan.group_count(2), 4488);
        assert_eq!(plan.group_count(1), 128);
    }

    #[test]
    fn counting_identities_hold_for_all_supported_x() {
        for x in 1..=4u32 {
            let plan = build_allocation(x).unwrap();
            let copies = plan.num_copies() as u64;
            let total_groups: u64 = (1..=x).map(|s| plan.group_count(s)).sum();
            let middle = binomial(copies, (copies - 1) / 2);
            assert_eq!(BigUint::from(total_groups), middle);
            let total_terms: u64 = (1..=x).map(|s| plan.group_count(s) << s).sum();
            assert_eq!(total_terms, 1u64 << copies);
        }
    }

    #[test]
    fn every_run_straddles_the_middle() {
        for x in 1..=4u32 {
            let plan = build_allocation(x).unwrap();
            for group in plan.groups() {
                assert!(group.run.straddles_middle(x), "{:?}", group.run);
            }
        }
    }

    #[test]
    fn permutation_is_a_bijection_and_weight_compatible() {
        for x in 1..=3u32 {
            let plan = build_allocation(x).unwrap();
            let permutation = synthesize_permutation(&plan).unwrap();
            let inverse = permutation.inverse();
            let exponents = plan.slot_exponents();
            for j in 0..permutation.size() {
                assert_eq!(inverse[permutation.forward()[j]], j);
                let slot = permutation.forward()[j];
                assert_eq!(exponents[slot], j.count_ones() as usize);
            }
        }
    }

    #[test]
    fn three_copy_permuted_state_matches_published_layout() {
        let theta = 0.7;
        let plan = build_allocation(2).unwrap();
        let permutation = synthesize_permutation(&plan).unwrap();
        let permuted = permutation
            .apply(&copies_program(theta, 3).unwrap())
            .unwrap();
        let w = 8f64.sqrt().recip();
        let expected_exponents = [0, 1, 2, 3, 1, 2, 1, 2];
        for (j, e) in expected_exponents.into_iter().enumerate() {
            let expected = Complex64::cis(-(e as f64) * theta) * w;
            assert!((permuted.amplitude(j) - expected).norm() < NORM_TOL);
        }
    }

    #[test]
    fn three_copy_permutation_acts_like_a_cnot() {
        // Control on qubit 1, target on qubit 2 (the leftmost).
        let cnot: Vec<usize> = (0..8).map(|j| j ^ (((j >> 1) & 1) << 2)).collect();
        let plan = build_allocation(2).unwrap();
        let permutation = synthesize_permutation(&plan).unwrap();
        let exponents = plan.slot_exponents();
        for theta in [0.7, 2.31] {
            let copies = copies_program(theta, 3).unwrap();
            let ours = permutation.apply(&copies).unwrap();
            let via_cnot = copies.permute_basis(&cnot).unwrap();
            for j in 0..8 {
                assert!((ours.amplitude(j) - via_cnot.amplitude(j)).norm() < NORM_TOL);
            }
        }
        // The gate realizes the same slot exponents the plan assigned.
        for (source, &dest) in cnot.iter().enumerate() {
            assert_eq!(exponents[dest], source.count_ones() as usize);
        }
    }

    #[test]
    fn cascade_reproduces_published_branches_for_seven_copies() {
        let theta = 0.7;
        let plan = build_allocation(3).unwrap();
        let permutation = synthesize_permutation(&plan).unwrap();
        let permuted = permutation
            .apply(&copies_program(theta, 7).unwrap())
            .unwrap();
        let branches = measurement_cascade(&permuted, &plan).unwrap();
        assert_eq!(branches.len(), 35);

        // Outcome 0 carries the level-3 ramp state with probability 1/16.
        let head = branches.iter().find(|b| b.path[0] == 0).unwrap();
        assert_eq!(head.level, 3);
        assert_eq!(head.probability, ExactRational::new(1, 16));
        assert_eq!(head.global_phase_exponent, 0);
        let ramp = crate::programs::vmc_program(theta, 3).unwrap();
        let fidelity = head.program_state.fidelity_up_to_global_phase(&ramp).unwrap();
        assert!((fidelity - 1.0).abs() < NORM_TOL);

        // Outcomes 14 and 15 carry level-1 states with exponent 3 and
        // combined probability 1/8.
        let mut tail_probability = ExactRational::zero();
        for branch in branches.iter().filter(|b| b.path[0] >= 14) {
            assert_eq!(branch.level, 1);
            assert_eq!(branch.global_phase_exponent, 3);
            tail_probability += &branch.probability;
        }
        assert_eq!(tail_probability, ExactRational::new(1, 8));

        let total = branches
            .iter()
            .fold(ExactRational::zero(), |acc, b| acc + b.probability.clone());
        assert_eq!(total, ExactRational::one());
    }

    #[test]
    fn cascade_branches_for_three_copies() {
        let theta = 2.31;
        let plan = build_allocation(2).unwrap();
        let permutation = synthesize_permutation(&plan).unwrap();
        let permuted = permutation
            .apply(&copies_program(theta, 3).unwrap())
            .unwrap();
        let branches = measurement_cascade(&permuted, &plan).unwrap();
        assert_eq!(branches.len(), 3);
        // Outcome 1 splits into two level-1 sub-branches, both with the
        // global phase exponent 1.
        for branch in branches.iter().filter(|b| b.path[0] == 1) {
            assert_eq!(branch.level, 1);
            assert_eq!(branch.global_phase_exponent, 1);
            assert_eq!(branch.probability, ExactRational::new(1, 4));
        }
    }

    #[test]
    fn q_distribution_values() {
        let plan = build_allocation(3).unwrap();
        let q = q_distribution(&plan);
        assert_eq!(q[&3], ExactRational::new(1, 16));
        assert_eq!(q[&2], ExactRational::new(13, 16));
        assert_eq!(q[&1], ExactRational::new(1, 8));

        let plan = build_allocation(2).unwrap();
        let q = q_distribution(&plan);
        assert_eq!(q[&2], ExactRational::new(1, 2));
        assert_eq!(q[&1], ExactRational::new(1, 2));

        let plan = build_allocation(1).unwrap();
        let q = q_distribution(&plan);
        assert_eq!(q.len(), 1);
        assert_eq!(q[&1], ExactRational::one());
    }

    #[test]
    fn q_distribution_matches_measured_branches() {
        for x in 1..=4u32 {
            let plan = build_allocation(x).unwrap();
            let permutation = synthesize_permutation(&plan).unwrap();
            let copies = copies_program(0.7, plan.num_copies() as u32).unwrap();
            let permuted = permutation.apply(&copies).unwrap();
            let branches = measurement_cascade(&permuted, &plan).unwrap();
            let mut measured: std::collections::BTreeMap<u32, ExactRational> = Default::default();
            for branch in &branches {
                measured
                    .entry(branch.level)
                    .and_modify(|q| *q += &branch.probability)
                    .or_insert_with(|| branch.probability.clone());
            }
            assert_eq!(measured, q_distribution(&plan));
        }
    }

    #[test]
    fn single_copy_plan_is_trivial() {
        let plan = build_allocation(1).unwrap();
        assert_eq!(plan.groups().len(), 1);
        assert_eq!(plan.groups()[0].run, PhaseRun { start: 0, level: 1 });
        assert_eq!(plan.outcome_register(), 0);
        let permutation = synthesize_permutation(&plan).unwrap();
        let copies = copies_program(0.7, 1).unwrap();
        let permuted = permutation.apply(&copies).unwrap();
        let branches = measurement_cascade(&permuted, &plan).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].probability, ExactRational::one());
    }

    #[test]
    fn out_of_range_levels_are_rejected() {
        assert!(build_allocation(0).is_err());
        assert!(build_allocation(5).is_err());
    }
}
